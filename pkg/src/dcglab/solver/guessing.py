"""Random-guessing baseline: exact formulas and Monte-Carlo estimators.

The guessing model abstracts the scene into a 100-cell object grid and a
9-cell target grid: one attempt picks r distinct object cells and arranges
them onto r of the 9 target cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

MAX_TRIALS = 10 ** 8


@dataclass
class GuessModel:
    r: int                    # target-object count
    object_cells: int = 100   # 10 x 10 grid over the moving area
    target_cells: int = 9     # 3 x 3 grid over the target area

    def __post_init__(self):
        if not 1 <= self.r <= self.target_cells:
            raise ValueError("r must be in [1, target_cells]")


@dataclass
class ProbeModel:
    o: int   # foreground objects
    t: int   # answer objects
    a: int   # drag attempts allowed per object

    def __post_init__(self):
        if not 1 <= self.t <= self.o:
            raise ValueError("need 1 <= t <= o")
        if self.a < 1:
            raise ValueError("need a >= 1")


@dataclass
class GuessOutcome:
    successes: int
    trials: int
    rate: float
    ci95: tuple[float, float]
    analytic: Fraction


def analytic_guess_probability(model: GuessModel | int) -> Fraction:
    """Exact success probability of one guessing attempt:
    1 / (C(object_cells, r) * P(target_cells, r))."""
    if isinstance(model, int):
        model = GuessModel(r=model)
    c = math.comb(model.object_cells, model.r)
    p = math.perm(model.target_cells, model.r)
    return Fraction(1, c * p)


def estimate_probe_success(model: ProbeModel) -> Fraction:
    """Closed-form probe success estimate a^t / (C(o,t) * t!).

    Exceeds 1 when a > o - t + 1; the estimate is only meaningful as a
    probability on the valid domain (see probe_success_enumeration).
    """
    return Fraction(model.a ** model.t,
                    math.comb(model.o, model.t) * math.factorial(model.t))


def probe_success_enumeration(model: ProbeModel) -> Fraction:
    """Brute-force oracle for the probe-success estimate.

    Sequential process: for each target in turn, the attacker draws up to
    ``a`` distinct objects from the pool of unplaced ones; the target is hit
    iff its true answer is among the draws, which then leaves the pool. The
    per-target hit count is enumerated over all C(n, k) draw sets.

    Equals the closed form whenever a <= o - t + 1 (every factor a/n is a
    valid probability); beyond that the process saturates at 1 per target.
    """
    p = Fraction(1)
    pool = model.o
    for _ in range(model.t):
        k = min(model.a, pool)
        total = 0
        favorable = 0
        for draw in combinations(range(pool), k):
            total += 1
            if 0 in draw:  # index 0 stands for the target's true answer
                favorable += 1
        p *= Fraction(favorable, total)
        pool -= 1
    return p


def random_guess_attack(model: GuessModel, trials: int, seed: int = 0,
                        oracle=None) -> GuessOutcome:
    """Monte-Carlo guessing against an idealized grid oracle.

    Each trial draws r distinct object cells and an ordered arrangement
    onto the target grid; success iff it reproduces the hidden truth. A
    callable ``oracle(cells, targets) -> bool`` substitutes an engine-backed
    session when provided (small trial counts only).
    """
    if trials > MAX_TRIALS:
        raise ValueError(
            f"refusing {trials} trials (> {MAX_TRIALS}); use the analytic "
            "formula for vanishing probabilities")
    rng = np.random.default_rng(seed)
    r = model.r
    analytic = analytic_guess_probability(model)

    # hidden truth: r distinct object cells mapped to r distinct target cells
    truth_cells = np.sort(rng.choice(model.object_cells, size=r, replace=False))
    truth_targets = rng.choice(model.target_cells, size=r, replace=False)

    if oracle is not None:
        successes = 0
        for _ in range(trials):
            cells = np.sort(rng.choice(model.object_cells, size=r, replace=False))
            targets = rng.choice(model.target_cells, size=r, replace=False)
            if oracle(cells, targets):
                successes += 1
    else:
        successes = 0
        chunk = 1_000_000
        done = 0
        while done < trials:
            n = min(chunk, trials - done)
            done += n
            cells = _sorted_distinct(rng, model.object_cells, r, n)
            targets = _distinct(rng, model.target_cells, r, n)
            ok = np.ones(n, dtype=bool)
            for j in range(r):
                ok &= cells[:, j] == truth_cells[j]
                ok &= targets[:, j] == truth_targets[j]
            successes += int(ok.sum())

    rate = successes / trials
    half = 1.96 * math.sqrt(max(rate * (1 - rate), 1e-300) / trials)
    return GuessOutcome(successes=successes, trials=trials, rate=rate,
                        ci95=(max(0.0, rate - half), min(1.0, rate + half)),
                        analytic=analytic)


def engine_guess_oracle(config, seed: int = 0):
    """Trial oracle backed by real sessions: grid cells map onto the moving
    area and target band. Slow; for small-trial sanity checks only."""
    from dataclasses import replace
    from itertools import count

    from ..engine import EngineError, Status, new_game

    counter = count()

    def oracle(cells, targets) -> bool:
        s = new_game(replace(config, seed=seed + next(counter),
                             drag_cap=10 ** 9))
        m, band = s.layout.moving_area, s.layout.band
        for cell, tcell in zip(cells, targets):
            cx = m.x0 + (int(cell) % 10) * m.width // 10 + m.width // 20
            cy = m.y0 + (int(cell) // 10) * m.height // 10 + m.height // 20
            tx = band.x0 + (int(tcell) % 3) * band.width // 3 + band.width // 6
            ty = band.y0 + (int(tcell) // 3) * band.height // 3 + band.height // 6
            try:
                handle = s.begin_drag((cx, cy))
                s.drop(handle, (tx, ty))
            except EngineError:
                continue
        return s.status is Status.COMPLETE

    return oracle


def _distinct(rng: np.random.Generator, n: int, k: int, size: int) -> np.ndarray:
    """size x k ordered distinct uniform draws from [0, n), vectorized.

    Each column draws from the shrinking range and is shifted past the
    already-taken values (ascending remap), giving uniform arrangements.
    """
    out = np.empty((size, k), dtype=np.int64)
    for j in range(k):
        draw = rng.integers(0, n - j, size=size)
        if j > 0:
            prior = np.sort(out[:, :j], axis=1)
            for i in range(j):
                draw = draw + (draw >= prior[:, i])
        out[:, j] = draw
    return out


def _sorted_distinct(rng, n, k, size):
    return np.sort(_distinct(rng, n, k, size), axis=1)
