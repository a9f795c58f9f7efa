"""Monte-Carlo simulator of the static-relay attack.

A bot snapshots the live game for a modeled human solver; the solver's
delayed click coordinates are replayed into the still-moving game. The
solver model is an oracle on the snapshot (it always reads the right
pixel), so every failure comes from desynchronization: by click time the
object has drifted out from under the reported point.

Protocol per trial: mark a target (select delay), then per answer object
repeat stimulus -> reaction delay -> click at the snapshot coordinates ->
drop on the static target, retrying on a miss, until complete or timeout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .assets import GameType
from .engine import (GameConfig, NoObjectAtPoint, SessionNotInProgress,
                     Status, new_game)
from .reference import REACTION_ALL_CLICKS


@dataclass
class Distribution:
    """Normal with a truncation floor; sigma 0 gives a constant."""
    mean: float
    std: float = 0.0
    floor: float = 0.2

    def sample(self, rng: np.random.Generator) -> float:
        if self.std <= 0:
            return max(self.mean, self.floor)
        for _ in range(64):
            x = rng.normal(self.mean, self.std)
            if x >= self.floor:
                return x
        return self.floor


ZERO_DELAY = Distribution(mean=0.0, std=0.0, floor=0.0)


@dataclass
class RelayModel:
    reaction: Distribution
    latency: Distribution = field(default_factory=lambda: ZERO_DELAY)
    per_target_select_time: Distribution | None = None  # defaults to reaction
    retry_policy: int | None = None  # max stimulus retries per object; None = until timeout

    @classmethod
    def for_game(cls, game_type: GameType) -> "RelayModel":
        mean, std = REACTION_ALL_CLICKS[GameType(game_type)]
        return cls(reaction=Distribution(mean=mean, std=std))

    def select_dist(self) -> Distribution:
        return self.per_target_select_time or self.reaction


@dataclass
class RelayStats:
    trials: int = 0
    completions: int = 0
    clicks: int = 0
    correct_clicks: int = 0
    wrong_object_drags: int = 0
    empty_clicks: int = 0
    drop_failures: int = 0           # drops that missed the static target: stays 0
    overall_times: list[float] = field(default_factory=list)
    successful_times: list[float] = field(default_factory=list)
    reaction_samples: list[float] = field(default_factory=list)

    @property
    def completion_rate(self) -> float:
        return self.completions / self.trials if self.trials else 0.0

    @property
    def overall_time(self) -> float:
        return float(np.mean(self.overall_times)) if self.overall_times else 0.0

    @property
    def overall_time_std(self) -> float:
        return float(np.std(self.overall_times)) if self.overall_times else 0.0

    @property
    def successful_time(self) -> float | None:
        return float(np.mean(self.successful_times)) if self.successful_times else None

    @property
    def successful_time_std(self) -> float | None:
        return float(np.std(self.successful_times)) if self.successful_times else None

    @property
    def error_rate_per_click(self) -> float:
        return 1.0 - self.success_rate_per_click

    @property
    def success_rate_per_click(self) -> float:
        return self.correct_clicks / self.clicks if self.clicks else 1.0


def simulate_static_relay(config: GameConfig, model: RelayModel, trials: int,
                          seed: int = 0, collect_samples: bool = True) -> RelayStats:
    """Run ``trials`` independent relay attempts; timeouts count as the
    full game budget in overall time."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    stats = RelayStats()
    for k in range(trials):
        _run_trial(config, model, seed * 1000003 + k, stats, collect_samples)
    stats.trials = trials
    return stats


def _run_trial(config: GameConfig, model: RelayModel, trial_seed: int,
               stats: RelayStats, collect_samples: bool) -> None:
    rng = np.random.default_rng(trial_seed)
    cfg = GameConfig(
        game_type=config.game_type, fps=config.fps,
        object_count=config.object_count, frame_width=config.frame_width,
        frame_height=config.frame_height, timeout=config.timeout,
        drag_cap=config.drag_cap, hold_cap=config.hold_cap,
        seed=trial_seed, instance_seed=config.instance_seed,
        matched_visible=config.matched_visible)
    session = new_game(cfg)
    timeout = cfg.timeout
    fps = cfg.fps
    t = 0.0

    def advance_to(wall: float) -> None:
        target = min(int(wall * fps), cfg.timeout_frames)
        if target > session.frame_index:
            session.advance(target - session.frame_index)

    # answer objects in render order; each is "one target" for the solver
    answers = [o for o in session.objects if o.is_answer]
    for obj in answers:
        # step 1: the solver marks the target object on a snapshot
        t += 2 * model.latency.sample(rng) + model.select_dist().sample(rng)
        advance_to(t)
        if session.is_terminal():
            break

        target_point = session.layout.sub_targets[obj.bound_target].centroid
        retries = 0
        while not session.is_terminal() and not obj.matched:
            if model.retry_policy is not None and retries > model.retry_policy:
                break
            retries += 1
            # steps 2-3: stimulus on a fresh snapshot, delayed click replay
            snapshot_point = session.centroid(obj.id)
            reaction = model.reaction.sample(rng)
            if collect_samples:
                stats.reaction_samples.append(reaction)
            t += 2 * model.latency.sample(rng) + reaction
            advance_to(t)
            if session.is_terminal():
                break
            stats.clicks += 1
            try:
                handle = session.begin_drag(snapshot_point)
            except NoObjectAtPoint:
                stats.empty_clicks += 1
                continue
            except SessionNotInProgress:
                break
            # drop always lands on the static target's current coordinates
            feedback = session.drop(handle, target_point)
            if feedback.object_id == obj.id and feedback.outcome == "star":
                stats.correct_clicks += 1
            else:
                stats.wrong_object_drags += 1
                if feedback.outcome == "star":
                    # grabbed some other answer straight onto this target:
                    # impossible (targets are bound), counted defensively
                    stats.drop_failures += 1
        if session.is_terminal():
            break

    if session.status is Status.COMPLETE:
        stats.completions += 1
        stats.overall_times.append(min(t, timeout))
        stats.successful_times.append(min(t, timeout))
    elif session.status is Status.TIMED_OUT or t >= timeout:
        stats.overall_times.append(timeout)
    else:
        stats.overall_times.append(min(t, timeout))


def reaction_mean_grid(config: GameConfig, means: tuple[float, ...],
                       trials: int, seed: int = 0,
                       std: float = 0.0) -> list[tuple[float, RelayStats]]:
    """Sweep reaction means at fixed everything else (degradation curves)."""
    out = []
    for mu in means:
        model = RelayModel(reaction=Distribution(mean=mu, std=std, floor=0.0),
                           per_target_select_time=Distribution(mu, std, floor=0.0))
        out.append((mu, simulate_static_relay(config, model, trials, seed,
                                              collect_samples=False)))
    return out
