"""Desk-scale experiment harness and its metrics files.

Every experiment runs headless against the embedded engine, writes one row
per run plus mean/stddev summary rows, and is byte-reproducible from
(spec, master seed). Reference baselines ride along as annotations.

Metrics file format (v1): CSV with two comment lines

    # dcglab-metrics 1
    # meta: {...json...}
    <column row>
    <data rows>

or the JSON mirror {"format": "dcglab-metrics", "version": 1, "meta": {},
"columns": [], "rows": []}.
"""

from __future__ import annotations

import io
import json
import statistics
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import reference, vision
from .assets import ANSWER_COUNT, GameType
from .engine import CANONICAL_PARAMS, GameConfig, new_game, play_perfectly
from .relay import Distribution, RelayModel, simulate_static_relay
from .solver import (KnowledgeBase, LocalDriver, attack, probe_game)
from .solver.guessing import GuessModel, analytic_guess_probability, random_guess_attack
from .vision import VisionParams

HEADER = "# dcglab-metrics 1"

EXPERIMENTS = ("probe-train", "dict-attack", "guess-baseline", "relay-sweep",
               "vision-bench")


@dataclass
class ExperimentSpec:
    experiment: str
    games: tuple[GameType, ...] = tuple(GameType)
    params: tuple[tuple[int, int], ...] = CANONICAL_PARAMS
    runs: int = 15
    trials: int = 10_000
    r_values: tuple[int, ...] = (1, 2)
    master_seed: int = 1
    fmt: str = "csv"
    dictionary: str | None = None
    drag_cap: int = 2

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"experiment must be one of {EXPERIMENTS}")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        self.games = tuple(GameType(g) for g in self.games)


def _fmt_value(v) -> str:
    if isinstance(v, float):
        return format(v, ".6g")
    return "" if v is None else str(v)


def write_metrics(path: str | Path, fmt: str, meta: dict,
                  columns: list[str], rows: list[list]) -> None:
    path = Path(path)
    if fmt == "json":
        doc = {"format": "dcglab-metrics", "version": 1, "meta": meta,
               "columns": columns, "rows": rows}
        path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
        return
    buf = io.StringIO()
    buf.write(HEADER + "\n")
    buf.write("# meta: " + json.dumps(meta, sort_keys=True) + "\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt_value(v) for v in row) + "\n")
    path.write_text(buf.getvalue())


def read_metrics(path: str | Path) -> tuple[dict, list[str], list[list[str]]]:
    path = Path(path)
    text = path.read_text()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        if doc.get("format") != "dcglab-metrics":
            raise ValueError(f"{path} is not a metrics file")
        return doc["meta"], doc["columns"], [[_fmt_value(v) for v in r]
                                             for r in doc["rows"]]
    lines = text.splitlines()
    if not lines or not lines[0].startswith(HEADER):
        raise ValueError(f"{path} is not a metrics file")
    meta = json.loads(lines[1].split("# meta: ", 1)[1])
    columns = lines[2].split(",")
    rows = [line.split(",") for line in lines[3:] if line]
    return meta, columns, rows


def _summary_rows(columns, rows, key_cols, stat_cols):
    """Append mean/stddev rows over the numeric stat columns."""
    out = []
    for stat, fn in (("mean", statistics.fmean),
                     ("stddev", lambda v: statistics.pstdev(v) if len(v) > 1 else 0.0)):
        row = []
        for c in columns:
            if c == "stat":
                row.append(stat)
            elif c in stat_cols:
                vals = [float(r[columns.index(c)]) for r in rows
                        if r[columns.index(c)] not in ("", None)]
                row.append(fn(vals) if vals else "")
            else:
                row.append("")
        out.append(row)
    return out


# -- individual experiments ---------------------------------------------------


def run_probe_train(spec: ExperimentSpec) -> tuple[dict, list[str], list[list]]:
    kb = KnowledgeBase()
    columns = ["stat", "game_type", "fps", "object_count", "seed", "bindings",
               "expected_bindings", "complete", "drags", "drags_per_object",
               "runs_used", "learn_seconds"]
    rows = []
    for gi, game in enumerate(spec.games):
        for pi, (fps, count) in enumerate(spec.params):
            seed = spec.master_seed + gi * 1009 + pi * 101
            cfg = GameConfig(game_type=game, fps=fps, object_count=count,
                             seed=seed, drag_cap=spec.drag_cap)
            driver = LocalDriver(cfg)
            rec, stats = probe_game(driver, VisionParams(), kb,
                                    max_runs=spec.runs, label=game.value)
            rows.append(["", game.value, fps, count, seed, len(rec.bindings),
                         ANSWER_COUNT[game], int(rec.complete), stats.drags,
                         stats.drags / count, stats.runs, stats.learn_seconds])
    if spec.dictionary:
        kb.save(spec.dictionary)
    meta = {"experiment": "probe-train", "master_seed": spec.master_seed,
            "runs_budget": spec.runs, "drag_cap": spec.drag_cap,
            "dictionary": Path(spec.dictionary).name if spec.dictionary else None,
            "note": "drags_per_object target < 2"}
    rows += _summary_rows(columns, rows, [],
                          ["bindings", "drags", "drags_per_object", "runs_used",
                           "learn_seconds"])
    return meta, columns, rows


def run_dict_attack(spec: ExperimentSpec) -> tuple[dict, list[str], list[list]]:
    if not spec.dictionary:
        raise ValueError("dict-attack needs a dictionary path")
    kb = KnowledgeBase.load(spec.dictionary)
    columns = ["stat", "game_type", "fps", "object_count", "run", "seed",
               "outcome", "success", "drags", "expected_drags", "sim_seconds",
               "learned_new"]
    rows = []
    for gi, game in enumerate(spec.games):
        for pi, (fps, count) in enumerate(spec.params):
            for run in range(spec.runs):
                seed = spec.master_seed + gi * 7919 + pi * 607 + run * 13
                cfg = GameConfig(game_type=game, fps=fps, object_count=count,
                                 seed=seed, drag_cap=spec.drag_cap)
                res = attack(LocalDriver(cfg), kb)
                rows.append(["", game.value, fps, count, run, seed,
                             res.outcome, int(res.outcome == "success"),
                             res.drags_total, ANSWER_COUNT[game],
                             res.sim_seconds, int(res.learned_new)])
    meta = {"experiment": "dict-attack", "master_seed": spec.master_seed,
            "dictionary": Path(spec.dictionary).name,
            "reference_wall_clock": {
                "attack_avg_s": reference.ATTACK_TIME_AVG,
                "attack_max_s": reference.ATTACK_TIME_MAX,
                "background_learning_avg_s": reference.BACKGROUND_LEARN_TIME_AVG},
            "note": "sim_seconds is simulated game time, not wall clock"}
    rows += _summary_rows(columns, rows, [], ["success", "drags", "sim_seconds"])
    return meta, columns, rows


def run_guess_baseline(spec: ExperimentSpec) -> tuple[dict, list[str], list[list]]:
    columns = ["stat", "r", "trials", "successes", "empirical_rate",
               "ci95_low", "ci95_high", "analytic_rate", "analytic_exact"]
    rows = []
    for r in spec.r_values:
        model = GuessModel(r=r)
        if spec.trials > 0:
            out = random_guess_attack(model, spec.trials,
                                      seed=spec.master_seed + r)
            rows.append(["", r, out.trials, out.successes, out.rate,
                         out.ci95[0], out.ci95[1], float(out.analytic),
                         f"1/{out.analytic.denominator}"])
        else:
            p = analytic_guess_probability(model)
            rows.append(["", r, 0, 0, "", "", "", float(p),
                         f"1/{p.denominator}"])
    meta = {"experiment": "guess-baseline", "master_seed": spec.master_seed,
            "trials": spec.trials}
    return meta, columns, rows


def run_relay_sweep(spec: ExperimentSpec) -> tuple[dict, list[str], list[list]]:
    columns = ["stat", "game_type", "fps", "object_count", "trials",
               "completion_rate", "overall_time_s", "overall_time_std",
               "successful_time_s", "successful_time_std",
               "error_rate_per_click", "success_rate_per_click",
               "mean_reaction_s", "direct_time_s", "direct_error_per_click",
               "ref_overall_time_s", "ref_successful_time_s",
               "ref_error_per_click", "ref_direct_time_s"]
    rows = []
    for gi, game in enumerate(spec.games):
        for pi, (fps, count) in enumerate(spec.params):
            seed = spec.master_seed + gi * 31 + pi * 7
            cfg = GameConfig(game_type=game, fps=fps, object_count=count,
                             drag_cap=10 ** 9)
            model = RelayModel.for_game(game)
            st = simulate_static_relay(cfg, model, spec.trials, seed=seed)
            # scripted direct-play oracle on matching sessions
            direct_times = []
            for k in range(min(spec.trials, 50)):
                s = new_game(GameConfig(game_type=game, fps=fps,
                                        object_count=count, seed=seed + k))
                play_perfectly(s)
                direct_times.append(s.frame_index / fps)
            mean_reaction = (statistics.fmean(st.reaction_samples)
                             if st.reaction_samples else 0.0)
            rows.append(["", game.value, fps, count, spec.trials,
                         st.completion_rate, st.overall_time,
                         st.overall_time_std,
                         st.successful_time if st.successful_time is not None else "",
                         st.successful_time_std if st.successful_time_std is not None else "",
                         st.error_rate_per_click, st.success_rate_per_click,
                         mean_reaction, statistics.fmean(direct_times), 0.0,
                         reference.RELAY_OVERALL_TIME[game][0],
                         reference.RELAY_SUCCESSFUL_TIME[game][0],
                         reference.RELAY_ERROR_PER_CLICK[game],
                         reference.DIRECT_PLAY_TIME[game][0]])
    meta = {"experiment": "relay-sweep", "master_seed": spec.master_seed,
            "trials": spec.trials,
            "reaction_defaults": {g.value: reference.REACTION_ALL_CLICKS[g]
                                  for g in spec.games},
            "note": "ref_* columns are published baselines; timeouts count 60 s"}
    rows += _summary_rows(columns, rows, [],
                          ["completion_rate", "overall_time_s",
                           "error_rate_per_click"])
    return meta, columns, rows


def run_vision_bench(spec: ExperimentSpec) -> tuple[dict, list[str], list[list]]:
    params = VisionParams()
    columns = ["stat", "game_type", "fps", "object_count", "seed",
               "bg_error_rate", "mbr_center_inside", "objects_found",
               "objects_expected"]
    rows = []
    for gi, game in enumerate(spec.games):
        for pi, (fps, count) in enumerate(spec.params):
            for run in range(spec.runs):
                seed = spec.master_seed + gi * 2003 + pi * 211 + run * 3
                cfg = GameConfig(game_type=game, fps=fps, object_count=count,
                                 seed=seed)
                session = new_game(cfg)
                gt = session.ground_truth()
                step = max(1, round(params.sample_interval * fps))
                stack = []
                for _ in range(params.learn_frames):
                    stack.append(session.render().codes)
                    session.advance(step)
                stack = np.stack(stack)
                bg = vision.learn_background(stack)
                err = float((bg.codes != gt.background).mean())
                idxs = vision.sample_indices(params.learn_frames,
                                             params.object_frames)
                masks = [vision.foreground_mask(stack[i], bg) for i in idxs]
                try:
                    est = vision.detect_target_mbr(bg, masks)
                    inside = int(gt.target_region.contains(*est.center))
                except vision.VisionError:
                    inside = 0
                _, objs = vision.select_object_frame(stack[idxs], bg, params)
                rows.append(["", game.value, fps, count, seed, err, inside,
                             len(objs), count])
    meta = {"experiment": "vision-bench", "master_seed": spec.master_seed,
            "runs": spec.runs,
            "note": "bg_error_rate reference bound: < 0.07 at 20 FPS"}
    rows += _summary_rows(columns, rows, [],
                          ["bg_error_rate", "mbr_center_inside",
                           "objects_found"])
    return meta, columns, rows


_RUNNERS = {
    "probe-train": run_probe_train,
    "dict-attack": run_dict_attack,
    "guess-baseline": run_guess_baseline,
    "relay-sweep": run_relay_sweep,
    "vision-bench": run_vision_bench,
}


def run_experiment(spec: ExperimentSpec, output: str | Path) -> Path:
    meta, columns, rows = _RUNNERS[spec.experiment](spec)
    write_metrics(output, spec.fmt, meta, columns, rows)
    return Path(output)


# -- report -------------------------------------------------------------------

KEY_COLUMNS = ("experiment", "game_type", "fps", "object_count")


def report(paths: list[str | Path], out: str | Path | None = None,
           fmt: str = "csv") -> tuple[list[str], list[list[str]]]:
    """Merge metrics files into one comparison table keyed by
    (game_type, fps, object_count, experiment). Summary rows only."""
    merged_cols: list[str] = list(KEY_COLUMNS) + ["stat"]
    merged: list[dict] = []
    for p in paths:
        meta, columns, rows = read_metrics(p)
        exp = meta.get("experiment", "?")
        for row in rows:
            rec = dict(zip(columns, row))
            entry = {"experiment": exp,
                     "game_type": rec.get("game_type", ""),
                     "fps": rec.get("fps", ""),
                     "object_count": rec.get("object_count", ""),
                     "stat": rec.get("stat", "")}
            for c, v in rec.items():
                if c in ("stat",) or c in KEY_COLUMNS:
                    continue
                entry[c] = v
                if c not in merged_cols:
                    merged_cols.append(c)
            merged.append(entry)
    table = [[e.get(c, "") for c in merged_cols] for e in merged]
    if out is not None:
        write_metrics(out, fmt, {"experiment": "report",
                                 "sources": [Path(p).name for p in paths]},
                      merged_cols, table)
    return merged_cols, table


def format_table(columns: list[str], rows: list[list[str]],
                 max_width: int = 14) -> str:
    if not rows:
        return "(empty table)"
    cols = [c[:max_width] for c in columns]
    widths = [len(c) for c in cols]
    srows = []
    for row in rows:
        srow = [str(v)[:max_width] for v in row]
        srows.append(srow)
        widths = [max(w, len(v)) for w, v in zip(widths, srow)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    for srow in srows:
        lines.append("  ".join(v.ljust(w) for v, w in zip(srow, widths)))
    return "\n".join(lines)
