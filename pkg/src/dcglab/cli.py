"""Command-line harness: experiments, dictionary management, the service."""

from __future__ import annotations

import asyncio
import sys

import click

from .assets import GameType
from .engine import CANONICAL_PARAMS
from .experiments import (EXPERIMENTS, ExperimentSpec, format_table,
                          read_metrics, report, run_experiment)

_GAMES = [g.value for g in GameType]


def _parse_games(games: str) -> tuple[GameType, ...]:
    if games == "all":
        return tuple(GameType)
    return tuple(GameType(g.strip()) for g in games.split(","))


def _parse_params(params: str) -> tuple[tuple[int, int], ...]:
    if params == "canonical":
        return CANONICAL_PARAMS
    out = []
    for part in params.split(","):
        fps, count = part.split("x")
        out.append((int(fps), int(count)))
    return tuple(out)


games_option = click.option("--games", default="all", show_default=True,
                            help=f"comma list of {_GAMES} or 'all'")
params_option = click.option("--params", default="canonical", show_default=True,
                             help="fps x count pairs, e.g. '20x4,40x4', or "
                                  "'canonical' for the five standard pairs")
seed_option = click.option("--seed", default=1, show_default=True,
                           help="master seed; reruns are byte-identical")
fmt_option = click.option("--format", "fmt", default="csv", show_default=True,
                          type=click.Choice(["csv", "json"]))


@click.group()
def main():
    """Game-captcha lab: engine, attacks, relay simulation, service."""


@main.command("probe-train")
@games_option
@params_option
@click.option("--runs", default=15, show_default=True,
              help="challenge runs allowed per game while probing")
@click.option("--drag-cap", default=2, show_default=True)
@click.option("--dict", "dictionary", default="dcglab.dcgd", show_default=True,
              help="output dictionary path")
@click.option("--out", default="probe_train.csv", show_default=True)
@seed_option
@fmt_option
def probe_train(games, params, runs, drag_cap, dictionary, out, seed, fmt):
    """Learn games by probing; build the attack dictionary."""
    spec = ExperimentSpec(experiment="probe-train", games=_parse_games(games),
                          params=_parse_params(params), runs=runs,
                          master_seed=seed, fmt=fmt, dictionary=dictionary,
                          drag_cap=drag_cap)
    path = run_experiment(spec, out)
    _echo_file(path)


@main.command("attack")
@games_option
@params_option
@click.option("--runs", default=100, show_default=True)
@click.option("--drag-cap", default=2, show_default=True)
@click.option("--dict", "dictionary", default="dcglab.dcgd", show_default=True)
@click.option("--out", default="dict_attack.csv", show_default=True)
@seed_option
@fmt_option
def attack_cmd(games, params, runs, drag_cap, dictionary, out, seed, fmt):
    """Dictionary attack on fresh challenges."""
    spec = ExperimentSpec(experiment="dict-attack", games=_parse_games(games),
                          params=_parse_params(params), runs=runs,
                          master_seed=seed, fmt=fmt, dictionary=dictionary,
                          drag_cap=drag_cap)
    path = run_experiment(spec, out)
    _echo_file(path)


@main.command("guess")
@click.option("--r", "r_values", default="1,2", show_default=True,
              help="target-object counts to evaluate")
@click.option("--trials", default=1_000_000, show_default=True,
              help="Monte-Carlo trials per r; 0 for analytic only")
@click.option("--out", default="guess_baseline.csv", show_default=True)
@seed_option
@fmt_option
def guess(r_values, trials, out, seed, fmt):
    """Random-guessing baseline: analytic and Monte-Carlo rates."""
    spec = ExperimentSpec(experiment="guess-baseline",
                          r_values=tuple(int(v) for v in r_values.split(",")),
                          trials=trials, master_seed=seed, fmt=fmt)
    path = run_experiment(spec, out)
    _echo_file(path)


@main.command("relay")
@games_option
@params_option
@click.option("--trials", default=500, show_default=True)
@click.option("--out", default="relay_sweep.csv", show_default=True)
@seed_option
@fmt_option
def relay(games, params, trials, out, seed, fmt):
    """Static-relay simulation with per-game reaction-time defaults."""
    spec = ExperimentSpec(experiment="relay-sweep", games=_parse_games(games),
                          params=_parse_params(params), trials=trials,
                          master_seed=seed, fmt=fmt)
    path = run_experiment(spec, out)
    _echo_file(path)


@main.command("vision-bench")
@games_option
@params_option
@click.option("--runs", default=50, show_default=True, help="seeds per cell")
@click.option("--out", default="vision_bench.csv", show_default=True)
@seed_option
@fmt_option
def vision_bench(games, params, runs, out, seed, fmt):
    """Background learning and target detection accuracy."""
    spec = ExperimentSpec(experiment="vision-bench", games=_parse_games(games),
                          params=_parse_params(params), runs=runs,
                          master_seed=seed, fmt=fmt)
    path = run_experiment(spec, out)
    _echo_file(path)


@main.command("report")
@click.argument("files", nargs=-1, type=click.Path(exists=True))
@click.option("--out", default=None, help="write the merged table here")
@fmt_option
def report_cmd(files, out, fmt):
    """Merge metric files into one comparison table."""
    columns, rows = report(list(files), out=out, fmt=fmt)
    if rows:
        click.echo(format_table(columns, rows))
    else:
        click.echo("(empty table)")


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8321, show_default=True)
@click.option("--config", "config_path", default=None,
              help="JSON file with ServiceConfig fields; flags override")
@click.option("--drag-cap", default=None, type=int)
@click.option("--hold-cap", default=None, type=int)
@click.option("--allow-oracle", is_flag=True, default=False,
              help="experiment flag: expose ground truth for harnesses")
@click.option("--static-dir", default=None,
              help="serve a built frontend from this directory")
@click.option("--compress", is_flag=True, default=False)
def serve(host, port, config_path, drag_cap, hold_cap, allow_oracle,
          static_dir, compress):
    """Run the challenge service (binary + HTTP on one port)."""
    from .service.server import ChallengeService, ServiceConfig
    if config_path:
        cfg = ServiceConfig.from_file(
            config_path, host=host, port=port, drag_cap=drag_cap,
            hold_cap=hold_cap, static_dir=static_dir)
        cfg.allow_oracle = cfg.allow_oracle or allow_oracle
        cfg.compress_frames = cfg.compress_frames or compress
    else:
        cfg = ServiceConfig(host=host, port=port,
                            drag_cap=drag_cap if drag_cap is not None else 2,
                            hold_cap=hold_cap, allow_oracle=allow_oracle,
                            static_dir=static_dir, compress_frames=compress)
    service = ChallengeService(cfg)

    async def run():
        actual = await service.start()
        click.echo(f"dcglab service listening on {cfg.host}:{actual}", err=False)
        sys.stdout.flush()
        async with service._server:
            await service._server.serve_forever()

    try:
        asyncio.run(run())
    except KeyboardInterrupt:
        pass


def _echo_file(path):
    meta, columns, rows = read_metrics(path)
    summary = [r for r in rows if r and r[0] in ("mean", "stddev")]
    shown = summary if summary else rows
    click.echo(format_table(columns, shown))
    click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
