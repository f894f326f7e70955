"""Command-line entry points.

Subcommands map one-to-one to the prepackaged experiments plus a
single-cell `run` and the `verify-theory` checks. Options come from an
optional key = value config file, overridden by flags; every invocation
writes a JSON manifest recording the fully resolved configuration.
Failures print a single JSON error line to stderr and exit non-zero.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

from .experiments import (
    DEFAULT_AGENTS_GRID,
    DEFAULT_EPS_GRID,
    DEFAULT_STATES_GRID,
    CellResult,
    fig2_cells,
    run_cells,
    sweep_cells,
    three_state_cells,
    two_route_cells,
    verify_reachability,
)
from .recommenders import NAMES as RECOMMENDER_NAMES
from .reporting import aggregate_row, write_aggregate, write_manifest, write_trajectory
from .runner import ExperimentConfig

_CONFIG_FIELDS = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _coerce(name: str, raw: str):
    if name not in _CONFIG_FIELDS:
        raise ValueError(f"unknown config key: {name!r}")
    kind = type(getattr(ExperimentConfig(), name))
    if kind is bool:
        return _parse_bool(raw)
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    return raw


def read_config_file(path: str) -> dict:
    """Parse `key = value` lines; # starts a comment, blanks ignored."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}:{lineno}: expected key = value, got {line!r}")
        key, _, raw = stripped.partition("=")
        values[key.strip()] = _coerce(key.strip(), raw.strip())
    return values


def _add_common_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value config file; flags override it")
    parser.add_argument("--network", choices=("initial", "augmented"))
    parser.add_argument("--agents", type=int)
    parser.add_argument("--states", type=int)
    parser.add_argument("--recommender", choices=RECOMMENDER_NAMES)
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--epsilon", type=float)
    parser.add_argument("--epsilon-decay", type=_parse_bool, metavar="{true,false}")
    parser.add_argument("--init")
    parser.add_argument("--steps", type=int)
    parser.add_argument("--reps", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--noise-std", type=float)
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--jobs", type=int, default=1, help="parallel repetition workers")
    parser.add_argument("--plot", action="store_true", help="also render figures as PNG")


def build_config(args: argparse.Namespace, **forced) -> ExperimentConfig:
    """Layer defaults < config file < flags < subcommand-forced values."""
    values: dict = {}
    if args.config:
        values.update(read_config_file(args.config))
    for name in _CONFIG_FIELDS:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    values.update(forced)
    return ExperimentConfig(**values)


def _int_tuple(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(","))


def _float_tuple(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(","))


def _str_tuple(text: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in text.split(","))


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="braess-steering",
        description="Q-learning populations on Braess networks with recommendation steering.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a single experiment cell")
    _add_common_options(p_run)

    p_sweep = sub.add_parser("sweep", help="welfare sweep over population and state count")
    _add_common_options(p_sweep)
    p_sweep.add_argument("--agents-grid", type=_int_tuple, default=(100,))
    p_sweep.add_argument("--states-grid", type=_int_tuple, default=DEFAULT_STATES_GRID)
    p_sweep.add_argument(
        "--recommenders", type=_str_tuple, default=("none", "random", "heuristic")
    )

    p_fig2 = sub.add_parser("fig2", help="stateless high-discount welfare trajectory")
    _add_common_options(p_fig2)

    p_two = sub.add_parser("two-route", help="two-route steering study over an epsilon grid")
    _add_common_options(p_two)
    p_two.add_argument("--eps-grid", type=_float_tuple, default=DEFAULT_EPS_GRID)

    p_appf = sub.add_parser("app-f", help="three-state route recommendation study")
    _add_common_options(p_appf)
    p_appf.add_argument("--eps-grid", type=_float_tuple, default=DEFAULT_EPS_GRID)
    p_appf.add_argument("--inits", type=_str_tuple, default=("aligned", "misaligned"))
    p_appf.add_argument(
        "--strategies", type=_str_tuple, default=("none", "random", "route3", "aligned3")
    )

    p_verify = sub.add_parser("verify-theory", help="reachability and coverage checks")
    p_verify.add_argument("--trials", type=int, default=10_000)
    p_verify.add_argument("--max-states", type=int, default=50)
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--out", default="out")
    p_verify.add_argument("--plot", action="store_true")

    return parser


def _write_cell_outputs(out: Path, results: list[CellResult]) -> None:
    """Trajectory CSV per (cell, rep) plus one aggregate; validates row counts."""
    rows = []
    for result in results:
        for episode in result.episodes:
            if len(episode.welfare_raw) != result.config.steps:
                raise RuntimeError(
                    f"cell {result.run_id} rep {episode.rep}: "
                    f"{len(episode.welfare_raw)} rows, expected {result.config.steps}"
                )
            write_trajectory(out / f"{result.run_id}-rep{episode.rep}.csv", result.run_id, episode)
            rows.append(aggregate_row(result.run_id, result.config, episode))
    write_aggregate(out / "aggregate.csv", rows)


def _finish(out: Path, results: list[CellResult], seed: int, started: float) -> None:
    write_manifest(
        out / "manifest.json",
        [dict(r.config.as_dict(), run_id=r.run_id) for r in results],
        seed,
        time.time() - started,
    )


def _render(args, out: Path, results: list[CellResult]) -> None:
    if not args.plot:
        return
    from . import plots

    if args.command in ("run", "fig2"):
        plots.plot_welfare_curves(results, str(out / "welfare.png"))
        if args.command == "run":
            plots.plot_simplex(results[0].episodes[0], str(out / "simplex.png"))
    elif args.command == "sweep":
        plots.plot_sweep_heatmap(results, str(out / "welfare-heatmap.png"))
    else:
        plots.plot_metric_vs_epsilon(
            results, "mean_latency", str(out / "latency.png"), "mean latency (final 10%)"
        )
        plots.plot_metric_vs_epsilon(
            results, "alignment", str(out / "alignment.png"), "alignment (final 10%)"
        )


def _run_command(args: argparse.Namespace) -> int:
    started = time.time()
    out = Path(args.out)

    if args.command == "run":
        cells = [("run", build_config(args))]
    elif args.command == "sweep":
        base = build_config(args)
        cells = sweep_cells(
            base,
            recommenders=args.recommenders,
            agents_grid=args.agents_grid,
            states_grid=args.states_grid,
        )
    elif args.command == "fig2":
        forced = {} if args.epsilon is not None else {"epsilon": 0.05}
        cells = fig2_cells(build_config(args, **forced))
    elif args.command == "two-route":
        forced = {} if args.reps is not None else {"reps": 10}
        cells = two_route_cells(build_config(args, **forced), eps_grid=args.eps_grid)
    elif args.command == "app-f":
        forced = {} if args.reps is not None else {"reps": 10}
        cells = three_state_cells(
            build_config(args, **forced),
            inits=args.inits,
            eps_grid=args.eps_grid,
            recommenders=args.strategies,
        )
    else:
        raise ValueError(f"unknown command {args.command!r}")

    results = run_cells(cells, jobs=args.jobs)
    _write_cell_outputs(out, results)
    _finish(out, results, cells[0][1].seed, started)
    _render(args, out, results)
    print(f"{len(results)} cells, {sum(len(r.episodes) for r in results)} repetitions -> {out}")
    return 0


def _verify_command(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = verify_reachability(
        extension_trials=args.trials,
        coverage_trials=args.trials,
        max_states=args.max_states,
        seed=args.seed,
    )
    coverage = report["coverage"]
    lines = [",".join(("num_states", "coverage"))]
    lines.extend(f"{i + 1},{repr(float(c))}" for i, c in enumerate(coverage.coverage))
    (out / "coverage.csv").write_text("\n".join(lines) + "\n")

    extension_ok = report["extension_passed"] == report["extension_trials"]
    monotone = bool((coverage.coverage[1:] >= coverage.coverage[:-1] - 1e-12).all())
    checks = [
        ("extension-identity", extension_ok,
         f"{report['extension_passed']}/{report['extension_trials']} random extensions"),
        ("coverage-monotone", monotone, f"over {args.max_states} table sizes"),
        ("coverage-limit", coverage.full_support, f"final coverage {coverage.coverage[-1]:.6f}"),
    ]
    failed = 0
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failed += 0 if ok else 1
    if args.plot:
        from . import plots

        plots.plot_coverage(coverage.coverage, str(out / "coverage.png"))
    return 1 if failed else 0


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        if args.command == "verify-theory":
            return _verify_command(args)
        return _run_command(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(json.dumps({"error": str(exc), "command": args.command}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
