"""Delimited output and run manifests.

Trajectory CSVs carry one row per step with a fixed column order;
fields that are meaningless for a given run (cross counts on the
two-route network, alignment when states and actions differ) are left
empty rather than zeroed. Floats are written with repr, so identical
runs produce identical bytes.
"""

from __future__ import annotations

import json
import time
from pathlib import Path

from . import __version__
from .runner import EpisodeResult, ExperimentConfig

TRAJECTORY_COLUMNS = (
    "run_id",
    "rep",
    "step",
    "epsilon",
    "welfare_raw",
    "welfare_rescaled",
    "n_up",
    "n_down",
    "n_cross",
    "alignment",
    "kl",
)

AGGREGATE_COLUMNS = (
    "run_id",
    "rep",
    "network",
    "agents",
    "states",
    "recommender",
    "epsilon",
    "welfare_rescaled_mean",
    "welfare_rescaled_last_tenth",
    "latency_mean",
    "latency_last_tenth",
    "alignment_mean",
    "kl_mean",
)


def _fmt(value: float) -> str:
    return repr(float(value))


def trajectory_rows(run_id: str, result: EpisodeResult) -> list[str]:
    """CSV lines (no header) for every step of one repetition."""
    has_cross = result.counts.shape[1] > 2
    rescaled = result.welfare_rescaled
    lines = []
    for t in range(len(result.welfare_raw)):
        cells = [
            run_id,
            str(result.rep),
            str(t),
            _fmt(result.epsilon[t]),
            _fmt(result.welfare_raw[t]),
            _fmt(rescaled[t]),
            str(result.counts[t, 0]),
            str(result.counts[t, 1]),
            str(result.counts[t, 2]) if has_cross else "",
            _fmt(result.alignment[t]) if result.alignment is not None else "",
            _fmt(result.kl[t]),
        ]
        lines.append(",".join(cells))
    return lines


def write_trajectory(path: Path, run_id: str, result: EpisodeResult) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(TRAJECTORY_COLUMNS)]
    lines.extend(trajectory_rows(run_id, result))
    path.write_text("\n".join(lines) + "\n")


def last_tenth_mean(series) -> float:
    n = len(series)
    return float(series[n - max(1, n // 10) :].mean())


def aggregate_row(run_id: str, config: ExperimentConfig, result: EpisodeResult) -> str:
    rescaled = result.welfare_rescaled
    latency = result.mean_latency
    cells = [
        run_id,
        str(result.rep),
        config.network,
        str(config.agents),
        str(config.states),
        config.recommender,
        _fmt(config.epsilon),
        _fmt(rescaled.mean()),
        _fmt(last_tenth_mean(rescaled)),
        _fmt(latency.mean()),
        _fmt(last_tenth_mean(latency)),
        _fmt(result.alignment.mean()) if result.alignment is not None else "",
        _fmt(result.kl.mean()),
    ]
    return ",".join(cells)


def write_aggregate(path: Path, rows: list[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(AGGREGATE_COLUMNS)]
    lines.extend(rows)
    path.write_text("\n".join(lines) + "\n")


def write_manifest(path: Path, config_dicts: list[dict], seed: int, wall_time: float) -> None:
    """Reproducibility record for one CLI invocation."""
    path.parent.mkdir(parents=True, exist_ok=True)
    manifest = {
        "config": config_dicts if len(config_dicts) != 1 else config_dicts[0],
        "resolved_seed": seed,
        "version": f"braess-steering {__version__}",
        "wall_time_seconds": round(wall_time, 3),
        "created_unix": int(time.time()),
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
