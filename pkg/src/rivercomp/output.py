"""Bit-stable output bundles: config echo, norm series, snapshots, report.

Every run directory gets `config.echo.json`, `report.json`, and (for
time-stepping runs) `norms.csv` plus one `snapshot_<t>.csv` per recorded
time.  Numbers are written with the shortest decimal representation that
round-trips exactly, files end with a newline, and nothing here depends
on wall-clock time or iteration order of unordered containers, so
identical configs yield byte-identical bundles.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path
from typing import Any

import numpy as np

from .config import RunConfig
from .grid import Grid
from .stepping import Trajectory

__all__ = [
    "format_float",
    "jsonable",
    "write_norms_csv",
    "write_snapshot_csv",
    "write_bundle",
]


def format_float(x: float) -> str:
    """Shortest decimal form that parses back to exactly the same float."""
    return repr(float(x))


def jsonable(value: Any) -> Any:
    """Recursively convert report values into plain JSON-friendly types."""
    if isinstance(value, (bool, int, str)) or value is None:
        return value
    if isinstance(value, float):
        return value
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: jsonable(getattr(value, f.name)) for f in dataclasses.fields(value)}
    raise TypeError(f"cannot serialize {type(value).__name__} into a report")


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, newline="\n")


def write_norms_csv(path: Path, traj: Trajectory) -> None:
    lines = ["t,norm_u_inf,norm_v_inf,mass_u,mass_v"]
    for k in range(len(traj.times)):
        lines.append(
            ",".join(
                format_float(v)
                for v in (
                    traj.times[k],
                    traj.norm_u_inf[k],
                    traj.norm_v_inf[k],
                    traj.mass_u[k],
                    traj.mass_v[k],
                )
            )
        )
    _write_text(path, "\n".join(lines) + "\n")


def write_snapshot_csv(path: Path, grid: Grid, u: np.ndarray, v: np.ndarray) -> None:
    lines = []
    if grid.dim == 1:
        lines.append("x,u,v")
        x, _ = grid.coordinate_arrays()
        for i in range(grid.size):
            lines.append(f"{format_float(x[i])},{format_float(u[i])},{format_float(v[i])}")
    else:
        lines.append("x,y,u,v")
        x, y = grid.coordinate_arrays()
        for i in range(grid.size):
            lines.append(
                f"{format_float(x[i])},{format_float(y[i])},"
                f"{format_float(u[i])},{format_float(v[i])}"
            )
    _write_text(path, "\n".join(lines) + "\n")


def write_bundle(
    cfg: RunConfig,
    report: dict,
    traj: Trajectory | None = None,
    out_dir: str | Path | None = None,
) -> Path:
    """Write a full run directory; returns its path."""
    run_dir = Path(out_dir if out_dir is not None else cfg.out_dir)
    _write_text(run_dir / "config.echo.json", cfg.echo_json())
    if traj is not None:
        write_norms_csv(run_dir / "norms.csv", traj)
        for t in sorted(traj.snapshots):
            u, v = traj.snapshots[t]
            write_snapshot_csv(run_dir / f"snapshot_{format_float(t)}.csv", traj.grid, u, v)
    _write_text(run_dir / "report.json", json.dumps(jsonable(report), indent=2) + "\n")
    return run_dir
