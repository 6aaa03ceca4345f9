"""File formats: state JSON, snapshot CSVs with JSON sidecars, reports.

Floats are written with ``repr`` (shortest round-trip form) so identical runs
produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .banach import Grid
from .errors import ParseError, ValidationError
from .state import EulerianState, LagrangianState, Tails


def fmt(x) -> str:
    return repr(float(x))


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, float) and not np.isfinite(o):
        return str(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def read_json(path) -> dict:
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise ParseError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def write_state_json(path, state: EulerianState) -> Path:
    return write_json(path, state.to_dict())


def read_state_json(path) -> EulerianState:
    return EulerianState.from_dict(read_json(path))


def _write_rows(path, header, columns) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([fmt(v) for v in row])
    return path


def write_snapshot_csv(path, X: LagrangianState, t: float | None = None) -> list[Path]:
    """``xi,y,U,H`` rows plus a ``.tails.json`` sidecar with grid and tails."""
    path = Path(path)
    _write_rows(path, ["xi", "y", "U", "H"], [X.xi, X.y, X.U, X.H])
    side = path.with_suffix(".tails.json")
    meta = {"grid": X.grid.to_dict(), "tails": X.tails.to_dict()}
    if t is not None:
        meta["t"] = float(t)
    write_json(side, meta)
    return [path, side]


def read_snapshot_csv(path) -> LagrangianState:
    path = Path(path)
    meta = read_json(path.with_suffix(".tails.json"))
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    try:
        grid = Grid(**meta["grid"])
        tails = Tails(**meta["tails"])
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed sidecar: {exc}", field="tails") from exc
    return LagrangianState(grid, data[:, 1], data[:, 2], data[:, 3], tails)


def write_eulerian_csv(path, state: EulerianState, t: float | None = None) -> list[Path]:
    """``x,u`` rows at the knots of ``u`` plus a ``.mu.json`` sidecar."""
    path = Path(path)
    k = state.u_knots
    _write_rows(path, ["x", "u"], [k[:, 0], k[:, 1]] if len(k) else [[], []])
    side = path.with_suffix(".mu.json")
    meta = {
        "mu": state.mu.to_dict(),
        "tail_minus": state.tail_minus,
        "tail_plus": state.tail_plus,
        "energy": state.energy,
    }
    if t is not None:
        meta["t"] = float(t)
    write_json(side, meta)
    return [path, side]


def read_eulerian_csv(path) -> EulerianState:
    path = Path(path)
    meta = read_json(path.with_suffix(".mu.json"))
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return EulerianState.from_dict(
        {
            "u": {"knots": data.tolist(), "tail_minus": meta["tail_minus"], "tail_plus": meta["tail_plus"]},
            "mu": meta["mu"],
        }
    )


def write_certificate_csv(path, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["pair_id", "t", "d0", "dt", "ratio", "fitted_C"])
        for r in rows:
            ratio = "skipped" if r["skipped"] else fmt(r["ratio"])
            w.writerow([r["pair_id"], fmt(r["t"]), fmt(r["d0"]), fmt(r["dt"]), ratio, fmt(r["fitted_C"])])
    return path


def write_table_csv(path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) if isinstance(v, float) else v for v in r])
    return path
