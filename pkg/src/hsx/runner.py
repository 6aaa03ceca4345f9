"""Experiment drivers behind the CLI."""

from __future__ import annotations

import os
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pydantic
import scipy

from . import __version__
from .config import RunConfig
from .errors import CheckFailed, ConvergenceFailure, ValidationError
from .evolution import evolve
from .io import (
    write_certificate_csv,
    write_eulerian_csv,
    write_json,
    write_snapshot_csv,
    write_table_csv,
)
from .metric import distance_upper, lipschitz_certificate, nodal_norm_sq
from .scenarios import MISALIGNED_WINDOW, builtin_scenarios, get_scenario, random_g0_state
from .state import (
    PLATEAU_FACTOR,
    TOL_COMPAT,
    TOL_ID,
    TOL_MONO,
    TOL_REL,
    eulerian_sup_distance,
    to_eulerian,
    to_lagrangian,
    validate,
)
from .banach import TOL_TAIL, Grid

TOLERANCES = {
    "tol_tail": TOL_TAIL,
    "tol_mono": TOL_MONO,
    "tol_rel": TOL_REL,
    "tol_id": TOL_ID,
    "tol_compat": TOL_COMPAT,
    "plateau_factor": PLATEAU_FACTOR,
}


def thread_count() -> int:
    raw = os.environ.get("HSX_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@contextmanager
def pool_map():
    workers = thread_count()
    if workers == 1:
        yield map
        return
    with ThreadPoolExecutor(max_workers=workers) as ex:
        yield ex.map


def _manifest(cfg: RunConfig, out: Path, files: list, extra: dict | None = None) -> Path:
    grid = cfg.grid.build()
    data = {
        "kind": cfg.kind,
        "config": cfg.model_dump(),
        "grid": grid.to_dict(),
        "seed": cfg.seed,
        "tolerances": TOLERANCES,
        "files": sorted(str(Path(f).relative_to(out)) for f in files),
        "versions": {
            "hsx": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "pydantic": pydantic.__version__,
            "python": platform.python_version(),
        },
    }
    if extra:
        data.update(extra)
    return write_json(out / "manifest.json", data)


def run_simulate(cfg: RunConfig, out: Path) -> dict:
    grid = cfg.grid.build()
    s0 = cfg.initial_state("a")
    X0 = to_lagrangian(s0, grid)

    def one(item):
        k, t = item
        X = evolve(X0, t)
        E = to_eulerian(X, strict=False)
        files = write_snapshot_csv(out / f"snapshot_{k:03d}.csv", X, t)
        files += write_eulerian_csv(out / f"eulerian_{k:03d}.csv", E, t)
        return files

    with pool_map() as m:
        files = [f for block in m(one, list(enumerate(cfg.times))) for f in block]
    index = out / "trajectory.json"
    write_json(
        index,
        {
            "times": cfg.times,
            "h_infinity": X0.tails.H_inf,
            "grid": grid.to_dict(),
            "snapshots": [f"snapshot_{k:03d}.csv" for k in range(len(cfg.times))],
            "eulerian": [f"eulerian_{k:03d}.csv" for k in range(len(cfg.times))],
        },
    )
    return {"files": files + [index]}


def _pair(cfg: RunConfig, grid: Grid):
    a = cfg.initial_state("a")
    b = cfg.initial_state("b")
    if a is None and b is None:
        return (
            random_g0_state(cfg.seed, grid, cfg.roughness, stream=0),
            random_g0_state(cfg.seed, grid, cfg.roughness, stream=1),
        )
    if a is None or b is None:
        raise ValidationError("metric needs two states (scenario/state and scenario_b/state_b)", field="scenario_b")
    return to_lagrangian(a, grid), to_lagrangian(b, grid)


def run_metric(cfg: RunConfig, out: Path) -> dict:
    grid = cfg.grid.build()
    X0, X1 = _pair(cfg, grid)
    t0 = time.perf_counter()
    res = distance_upper(X0, X1, cfg.budget, cfg.q, cfg.sweeps)
    files = []
    for k, C in enumerate(res.path.controls):
        files += write_snapshot_csv(out / f"path_control_{k:03d}.csv", C)
    report = out / "metric_report.json"
    write_json(
        report,
        {
            "d_upper": res.d_upper,
            "b_norm": float(np.sqrt(nodal_norm_sq(X1.nodal() - X0.nodal(), grid))),
            "path_controls": [f"path_control_{k:03d}.csv" for k in range(len(res.path.controls))],
            "quadrature": {"rule": "gauss-legendre", "q": res.path.q},
            "budget_history": res.history,
            "grid": grid.to_dict(),
            "timings": {"distance_seconds": time.perf_counter() - t0},
        },
    )
    return {"files": files + [report], "d_upper": res.d_upper}


def lipschitz_pairs(seed: int, count: int, grid: Grid, roughness: float):
    return [
        (
            random_g0_state(seed, grid, roughness, stream=2 * i),
            random_g0_state(seed, grid, roughness, stream=2 * i + 1),
        )
        for i in range(count)
    ]


def run_lipschitz(cfg: RunConfig, out: Path) -> dict:
    grid = cfg.grid.build()
    pairs = lipschitz_pairs(cfg.seed, cfg.pairs, grid, cfg.roughness)
    times = [t for t in cfg.times if t > 0] or [0.5, 1.0, 2.0]
    with pool_map() as m:
        cert = lipschitz_certificate(pairs, times, cfg.budget, cfg.q, map_fn=m)
    path = write_certificate_csv(out / "certificate.csv", cert.rows)
    return {"files": [path], "fitted_C": cert.fitted_C}


def convergence_table(scenario_name: str, ladder, times, window=None, xs=None):
    """Sup and L1 errors of ``T_t`` against the closed form over a grid ladder.

    The default window puts the kinks of the data strictly inside cells, so
    the errors measure genuine interpolation error rather than roundoff.
    Rows are ``(n, h, t, sup_error, l1_error)``.
    """
    sc = get_scenario(scenario_name)
    if sc.exact_u is None:
        raise CheckFailed(f"scenario {scenario_name!r} has no closed-form solution")
    lo, hi = window or MISALIGNED_WINDOW
    if xs is None:
        xs = np.linspace(-4.0, 4.0, 40001)
    rows = []
    for n in ladder:
        grid = Grid(lo, hi, n)
        X0 = to_lagrangian(sc.initial, grid)
        for t in times:
            E = to_eulerian(evolve(X0, t), strict=False)
            err = np.abs(E.u(xs) - sc.exact_u(t, xs))
            rows.append((n, grid.h, float(t), float(err.max()), float(np.trapezoid(err, xs))))
    return rows


ROUNDOFF_ERROR = 1e-12


def observed_orders(rows, column: int = 3) -> dict:
    """Least-squares slope of ``log(error)`` against ``log(h)`` for each time."""
    by_t = {}
    for row in rows:
        by_t.setdefault(row[2], []).append((row[1], row[column]))
    orders = {}
    for t, seq in by_t.items():
        h = np.array([p[0] for p in seq])
        e = np.array([p[1] for p in seq])
        if e.max() <= ROUNDOFF_ERROR or np.any(e <= 0):
            orders[t] = None
        else:
            orders[t] = float(np.polyfit(np.log(h), np.log(e), 1)[0])
    return orders


def run_converge(cfg: RunConfig, out: Path) -> dict:
    name = cfg.scenario
    if name is None:
        raise CheckFailed("converge needs a built-in scenario with a closed form")
    window = None
    if cfg.grid.xi_min is not None or cfg.grid.xi_max is not None:
        g = cfg.grid.build()
        window = (g.xi_min, g.xi_max)
    rows = convergence_table(name, cfg.ladder, cfg.times, window)
    path = write_table_csv(out / "convergence.csv", ["n", "h", "t", "sup_error", "l1_error"], rows)
    orders = {"sup": observed_orders(rows, 3), "l1": observed_orders(rows, 4)}
    summary = write_json(
        out / "convergence.json",
        {norm: {repr(t): o for t, o in table.items()} for norm, table in orders.items()},
    )
    for t in cfg.times:
        for col in (3, 4):
            errs = [r[col] for r in rows if r[2] == t]
            if max(errs) <= ROUNDOFF_ERROR:
                continue
            if any(b >= a for a, b in zip(errs, errs[1:])):
                raise ConvergenceFailure(f"error does not decrease along the grid ladder at t = {t}: {errs}")
    return {"files": [path, summary], "orders": orders}


def run_validate(cfg: RunConfig, out: Path) -> dict:
    grid = cfg.grid.build()
    if cfg.scenario is not None or cfg.state is not None:
        items = [(cfg.scenario or "inline", cfg.initial_state("a"))]
    else:
        items = [(s.name, s.initial) for s in builtin_scenarios()]
    results = {}
    ok = True
    for name, s in items:
        X = to_lagrangian(s, grid)
        rep = validate(X)
        back = to_eulerian(X, strict=False)
        dist = eulerian_sup_distance(s, back)
        passed = rep.in_F0 and max(dist.values()) <= 1e-10
        ok &= passed
        results[name] = {"report": rep.to_dict(), "round_trip": dist, "passed": passed}
    path = write_json(out / "validate.json", results)
    if not ok:
        raise CheckFailed("some states failed validation: see validate.json")
    return {"files": [path]}


DRIVERS = {
    "simulate": run_simulate,
    "metric": run_metric,
    "lipschitz": run_lipschitz,
    "converge": run_converge,
    "validate": run_validate,
}


def run(cfg: RunConfig, out: str | Path | None = None) -> dict:
    """Dispatch to the driver for ``cfg.kind`` and write the manifest last."""
    out = Path(out or cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        result = DRIVERS[cfg.kind](cfg, out)
    except Exception:
        # keep partial outputs discoverable
        files = [p for p in out.iterdir() if p.name != "manifest.json"]
        _manifest(cfg, out, files, {"status": "failed"})
        raise
    _manifest(cfg, out, result["files"], {"status": "ok"})
    return result
