"""Exact-in-time Lagrangian evolution, the Eulerian semigroup and weak residuals.

In Lagrangian variables the Hunter-Saxton equation becomes the linear system
``y_t = U, U_t = H/2 - H_inf/4, H_t = 0`` whose solution is a quadratic
polynomial in ``t``; nothing here steps in time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .banach import Grid
from .errors import NotInF, SupportEscapesGrid, ValidationError
from .state import (
    EulerianState,
    LagrangianState,
    Tails,
    to_eulerian,
    to_lagrangian,
    validate,
)


def evolve(X0: LagrangianState, t: float, check: bool = True) -> LagrangianState:
    """Solution operator ``S_t`` applied nodewise and to the tail constants.

    ``check`` rejects states outside the relaxed class G.  Every state in G
    (in particular every point on a G0 path) has a well defined evolution.
    """
    t = float(t)
    if t < 0:
        raise ValidationError("evolution time must be nonnegative", field="t")
    if check and not validate(X0).in_G:
        raise NotInF("initial state violates the monotonicity or energy relation")
    hinf = X0.tails.H_inf
    H = X0.H.copy()
    acc = 0.5 * H - 0.25 * hinf
    U = X0.U + acc * t
    y = X0.y + X0.U * t + 0.5 * acc * t * t
    tl = X0.tails
    tails = Tails(
        zeta_minus=tl.zeta_minus + tl.U_minus * t - 0.125 * hinf * t * t,
        zeta_plus=tl.zeta_plus + tl.U_plus * t + 0.125 * hinf * t * t,
        U_minus=tl.U_minus - 0.25 * hinf * t,
        U_plus=tl.U_plus + 0.25 * hinf * t,
        H_inf=hinf,
    )
    return LagrangianState(X0.grid, y, U, H, tails)


def evolve_eulerian(s: EulerianState, t: float, grid: Grid, strict: bool = True) -> EulerianState:
    """``T_t = M S_t L``, always recomputed from time zero.

    ``strict=False`` tolerates cells where a kink of the data falls strictly
    inside a grid cell (the sampled state is then only in G there).
    """
    return to_eulerian(evolve(to_lagrangian(s, grid), t), strict=strict)


def breaking_time(s: EulerianState) -> float:
    """``2 / sup(-u_x)``, or ``inf`` when ``u`` is nondecreasing."""
    slopes = s.slopes
    steepest = -slopes.min() if len(slopes) else 0.0
    return 2.0 / steepest if steepest > 0 else float("inf")


def invariant_defect(X: LagrangianState, X0: LagrangianState, t: float) -> dict:
    """Energy-relation defect of ``X`` and its margin in the Gronwall lower bound.

    ``rel_defect`` is the largest cellwise ``|y_xi H_xi - U_xi^2|`` and
    ``rel_drift`` its largest change from ``X0``; ``gronwall_margin`` is
    ``min[(y_xi + H_xi)(t) - exp(-t/2) (y_xi + H_xi)(0)]``.
    """
    a, b, c = X.cell_derivatives()
    a0, b0, c0 = X0.cell_derivatives()
    rel = a * c - b * b
    rel0 = a0 * c0 - b0 * b0
    margin = (a + c) - np.exp(-0.5 * t) * (a0 + c0)
    return {
        "rel_defect": float(np.abs(rel).max()),
        "rel_drift": float(np.abs(rel - rel0).max()),
        "gronwall_margin": float(margin.min()),
    }


@dataclass(frozen=True)
class Trajectory:
    times: tuple
    states: tuple
    h_infinity: float

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        if len(times) != len(self.states):
            raise ValidationError("one state per time is required", field="times")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValidationError("times must be strictly increasing", field="times")
        for X in self.states:
            if X.tails.H_inf != self.h_infinity:
                raise ValidationError("H_inf differs along the trajectory", field="states")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", tuple(self.states))

    @classmethod
    def compute(cls, X0: LagrangianState, times) -> "Trajectory":
        states = [evolve(X0, t) for t in times]
        return cls(tuple(times), tuple(states), X0.tails.H_inf)

    @property
    def grid(self) -> Grid:
        return self.states[0].grid


def _bump(s):
    a = np.abs(s)
    return np.where(a < 1.0, 1.0 - 3.0 * a * a + 2.0 * a**3, 0.0)


def _bump_prime(s):
    a = np.abs(s)
    return np.where(a < 1.0, 6.0 * s * (a - 1.0), 0.0)


@dataclass(frozen=True)
class TestFunction:
    """Tensor product of C1 cubic bumps ``1 - 3s^2 + 2|s|^3`` in ``t`` and ``x``."""

    __test__ = False  # not a pytest class

    t0: float
    x0: float
    rt: float
    rx: float

    def __post_init__(self):
        if self.rt <= 0 or self.rx <= 0:
            raise ValidationError("bump radii must be positive", field="radii")

    def __call__(self, t, x):
        return _bump((t - self.t0) / self.rt) * _bump((x - self.x0) / self.rx)

    def dt(self, t, x):
        return _bump_prime((t - self.t0) / self.rt) / self.rt * _bump((x - self.x0) / self.rx)

    def dx(self, t, x):
        return _bump((t - self.t0) / self.rt) * _bump_prime((x - self.x0) / self.rx) / self.rx


def _slice_integrals(X: LagrangianState, t: float, phi: TestFunction) -> float:
    """``int (u phi_t - (u u_x - V) phi) dx`` at one time, by cell midpoints in xi."""
    dy = np.diff(X.y)
    dU = np.diff(X.U)
    ym = 0.5 * (X.y[1:] + X.y[:-1])
    Um = 0.5 * (X.U[1:] + X.U[:-1])
    Vm = 0.5 * (0.5 * (X.H[1:] + X.H[:-1])) - 0.25 * X.tails.H_inf
    p = phi(t, ym)
    pt = phi.dt(t, ym)
    return float(np.sum(Um * pt * dy - Um * dU * p + Vm * p * dy))


def weak_residual(traj: Trajectory, phi: TestFunction) -> float:
    """Defect of the weak formulation for one test function.

    Returns ``iint (u phi_t - (u u_x - V) phi) dx dt + int u0 phi(0, x) dx``,
    which vanishes for a weak solution.  Space integrals are taken in
    Lagrangian variables (``dx = y_xi dxi``, ``V(t, y) = H/2 - H_inf/4``),
    time integrals by the trapezoid rule over ``traj.times``.
    """
    times = np.asarray(traj.times)
    t_lo = max(phi.t0 - phi.rt, 0.0)
    t_hi = phi.t0 + phi.rt
    if times[0] > t_lo or times[-1] < t_hi:
        raise SupportEscapesGrid(
            f"trajectory covers [{times[0]}, {times[-1]}], test function needs [{t_lo}, {t_hi}]"
        )
    vals = np.zeros(len(times))
    for k, (t, X) in enumerate(zip(times, traj.states)):
        if abs(t - phi.t0) >= phi.rt:
            continue
        if X.y[0] > phi.x0 - phi.rx or X.y[-1] < phi.x0 + phi.rx:
            raise SupportEscapesGrid(
                f"test function support leaves [{X.y[0]}, {X.y[-1]}] at t = {t}"
            )
        vals[k] = _slice_integrals(X, t, phi)
    total = float(np.sum(0.5 * (vals[1:] + vals[:-1]) * np.diff(times)))
    if t_lo == 0.0 and phi.t0 - phi.rt < 0.0:
        if times[0] != 0.0:
            raise SupportEscapesGrid("test function is nonzero at t = 0 but the trajectory starts later")
        X0 = traj.states[0]
        ym = 0.5 * (X0.y[1:] + X0.y[:-1])
        Um = 0.5 * (X0.U[1:] + X0.U[:-1])
        total += float(np.sum(Um * phi(0.0, ym) * np.diff(X0.y)))
    return total
