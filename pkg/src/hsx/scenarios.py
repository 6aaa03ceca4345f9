"""Built-in scenarios with closed-form solutions, and seeded random G0 states."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .banach import Grid
from .state import EulerianState, LagrangianState, RadonMeasure, Relabeling, validate


@dataclass(frozen=True)
class Scenario:
    name: str
    initial: EulerianState
    exact_u: Optional[Callable] = None
    exact_mu: Optional[Callable] = None
    valid_time_range: tuple = (0.0, float("inf"))
    description: str = ""

    @property
    def breaking_time(self) -> float:
        from .evolution import breaking_time

        return breaking_time(self.initial)


def shift_frame(state: EulerianState, t: float) -> EulerianState:
    """Move a solution into the frame ``x' = x + E t^2 / 8``, ``u' = u + E t / 4``.

    ``E`` is the total energy.  The shift maps solutions of
    ``u_t + u u_x = (1/4)(int_{-inf}^x - int_x^inf) u_x^2`` to solutions of
    ``u_t + u u_x = (1/2) int_{-inf}^x u_x^2`` and back (with ``-t``).
    """
    E = state.energy
    dx = E * t * t / 8.0
    du = E * t / 4.0
    k = state.u_knots.copy()
    if len(k):
        k[:, 0] += dx
        k[:, 1] += du
    atoms = state.mu.atoms.copy()
    if len(atoms):
        atoms[:, 0] += dx
    dk = state.mu.density_knots.copy()
    if len(dk):
        dk[:, 0] += dx
    return EulerianState(k, state.tail_minus + du, state.tail_plus + du, RadonMeasure(atoms, dk))


def _breaking_one_sided(t, z):
    """Closed form for ``u0 = -x on [0, 1], -1 beyond`` under the one-sided source."""
    z = np.asarray(z, dtype=float)
    if t == 2.0:
        return np.zeros_like(z)
    end = (2.0 - t) ** 2 / 4.0
    return np.where(z <= 0, 0.0, np.where(z < end, 2.0 * z / (t - 2.0), 0.5 * (t - 2.0)))


def _breaking_u(t, x):
    return _breaking_one_sided(t, np.asarray(x, dtype=float) + t * t / 8.0) - t / 4.0


def _breaking_mu(t):
    left = -t * t / 8.0
    if t == 2.0:
        return RadonMeasure(atoms=[[left, 1.0]])
    return RadonMeasure.from_pieces([left, left + (2.0 - t) ** 2 / 4.0], [(2.0 / (t - 2.0)) ** 2])


def _fan(energy: float):
    """Conservative fan emanating from an atom of mass ``energy`` at the origin."""
    half = energy / 4.0  # |u| at the fan edges divided by t

    def u(t, x):
        x = np.asarray(x, dtype=float)
        if t == 0:
            return np.zeros_like(x)
        return np.clip(2.0 * x / t, -half * t, half * t)

    def mu(t):
        if t == 0:
            return RadonMeasure(atoms=[[0.0, energy]])
        edge = half * t * t / 2.0
        return RadonMeasure.from_pieces([-edge, edge], [(2.0 / t) ** 2])

    return u, mu


def builtin_scenarios() -> list[Scenario]:
    still = Scenario(
        "still",
        EulerianState.constant(0.0),
        exact_u=lambda t, x: np.zeros_like(np.asarray(x, dtype=float)),
        exact_mu=lambda t: RadonMeasure(),
        description="u = 0 with no energy",
    )
    breaking = Scenario(
        "breaking",
        EulerianState.from_u([[0.0, 0.0], [1.0, -1.0]]),
        exact_u=_breaking_u,
        exact_mu=_breaking_mu,
        description="u0 = -x on [0, 1] and -1 beyond; breaks at t = 2",
    )
    fan8_u, fan8_mu = _fan(8.0)
    dirac8 = Scenario(
        "dirac8",
        EulerianState.constant(0.0, atoms=[[0.0, 8.0]]),
        exact_u=fan8_u,
        exact_mu=fan8_mu,
        description="u0 = 0 with energy 8 concentrated at the origin",
    )
    fan1_u, fan1_mu = _fan(1.0)
    twochar = Scenario(
        "twochar",
        EulerianState.constant(0.0, atoms=[[0.0, 1.0]]),
        exact_u=fan1_u,
        exact_mu=fan1_mu,
        description="two characteristics y = -+t^2/8 with unit energy between",
    )
    return [still, breaking, dirac8, twochar]


def get_scenario(name: str) -> Scenario:
    for s in builtin_scenarios():
        if s.name == name:
            return s
    raise KeyError(name)


SCENARIO_NAMES = tuple(s.name for s in builtin_scenarios())

DEFAULT_WINDOW = (-3.0, 12.0)
# deliberately incommensurate with the scenario kinks, for convergence studies
MISALIGNED_WINDOW = (-3.05, 12.2)


def default_grid(n: int = 4096) -> Grid:
    """Grid on about ``[-3, 12]`` with spacing ``1/m`` for an integer ``m``.

    Every integer ``xi`` is then a node, so the kinks of all built-in
    scenarios fall on nodes and L maps them into F0 without interpolation
    error.  For ``n = 4096`` the window is exactly ``[-3, 12]``.
    """
    lo, hi = DEFAULT_WINDOW
    m = max((n - 1) // int(hi - lo), 1)
    return Grid(lo, lo + (n - 1) / m, n)


# --------------------------------------------------------------------------
# random states


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """PCG64 generator for ``seed`` and an optional spawn path."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.PCG64(ss))


def _psi(s):
    return np.where(np.abs(s) < 1.0, (1.0 - s * s) ** 2, 0.0)


def _psi_prime(s):
    return np.where(np.abs(s) < 1.0, -4.0 * s * (1.0 - s * s), 0.0)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(6)


def _cell_integrals(fn, xi: np.ndarray) -> np.ndarray:
    a, b = xi[:-1], xi[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    pts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    return (fn(pts) * _GL_WEIGHTS[None, :]).sum(axis=1) * half


def random_g0_state(
    seed: int,
    grid: Grid,
    roughness: float = 0.5,
    support: tuple = (-1.5, 1.5),
    stream: int = 0,
) -> LagrangianState:
    """Seeded smooth state on the slice ``y + H = id`` with ``y_xi H_xi >= U_xi^2``.

    ``y_xi = 1 - r phi``, ``H_xi = r phi`` and ``U_xi = sigma sqrt(y_xi H_xi)``
    with ``0 <= phi <= 1`` a sum of compact bumps inside ``support`` and
    ``|sigma| <= 1`` oscillatory.  ``r = roughness`` bounds the departure of
    ``(y_xi, U_xi, H_xi)`` from ``(1, 0, 0)``.  Node values accumulate
    6-point Gauss-Legendre cell integrals, so states on nested grids agree at
    shared nodes up to quadrature error.
    """
    if not 0.0 < roughness < 1.0:
        raise ValueError("roughness must lie in (0, 1)")
    lo, hi = support
    if not (grid.xi_min < lo < hi < grid.xi_max):
        raise ValueError("support must lie inside the grid")
    attempt = 0
    while True:
        rng = make_rng(seed, stream, attempt)
        k = int(rng.integers(1, 4))
        centers = rng.uniform(lo + 0.25 * (hi - lo), hi - 0.25 * (hi - lo), k)
        radii = np.array([rng.uniform(0.3, 1.0) * min(c - lo, hi - c) for c in centers])
        weights = rng.uniform(0.3, 1.0, k)
        weights /= weights.sum()
        omega = rng.uniform(1.0, 6.0)
        phase = rng.uniform(0.0, 2.0 * np.pi)

        def phi(x):
            return sum(w * _psi((x - c) / r) for w, c, r in zip(weights, centers, radii))

        def y_xi(x):
            return 1.0 - roughness * phi(x)

        def u_xi(x):
            p = roughness * phi(x)
            return np.sin(omega * x + phase) * np.sqrt(np.clip(p * (1.0 - p), 0.0, None))

        xi = grid.xi
        y = xi[0] + np.concatenate([[0.0], np.cumsum(_cell_integrals(y_xi, xi))])
        U = np.concatenate([[0.0], np.cumsum(_cell_integrals(u_xi, xi))])
        H = xi - y
        H[0] = 0.0
        X = LagrangianState.from_arrays(grid, y, U, H)
        if validate(X).in_G0:
            return X
        attempt += 1


def random_relabeling(seed: int, grid: Grid, support: tuple = (-1.5, 1.5), strength: float = 0.5) -> Relabeling:
    """Smooth ``f = id + eps psi((x - c) / r)`` with ``f'`` between ``1 - strength`` and ``1 + strength``."""
    rng = make_rng(seed, 7)
    lo, hi = support
    c = rng.uniform(lo + 0.4 * (hi - lo), hi - 0.4 * (hi - lo))
    r = 0.9 * min(c - lo, hi - c)
    # max |psi'| = 8 / (3 sqrt(3))
    eps = rng.choice([-1.0, 1.0]) * strength * r / (8.0 / (3.0 * np.sqrt(3.0)))
    x = np.linspace(c - r, c + r, 2001)
    return Relabeling(x, x + eps * _psi((x - c) / r))


def perturbed_u_sequence(seed: int, levels: int = 5, base_scale: float = 0.1) -> list[EulerianState]:
    """States ``u_k = u + 2^-k w`` with ``u`` and ``w`` seeded piecewise-linear bumps."""
    rng = make_rng(seed, 11)
    x = np.linspace(-1.0, 1.0, 9)
    u = np.concatenate([[0.0], base_scale * rng.normal(size=7), [0.0]])
    w = np.concatenate([[0.0], base_scale * rng.normal(size=7), [0.0]])
    out = [EulerianState.from_u(np.column_stack([x, u]))]
    for k in range(levels):
        out.append(EulerianState.from_u(np.column_stack([x, u + 2.0**-k * w])))
    return out
