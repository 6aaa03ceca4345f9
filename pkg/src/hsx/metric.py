"""Relabeling-invariant seminorm, path lengths and distance upper bounds on G0.

For a state ``X`` and a tangent ``V`` the relabeling direction ``g`` solves the
Galerkin problem ``<g X_xi, h X_xi>_B = <V, h X_xi>_B`` over the nodal basis
(interior hats plus the two tail functions).  The Galerkin matrix has a
pentadiagonal interior block bordered by two dense rows and columns (the tail
coefficients), so it is factored by banded Cholesky plus a 2x2 Schur
complement.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.optimize import minimize_scalar
from scipy.sparse.linalg import eigsh

from .banach import BanachTriple, Grid, TailedFunction, chi_plus, nodal_gram
from .errors import GridMismatch, NotInG0, SingularSystem
from .evolution import evolve
from .state import EulerianState, LagrangianState, project_pi, to_lagrangian, validate


@lru_cache(maxsize=16)
def _parts(grid: Grid):
    ng = nodal_gram(grid)
    K = ng.K
    kd = tuple(np.asarray(K.diagonal(k)) for k in range(3))
    cp = np.asarray(chi_plus(grid.xi))
    return K, kd, cp, 1.0 - cp


def _bar(v: np.ndarray, c: int, cp: np.ndarray, cm: np.ndarray) -> np.ndarray:
    out = v - v[-1] * cp
    if c < 2:
        out = out - v[0] * cm
    return out


def nodal_norm_sq(V: np.ndarray, grid: Grid) -> float:
    """B-norm squared of a ``(3, n)`` nodal triple whose tails are its end samples."""
    K, _, cp, cm = _parts(grid)
    total = 0.0
    for c in range(3):
        vb = _bar(V[c], c, cp, cm)
        total += vb @ (K @ vb) + V[c, -1] ** 2 + (V[c, 0] ** 2 if c < 2 else 0.0)
    return float(total)


def state_derivative(X: LagrangianState) -> np.ndarray:
    """``X_xi = (y_xi, U_xi, H_xi)`` at the nodes."""
    return X.node_derivatives()


def _as_nodal(V, grid: Grid) -> np.ndarray:
    if isinstance(V, BanachTriple):
        for f in V.components:
            f.check_tails()
        V = V.nodal()
    V = np.asarray(V, dtype=float)
    if V.shape != (3, grid.n):
        raise GridMismatch(f"tangent has shape {V.shape}, expected (3, {grid.n})")
    return V


class GalerkinSystem:
    """Factored Galerkin matrix ``A_jk = <phi_j X_xi, phi_k X_xi>_B`` for one state."""

    def __init__(self, X: LagrangianState):
        self.grid = X.grid
        self.x = state_derivative(X)
        K, kd, cp, cm = _parts(self.grid)
        x = self.x
        n = self.grid.n
        N = n - 1
        self._K, self._cp, self._cm = K, cp, cm

        # interior pentadiagonal block, upper banded storage
        ab = np.zeros((3, n - 2))
        for k in range(3):
            vals = sum(kd[k][1 : N - k] * x[c, 1 : N - k] * x[c, 1 + k : N] for c in range(3))
            ab[2 - k, k:] = vals
        self._band = ab

        # border columns (coefficients of nodes 0 and N)
        cols = []
        for end in (0, N):
            col = np.zeros(n)
            for c in range(3):
                # decaying part of the end basis function times x_c
                basis = np.zeros(n)
                basis[end] = x[c, end]
                if end == N:
                    basis -= x[c, N] * cp
                elif c < 2:
                    basis -= x[c, 0] * cm
                col += self._bt(K @ basis, c)
                if c < 2 or end == N:
                    col[end] += x[c, end] ** 2
            cols.append(col)
        self._border = np.column_stack(cols)

        try:
            self._chol = sla.cholesky_banded(ab, lower=False)
        except np.linalg.LinAlgError as exc:
            raise SingularSystem("interior Galerkin block is not positive definite") from exc
        A_IB = self._border[1:N]
        self._Z = sla.cho_solve_banded((self._chol, False), A_IB)
        A_BB = self._border[[0, N]]
        S = A_BB - A_IB.T @ self._Z
        S = 0.5 * (S + S.T)
        if not (S[0, 0] > 0 and np.linalg.det(S) > 0):
            raise SingularSystem("Galerkin Schur complement is not positive definite")
        self._S = S

    def _bt(self, z: np.ndarray, c: int) -> np.ndarray:
        """Apply ``B_c^T`` where ``B_c g`` is the decaying part of ``g x_c``."""
        x = self.x[c]
        out = x * z
        out[-1] -= x[-1] * (self._cp @ z)
        if c < 2:
            out[0] -= x[0] * (self._cm @ z)
        return out

    def rhs(self, V: np.ndarray) -> np.ndarray:
        b = np.zeros(self.grid.n)
        for c in range(3):
            vb = _bar(V[c], c, self._cp, self._cm)
            b += self._bt(self._K @ vb, c)
            b[-1] += self.x[c, -1] * V[c, -1]
            if c < 2:
                b[0] += self.x[c, 0] * V[c, 0]
        return b

    def solve(self, b: np.ndarray) -> np.ndarray:
        N = self.grid.n - 1
        bI = b[1:N]
        wI = sla.cho_solve_banded((self._chol, False), bI)
        bB = b[[0, N]] - self._border[1:N].T @ wI
        gB = np.linalg.solve(self._S, bB)
        g = np.empty_like(b)
        g[[0, N]] = gB
        g[1:N] = wI - self._Z @ gB
        return g

    def matrix(self) -> sp.csr_matrix:
        """Assembled sparse matrix (for diagnostics and tests)."""
        n = self.grid.n
        N = n - 1
        ab = self._band
        inner = sp.diags(
            [ab[2], ab[1, 1:], ab[1, 1:], ab[0, 2:], ab[0, 2:]],
            [0, 1, -1, 2, -2],
            shape=(n - 2, n - 2),
        )
        A = sp.lil_matrix((n, n))
        A[1:N, 1:N] = inner
        A[:, 0] = self._border[:, [0]]
        A[:, N] = self._border[:, [1]]
        A[0, :] = self._border[:, 0]
        A[N, :] = self._border[:, 1]
        return A.tocsr()


def solve_g(X: LagrangianState, V) -> tuple[TailedFunction, float]:
    """Best relabeling direction ``g`` and the residual ``||V - g X_xi||_B``."""
    Vn = _as_nodal(V, X.grid)
    system = GalerkinSystem(X)
    g = system.solve(system.rhs(Vn))
    R = Vn - g * system.x
    res = np.sqrt(max(nodal_norm_sq(R, X.grid), 0.0))
    return TailedFunction(g, g[0], g[-1]), float(res)


def seminorm(X: LagrangianState, V) -> float:
    """``|||V|||_X = ||V - g(X, V) X_xi||_B``."""
    return solve_g(X, V)[1]


# --------------------------------------------------------------------------
# paths


@dataclass
class CurvePath:
    """Piecewise-linear path through G0 controls; ``q`` Gauss points per segment."""

    controls: list
    q: int = 3

    def __post_init__(self):
        if len(self.controls) < 2:
            raise ValueError("a path needs at least two controls")
        grid = self.controls[0].grid
        if any(C.grid != grid for C in self.controls):
            raise GridMismatch("path controls live on different grids")
        if self.q < 1:
            raise ValueError("q must be positive")

    @property
    def grid(self) -> Grid:
        return self.controls[0].grid

    @classmethod
    def straight(cls, X0: LagrangianState, X1: LagrangianState, interior: int = 0, q: int = 3):
        s = np.linspace(0.0, 1.0, interior + 2)
        return cls([X0.lerp(X1, si) for si in s[:-1]] + [X1], q)

    def reversed(self) -> "CurvePath":
        return CurvePath(self.controls[::-1], self.q)

    def check_g0(self) -> None:
        for k, C in enumerate(self.controls):
            if not validate(C).in_G0:
                raise NotInG0(f"path control {k} is not in G0")


@lru_cache(maxsize=8)
def _gauss(q: int):
    s, w = np.polynomial.legendre.leggauss(q)
    return 0.5 * (s + 1.0), 0.5 * w


def segment_length(A: LagrangianState, B: LagrangianState, q: int = 3) -> float:
    V = B.nodal() - A.nodal()
    if not np.any(V):
        return 0.0
    nodes, weights = _gauss(q)
    return float(sum(w * seminorm(A.lerp(B, s), V) for s, w in zip(nodes, weights)))


def path_length(path: CurvePath, check: bool = True) -> float:
    """Gauss-Legendre quadrature of ``|||X_s|||_{X(s)}`` summed over segments."""
    if check:
        path.check_g0()
    c = path.controls
    return float(sum(segment_length(c[k], c[k + 1], path.q) for k in range(len(c) - 1)))


def project_g0(grid: Grid, y: np.ndarray, U: np.ndarray) -> LagrangianState:
    """Nearest-by-clamping G0 state: cell slopes ``0 <= y_xi <= 1``, ``U_xi^2 <= y_xi (1 - y_xi)``."""
    h = grid.h
    a = np.clip(np.diff(y) / h, 0.0, 1.0)
    bound = np.sqrt(a * (1.0 - a))
    b = np.clip(np.diff(U) / h, -bound, bound)
    xi = grid.xi
    y_new = xi[0] + np.concatenate([[0.0], np.cumsum(a * h)])
    U_new = U[0] + np.concatenate([[0.0], np.cumsum(b * h)])
    H = xi - y_new
    H[0] = 0.0
    return LagrangianState.from_arrays(grid, y_new, U_new, H)


def _shift(C: LagrangianState, direction: np.ndarray, s: float) -> LagrangianState:
    arr = C.nodal() + s * direction
    return project_g0(C.grid, arr[0] + C.grid.xi, arr[1])


def _optimize(path: CurvePath, sweeps: int) -> float:
    """Coordinate descent over interior controls; mutates ``path`` in place."""
    c = path.controls
    q = path.q
    seg = [segment_length(c[k], c[k + 1], q) for k in range(len(c) - 1)]
    for _ in range(sweeps):
        improved = False
        for k in range(1, len(c) - 1):
            chord = c[k + 1].nodal() - c[k - 1].nodal()
            scale = np.sqrt(nodal_norm_sq(chord, path.grid))
            if scale == 0:
                continue
            try:
                system = GalerkinSystem(c[k])
            except SingularSystem:
                continue
            g = system.solve(system.rhs(chord))
            relab = g * system.x
            relab[2] = -relab[0]  # stay on the slice y + H = id
            mid = 0.5 * (c[k - 1].nodal() + c[k + 1].nodal()) - c[k].nodal()
            for d in (mid, relab):
                dn = np.sqrt(nodal_norm_sq(d, path.grid))
                if dn == 0:
                    continue
                d = d * (0.5 * scale / dn)
                base = seg[k - 1] + seg[k]

                def local(s, d=d, k=k):
                    C = _shift(c[k], d, s)
                    return segment_length(c[k - 1], C, q) + segment_length(C, c[k + 1], q)

                res = minimize_scalar(local, bounds=(-1.0, 1.0), method="bounded",
                                      options={"xatol": 1e-3, "maxiter": 20})
                if res.fun < base * (1.0 - 1e-9):
                    C = _shift(c[k], d, res.x)
                    c[k] = C
                    seg[k - 1] = segment_length(c[k - 1], C, q)
                    seg[k] = segment_length(C, c[k + 1], q)
                    improved = True
        if not improved:
            break
    return float(sum(seg))


@dataclass
class DistanceResult:
    d_upper: float
    path: CurvePath
    history: list = field(default_factory=list)
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return {
            "d_upper": self.d_upper,
            "controls": len(self.path.controls),
            "quadrature": self.path.q,
            "history": self.history,
            "seconds": self.seconds,
        }


def _budget_ladder(budget: int) -> list[int]:
    ladder = [0]
    k = 1
    while k < budget:
        ladder.append(k)
        k *= 2
    if budget > 0:
        ladder.append(budget)
    return ladder


def distance_upper(
    X0: LagrangianState,
    X1: LagrangianState,
    budget: int = 0,
    q: int = 3,
    sweeps: int = 2,
) -> DistanceResult:
    """Upper bound for ``d(X0, X1)`` with its witnessing path.

    Starts from the straight segment (admissible because G0 is convex), then
    for each interior-control count on the ladder ``0, 1, 2, 4, ..., budget``
    optimizes the controls by coordinate descent.  The best length found is
    returned, so the bound never increases with the budget.
    """
    start = time.perf_counter()
    if X0.grid != X1.grid:
        raise GridMismatch("states live on different grids")
    for name, X in (("X0", X0), ("X1", X1)):
        if not validate(X).in_G0:
            raise NotInG0(f"{name} is not in G0")
    best = None
    history = []
    for m in _budget_ladder(int(budget)):
        path = CurvePath.straight(X0, X1, interior=m, q=q)
        if np.array_equal(X0.nodal(), X1.nodal()):
            length = 0.0
        elif m == 0:
            length = path_length(path, check=False)
        else:
            length = _optimize(path, sweeps)
        history.append({"interior": m, "length": length})
        if best is None or length < best[0]:
            best = (length, path)
    return DistanceResult(best[0], best[1], history, time.perf_counter() - start)


def distance_eulerian(s0: EulerianState, s1: EulerianState, grid: Grid, budget: int = 0, q: int = 3) -> float:
    """``d_D(s0, s1) = d(L s0, L s1)`` as an upper bound."""
    return distance_upper(to_lagrangian(s0, grid), to_lagrangian(s1, grid), budget, q).d_upper


@dataclass
class LipschitzCertificate:
    rows: list
    fitted_C: float

    def to_dict(self) -> dict:
        return {"rows": self.rows, "fitted_C": self.fitted_C}


def lipschitz_certificate(pairs, times, budget: int = 0, q: int = 3, map_fn=map) -> LipschitzCertificate:
    """Ratios ``d(Pi S_t X0, Pi S_t X1) / d(X0, X1)`` and the smallest ``C``
    with ``ratio <= exp(C t)`` for every pair and time.

    ``map_fn`` lets callers fan the pairs out to a thread pool.
    """
    times = [float(t) for t in times]

    def one(item):
        pid, (X0, X1) = item
        if np.array_equal(X0.nodal(), X1.nodal()):
            return [dict(pair_id=pid, t=t, d0=0.0, dt=0.0, ratio=None, skipped=True) for t in times]
        d0 = distance_upper(X0, X1, budget, q).d_upper
        out = []
        for t in times:
            if t == 0.0:
                dt = d0
            else:
                A = project_pi(evolve(X0, t))
                B = project_pi(evolve(X1, t))
                dt = distance_upper(A, B, budget, q).d_upper
            out.append(dict(pair_id=pid, t=t, d0=d0, dt=dt, ratio=dt / d0, skipped=False))
        return out

    rows = [r for block in map_fn(one, list(enumerate(pairs))) for r in block]
    rates = [np.log(r["ratio"]) / r["t"] for r in rows if not r["skipped"] and r["t"] > 0 and r["ratio"] > 0]
    fitted = max([0.0] + rates)
    for r in rows:
        r["fitted_C"] = fitted
    return LipschitzCertificate(rows, float(fitted))


def coercivity_diagnostic(X: LagrangianState) -> dict:
    """Smallest generalized eigenvalue of ``A g = lambda M g`` with ``M`` the E2 Gram matrix."""
    system = GalerkinSystem(X)
    A = system.matrix()
    M = nodal_gram(X.grid).M_e2
    n = X.grid.n
    if n <= 800:
        lam = sla.eigh(A.toarray(), M.toarray(), eigvals_only=True, subset_by_index=[0, 0])[0]
    else:
        lam = eigsh(A.tocsc(), k=1, M=M.tocsc(), sigma=0.0, which="LM", return_eigenvectors=False)[0]
    a, _, c = X.cell_derivatives()
    xd = X.node_derivatives()
    xd[0] -= 1.0
    b2_proxy = np.sqrt(nodal_norm_sq(X.nodal(), X.grid) + nodal_norm_sq(xd, X.grid))
    return {
        "lambda_min": float(lam),
        "bound_inputs": {
            "b2_norm_proxy": float(b2_proxy),
            "inv_energy_sup": float(np.max(1.0 / (a + c))),
        },
    }
