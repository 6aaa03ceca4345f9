"""Discrete E1, E2 and B = E2 x E2 x E1 on a uniform truncated grid.

A function in E2 is stored as node samples plus its two asymptotic
constants; the norm is taken on the decomposition

    f = fbar + a * chi_plus + b * chi_minus,   ||f||^2 = ||fbar||_H1^2 + a^2 + b^2

with fbar vanishing at both grid ends.  E1 is the same with ``b = 0``.
The discrete H1 norm is trapezoid quadrature of ``fbar^2`` plus the
central-difference derivative squared (one-sided at the ends).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
import scipy.sparse as sp

from .errors import GridMismatch, TailMismatch, ValidationError

TOL_TAIL = 1e-9


@dataclass(frozen=True)
class Grid:
    """Uniform grid ``xi_min = xi_0 < ... < xi_{n-1} = xi_max``."""

    xi_min: float
    xi_max: float
    n: int

    def __post_init__(self):
        if not (self.xi_min < -1.0 and self.xi_max > 1.0):
            raise ValidationError(
                f"grid [{self.xi_min}, {self.xi_max}] must strictly contain [-1, 1]",
                field="grid",
            )
        if int(self.n) != self.n or self.n < 3:
            raise ValidationError(f"grid needs n >= 3 nodes, got {self.n}", field="grid.n")
        object.__setattr__(self, "xi_min", float(self.xi_min))
        object.__setattr__(self, "xi_max", float(self.xi_max))
        object.__setattr__(self, "n", int(self.n))

    @property
    def h(self) -> float:
        return (self.xi_max - self.xi_min) / (self.n - 1)

    @property
    def xi(self) -> np.ndarray:
        return _nodes(self)

    def to_dict(self) -> dict:
        return {"xi_min": self.xi_min, "xi_max": self.xi_max, "n": self.n}

    def refined(self) -> "Grid":
        """Same window with every cell halved (``2n - 1`` nodes)."""
        return Grid(self.xi_min, self.xi_max, 2 * self.n - 1)


@lru_cache(maxsize=32)
def _nodes(grid: Grid) -> np.ndarray:
    xi = grid.xi_min + grid.h * np.arange(grid.n)
    xi[-1] = grid.xi_max
    xi.flags.writeable = False
    return xi


def chi_plus(xi):
    """C1 smoothstep: 0 for xi <= -1, 1 for xi >= 1, ``3t^2 - 2t^3`` between."""
    t = np.clip((np.asarray(xi, dtype=float) + 1.0) / 2.0, 0.0, 1.0)
    out = t * t * (3.0 - 2.0 * t)
    return out if out.ndim else float(out)


def chi_minus(xi):
    return 1.0 - chi_plus(xi)


@dataclass(frozen=True)
class TailedFunction:
    """Node samples of a function that is constant outside the grid."""

    samples: np.ndarray
    tail_minus: float
    tail_plus: float

    def __post_init__(self):
        s = np.array(self.samples, dtype=float)
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "tail_minus", float(self.tail_minus))
        object.__setattr__(self, "tail_plus", float(self.tail_plus))

    @classmethod
    def from_samples(cls, samples, e1: bool = False) -> "TailedFunction":
        """Tails read off the end samples (``tail_minus = 0`` for E1)."""
        s = np.asarray(samples, dtype=float)
        return cls(s, 0.0 if e1 else s[0], s[-1])

    def check_tails(self, tol: float = TOL_TAIL) -> None:
        s = self.samples
        if abs(s[0] - self.tail_minus) > tol or abs(s[-1] - self.tail_plus) > tol:
            raise TailMismatch(
                f"end samples ({s[0]!r}, {s[-1]!r}) differ from tails "
                f"({self.tail_minus!r}, {self.tail_plus!r})"
            )

    def __add__(self, other: "TailedFunction") -> "TailedFunction":
        return TailedFunction(
            self.samples + other.samples,
            self.tail_minus + other.tail_minus,
            self.tail_plus + other.tail_plus,
        )

    def __sub__(self, other: "TailedFunction") -> "TailedFunction":
        return self + other.scale(-1.0)

    def scale(self, c: float) -> "TailedFunction":
        return TailedFunction(c * self.samples, c * self.tail_minus, c * self.tail_plus)


@dataclass(frozen=True)
class BanachTriple:
    """Element of B: (zeta, U, H) or a tangent vector with the same layout."""

    zeta: TailedFunction
    u_comp: TailedFunction
    h_comp: TailedFunction

    def __post_init__(self):
        if self.h_comp.tail_minus != 0.0:
            raise TailMismatch("the H component lies in E1 and must vanish at -infinity")
        n = {len(c.samples) for c in self.components}
        if len(n) != 1:
            raise GridMismatch(f"component lengths differ: {sorted(n)}")

    @property
    def components(self) -> tuple[TailedFunction, TailedFunction, TailedFunction]:
        return (self.zeta, self.u_comp, self.h_comp)

    def nodal(self) -> np.ndarray:
        """``(3, n)`` array of samples."""
        return np.stack([c.samples for c in self.components])

    @classmethod
    def from_nodal(cls, arr) -> "BanachTriple":
        arr = np.asarray(arr, dtype=float)
        return cls(
            TailedFunction.from_samples(arr[0]),
            TailedFunction.from_samples(arr[1]),
            TailedFunction.from_samples(arr[2], e1=True),
        )

    def __add__(self, other: "BanachTriple") -> "BanachTriple":
        return BanachTriple(*(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other: "BanachTriple") -> "BanachTriple":
        return BanachTriple(*(a - b for a, b in zip(self.components, other.components)))

    def scale(self, c: float) -> "BanachTriple":
        return BanachTriple(*(a.scale(c) for a in self.components))


def e2_decompose(f: TailedFunction, grid: Grid, tol: float = TOL_TAIL):
    """Return ``(bar, a, b)`` with ``f = bar + a chi_plus + b chi_minus``."""
    f.check_tails(tol)
    a, b = f.tail_plus, f.tail_minus
    xi = grid.xi
    return f.samples - a * chi_plus(xi) - b * chi_minus(xi), a, b


def e1_decompose(f: TailedFunction, grid: Grid, tol: float = TOL_TAIL):
    """Return ``(bar, a)`` with ``f = bar + a chi_plus``."""
    if f.tail_minus != 0.0:
        raise TailMismatch("E1 functions vanish at -infinity")
    f.check_tails(tol)
    a = f.tail_plus
    return f.samples - a * chi_plus(grid.xi), a


def _trapezoid(values: np.ndarray, h: float) -> float:
    return h * (values.sum() - 0.5 * (values[0] + values[-1]))


def h1_inner(a: np.ndarray, b: np.ndarray, grid: Grid) -> float:
    h = grid.h
    da = np.gradient(a, h)
    db = np.gradient(b, h)
    return _trapezoid(a * b, h) + _trapezoid(da * db, h)


def h1_norm_sq(bar: np.ndarray, grid: Grid) -> float:
    bar = np.asarray(bar, dtype=float)
    if bar.shape != (grid.n,):
        raise GridMismatch(f"expected {grid.n} samples, got {bar.shape}")
    return h1_inner(bar, bar, grid)


def _component_inner(f: TailedFunction, g: TailedFunction, grid: Grid, e1: bool) -> float:
    if e1:
        fb, fa = e1_decompose(f, grid)
        gb, ga = e1_decompose(g, grid)
        return h1_inner(fb, gb, grid) + fa * ga
    fb, fa, fm = e2_decompose(f, grid)
    gb, ga, gm = e2_decompose(g, grid)
    return h1_inner(fb, gb, grid) + fa * ga + fm * gm


def b_inner(X: BanachTriple, Y: BanachTriple, grid: Grid) -> float:
    for Z in (X, Y):
        if len(Z.zeta.samples) != grid.n:
            raise GridMismatch(f"triple has {len(Z.zeta.samples)} nodes, grid has {grid.n}")
    return sum(
        _component_inner(f, g, grid, e1=(k == 2))
        for k, (f, g) in enumerate(zip(X.components, Y.components))
    )


def b_norm(X: BanachTriple, grid: Grid) -> float:
    return float(np.sqrt(max(b_inner(X, X, grid), 0.0)))


# --- nodal Gram matrices --------------------------------------------------
#
# With tails equal to the end samples every component norm is a quadratic
# form in the node values alone.  These matrices drive the Galerkin solves.


@dataclass(frozen=True)
class NodalGram:
    grid: Grid
    K: sp.csr_matrix  # H1 Gram matrix: W + D^T W D
    M_e2: sp.csr_matrix
    M_e1: sp.csr_matrix
    D: sp.csr_matrix = field(repr=False)  # np.gradient as a matrix

    def component(self, k: int) -> sp.csr_matrix:
        return self.M_e1 if k == 2 else self.M_e2

    def inner(self, V: np.ndarray, Wv: np.ndarray) -> float:
        """B inner product of two ``(3, n)`` nodal triples."""
        return float(sum(V[k] @ (self.component(k) @ Wv[k]) for k in range(3)))

    def norm(self, V: np.ndarray) -> float:
        return float(np.sqrt(max(self.inner(V, V), 0.0)))


def gradient_matrix(grid: Grid) -> sp.csr_matrix:
    n, h = grid.n, grid.h
    rows = [0, 0, n - 1, n - 1]
    cols = [0, 1, n - 2, n - 1]
    vals = [-1.0 / h, 1.0 / h, -1.0 / h, 1.0 / h]
    i = np.arange(1, n - 1)
    rows += list(i) + list(i)
    cols += list(i - 1) + list(i + 1)
    vals += [-0.5 / h] * (n - 2) + [0.5 / h] * (n - 2)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


@lru_cache(maxsize=16)
def nodal_gram(grid: Grid) -> NodalGram:
    n, h = grid.n, grid.h
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    W = sp.diags(w)
    D = gradient_matrix(grid)
    K = (W + D.T @ W @ D).tocsr()
    cp = chi_plus(grid.xi)
    cm = 1.0 - cp
    e0 = sp.csr_matrix(([1.0], ([0], [0])), shape=(n, n))
    eN = sp.csr_matrix(([1.0], ([n - 1], [n - 1])), shape=(n, n))
    # P maps node values to the decaying part fbar
    col_p = sp.csr_matrix((cp, (np.arange(n), np.full(n, n - 1))), shape=(n, n))
    col_m = sp.csr_matrix((cm, (np.arange(n), np.zeros(n, dtype=int))), shape=(n, n))
    I = sp.identity(n, format="csr")
    P2 = I - col_p - col_m
    P1 = I - col_p
    M_e2 = (P2.T @ K @ P2 + e0 + eN).tocsr()
    M_e1 = (P1.T @ K @ P1 + eN).tocsr()
    return NodalGram(grid, K, M_e2, M_e1, D)
