"""Eulerian states (u, mu), Lagrangian states X = (y, U, H) and the maps between them.

Eulerian velocities are piecewise linear with constant tails and the energy
measure is a finite list of atoms plus a piecewise-linear density.  For such
states ``mu_ac = u_x^2 dx`` can be checked exactly segment by segment.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .banach import BanachTriple, Grid, TailedFunction, TOL_TAIL
from .errors import (
    DomainTooNarrow,
    GridMismatch,
    NotInD,
    NotInF,
    NotInvertible,
    NotMonotone,
    TailMismatch,
    ValidationError,
)

TOL_MONO = 1e-12
TOL_REL = 1e-8
TOL_ID = 1e-9
TOL_COMPAT = 1e-9
PLATEAU_FACTOR = 1e-10


def _frozen(a, shape_cols=None) -> np.ndarray:
    arr = np.array(a, dtype=float)
    if shape_cols is not None:
        arr = arr.reshape(-1, shape_cols)
    arr.flags.writeable = False
    return arr


# --------------------------------------------------------------------------
# measures


@dataclass(frozen=True)
class RadonMeasure:
    """Atoms ``(x, m)`` plus a piecewise-linear density given by knots ``(x, d)``.

    Density knots may repeat an abscissa to encode a jump; the density is
    zero at and outside the first and last knot.
    """

    atoms: np.ndarray = ()
    density_knots: np.ndarray = ()

    def __post_init__(self):
        atoms = _frozen(self.atoms, 2)
        knots = _frozen(self.density_knots, 2)
        if len(atoms):
            if np.any(np.diff(atoms[:, 0]) <= 0):
                raise ValidationError("atom positions must be strictly increasing", field="mu.atoms")
            if np.any(atoms[:, 1] <= 0) or not np.all(np.isfinite(atoms)):
                raise ValidationError("atom masses must be positive and finite", field="mu.atoms")
        if len(knots):
            if np.any(np.diff(knots[:, 0]) < 0):
                raise ValidationError("density knots must be sorted", field="mu.density_knots")
            if np.any(knots[:, 1] < 0) or not np.all(np.isfinite(knots)):
                raise ValidationError("density must be nonnegative and finite", field="mu.density_knots")
            if knots[0, 1] != 0.0 or knots[-1, 1] != 0.0:
                raise ValidationError(
                    "density must vanish at the first and last knot", field="mu.density_knots"
                )
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "density_knots", knots)

    @classmethod
    def zero(cls) -> "RadonMeasure":
        return cls()

    @classmethod
    def from_pieces(cls, breaks, values, atoms=()) -> "RadonMeasure":
        """Piecewise-constant density ``values[i]`` on ``[breaks[i], breaks[i+1]]``."""
        breaks = np.asarray(breaks, dtype=float)
        values = np.asarray(values, dtype=float)
        knots = []
        for a, b, d in zip(breaks[:-1], breaks[1:], values):
            if d > 0 and b > a:
                knots += [(a, 0.0), (a, d), (b, d), (b, 0.0)]
        return cls(atoms=atoms, density_knots=knots)

    # cumulative functions

    @property
    def _cum_knots(self) -> np.ndarray:
        k = self.density_knots
        if not len(k):
            return np.zeros(0)
        seg = 0.5 * (k[1:, 1] + k[:-1, 1]) * np.diff(k[:, 0])
        return np.concatenate([[0.0], np.cumsum(seg)])

    @property
    def ac_mass(self) -> float:
        c = self._cum_knots
        return float(c[-1]) if len(c) else 0.0

    @property
    def atom_mass(self) -> float:
        return float(self.atoms[:, 1].sum()) if len(self.atoms) else 0.0

    @property
    def total_mass(self) -> float:
        return self.ac_mass + self.atom_mass

    def ac_cdf(self, x):
        """``int_{-inf}^x density``."""
        x = np.asarray(x, dtype=float)
        k = self.density_knots
        if not len(k):
            return np.zeros_like(x)
        kx, kd = k[:, 0], k[:, 1]
        cum = self._cum_knots
        j = np.searchsorted(kx, x, side="right") - 1
        inside = (j >= 0) & (j < len(kx) - 1)
        jc = np.clip(j, 0, len(kx) - 2)
        s = x - kx[jc]
        width = kx[jc + 1] - kx[jc]
        safe = np.where(width > 0, width, 1.0)
        part = kd[jc] * s + (kd[jc + 1] - kd[jc]) * s * s / (2.0 * safe)
        out = np.where(inside, cum[jc] + part, 0.0)
        return np.where(j >= len(kx) - 1, cum[-1], out)

    def atoms_below(self, x, closed: bool = False):
        x = np.asarray(x, dtype=float)
        if not len(self.atoms):
            return np.zeros_like(x)
        cm = np.concatenate([[0.0], np.cumsum(self.atoms[:, 1])])
        idx = np.searchsorted(self.atoms[:, 0], x, side="right" if closed else "left")
        return cm[idx]

    def cdf_open(self, x):
        """``mu((-inf, x))``."""
        return self.ac_cdf(x) + self.atoms_below(x)

    def cdf(self, x):
        """``mu((-inf, x])``."""
        return self.ac_cdf(x) + self.atoms_below(x, closed=True)

    def density_limits(self, x: float) -> tuple[float, float]:
        """Left and right limits of the density at ``x``."""
        k = self.density_knots
        if not len(k):
            return 0.0, 0.0
        kx, kd = k[:, 0], k[:, 1]

        def interp(j, x):
            if kx[j + 1] == kx[j]:
                return kd[j + 1]
            return kd[j] + (kd[j + 1] - kd[j]) * (x - kx[j]) / (kx[j + 1] - kx[j])

        i = int(np.searchsorted(kx, x, side="left"))
        if i == 0 or i == len(kx):
            left = 0.0
        elif kx[i] == x:
            left = float(kd[i])
        else:
            left = float(interp(i - 1, x))
        i = int(np.searchsorted(kx, x, side="right"))
        if i == 0 or i == len(kx):
            right = 0.0
        elif kx[i - 1] == x:
            right = float(kd[i - 1])
        else:
            right = float(interp(i - 1, x))
        return left, right

    def breakpoints(self) -> np.ndarray:
        xs = []
        if len(self.atoms):
            xs.append(self.atoms[:, 0])
        if len(self.density_knots):
            xs.append(self.density_knots[:, 0])
        return np.unique(np.concatenate(xs)) if xs else np.zeros(0)

    def to_dict(self) -> dict:
        return {
            "atoms": self.atoms.tolist(),
            "density_knots": self.density_knots.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RadonMeasure":
        return cls(atoms=d.get("atoms", []), density_knots=d.get("density_knots", []))


def cumulative_plus_id(mu: RadonMeasure, x):
    """``G(x) = mu((-inf, x)) + x``; an atom at ``x`` itself is excluded."""
    return mu.cdf_open(x) + np.asarray(x, dtype=float)


# --------------------------------------------------------------------------
# Eulerian states


@dataclass(frozen=True)
class EulerianState:
    """Piecewise-linear ``u`` (knots plus constant tails) and energy measure ``mu``."""

    u_knots: np.ndarray
    tail_minus: float
    tail_plus: float
    mu: RadonMeasure

    def __post_init__(self):
        knots = _frozen(self.u_knots, 2)
        object.__setattr__(self, "u_knots", knots)
        object.__setattr__(self, "tail_minus", float(self.tail_minus))
        object.__setattr__(self, "tail_plus", float(self.tail_plus))
        if len(knots):
            if np.any(np.diff(knots[:, 0]) <= 0):
                raise ValidationError("u knots must be strictly increasing", field="u.knots")
            scale = 1.0 + np.abs(knots[:, 1]).max()
            if (
                abs(knots[0, 1] - self.tail_minus) > TOL_TAIL * scale
                or abs(knots[-1, 1] - self.tail_plus) > TOL_TAIL * scale
            ):
                raise ValidationError("u tails must equal the end knot values", field="u")
        elif self.tail_minus != self.tail_plus:
            raise ValidationError("a knot-free u must be constant", field="u")

    @classmethod
    def from_u(cls, knots, atoms=()) -> "EulerianState":
        """Build ``(u, u_x^2 dx + atoms)`` from the knots of ``u``."""
        knots = np.asarray(knots, dtype=float).reshape(-1, 2)
        if len(knots) == 0:
            raise ValidationError("use EulerianState.constant for knot-free u", field="u.knots")
        slopes = np.diff(knots[:, 1]) / np.diff(knots[:, 0])
        mu = RadonMeasure.from_pieces(knots[:, 0], slopes**2, atoms=atoms)
        return cls(knots, knots[0, 1], knots[-1, 1], mu)

    @classmethod
    def constant(cls, value: float = 0.0, atoms=()) -> "EulerianState":
        return cls(np.zeros((0, 2)), value, value, RadonMeasure(atoms=atoms))

    def u(self, x):
        x = np.asarray(x, dtype=float)
        k = self.u_knots
        if not len(k):
            return np.full_like(x, self.tail_minus)
        return np.interp(x, k[:, 0], k[:, 1], left=self.tail_minus, right=self.tail_plus)

    @property
    def slopes(self) -> np.ndarray:
        k = self.u_knots
        if len(k) < 2:
            return np.zeros(0)
        return np.diff(k[:, 1]) / np.diff(k[:, 0])

    @property
    def energy(self) -> float:
        return self.mu.total_mass

    def features(self) -> tuple[float, float] | None:
        """Smallest and largest abscissa where u or mu is not trivial."""
        xs = [self.mu.breakpoints()]
        if len(self.u_knots):
            xs.append(self.u_knots[:, 0])
        xs = np.concatenate(xs)
        return (float(xs.min()), float(xs.max())) if len(xs) else None

    def check_compatibility(self, tol: float = TOL_COMPAT) -> None:
        """Raise ``NotInD`` unless ``mu_ac = u_x^2 dx`` on every segment."""
        pts = [self.mu.breakpoints()]
        if len(self.u_knots):
            pts.append(self.u_knots[:, 0])
        pts = np.unique(np.concatenate(pts))
        if not len(pts):
            return
        mids = 0.5 * (pts[1:] + pts[:-1])
        slopes = np.zeros(len(mids))
        if len(self.u_knots) >= 2:
            k = self.u_knots
            j = np.clip(np.searchsorted(k[:, 0], mids) - 1, 0, len(k) - 2)
            inside = (mids > k[0, 0]) & (mids < k[-1, 0])
            slopes = np.where(inside, self.slopes[j], 0.0)
        for a, b, s in zip(pts[:-1], pts[1:], slopes):
            target = s * s
            _, right = self.mu.density_limits(a)
            left, _ = self.mu.density_limits(b)
            for d in (right, left):
                if abs(d - target) > tol * (1.0 + target):
                    raise NotInD(
                        f"density {d!r} differs from u_x^2 = {target!r} on ({a!r}, {b!r})"
                    )

    def to_dict(self) -> dict:
        return {
            "u": {
                "knots": self.u_knots.tolist(),
                "tail_minus": self.tail_minus,
                "tail_plus": self.tail_plus,
            },
            "mu": self.mu.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EulerianState":
        try:
            u = d["u"]
            knots = u.get("knots", [])
            k = np.asarray(knots, dtype=float).reshape(-1, 2)
            tm = u.get("tail_minus", k[0, 1] if len(k) else 0.0)
            tp = u.get("tail_plus", k[-1, 1] if len(k) else tm)
            mu = RadonMeasure.from_dict(d.get("mu", {}))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed state: {exc}", field="state") from exc
        return cls(k, tm, tp, mu)


# --------------------------------------------------------------------------
# Lagrangian states


@dataclass(frozen=True)
class Tails:
    zeta_minus: float = 0.0
    zeta_plus: float = 0.0
    U_minus: float = 0.0
    U_plus: float = 0.0
    H_inf: float = 0.0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class LagrangianState:
    grid: Grid
    y: np.ndarray
    U: np.ndarray
    H: np.ndarray
    tails: Tails

    def __post_init__(self):
        for name in ("y", "U", "H"):
            arr = _frozen(getattr(self, name))
            if arr.shape != (self.grid.n,):
                raise GridMismatch(f"{name} has shape {arr.shape}, grid has {self.grid.n} nodes")
            object.__setattr__(self, name, arr)
        self.check_tails()

    def check_tails(self, tol: float = TOL_TAIL) -> None:
        t = self.tails
        z = self.zeta
        pairs = [
            (z[0], t.zeta_minus),
            (z[-1], t.zeta_plus),
            (self.U[0], t.U_minus),
            (self.U[-1], t.U_plus),
            (self.H[0], 0.0),
            (self.H[-1], t.H_inf),
        ]
        for a, b in pairs:
            if abs(a - b) > tol * (1.0 + abs(b)):
                raise TailMismatch(f"end sample {a!r} does not match tail constant {b!r}")

    @classmethod
    def from_arrays(cls, grid: Grid, y, U, H) -> "LagrangianState":
        y, U, H = (np.asarray(a, dtype=float) for a in (y, U, H))
        xi = grid.xi
        tails = Tails(y[0] - xi[0], y[-1] - xi[-1], U[0], U[-1], H[-1])
        return cls(grid, y, U, H, tails)

    @classmethod
    def identity(cls, grid: Grid) -> "LagrangianState":
        z = np.zeros(grid.n)
        return cls(grid, grid.xi.copy(), z, z, Tails())

    @property
    def xi(self) -> np.ndarray:
        return self.grid.xi

    @property
    def zeta(self) -> np.ndarray:
        return self.y - self.grid.xi

    @property
    def h_infinity(self) -> float:
        return self.tails.H_inf

    def as_triple(self) -> BanachTriple:
        t = self.tails
        return BanachTriple(
            TailedFunction(self.zeta, t.zeta_minus, t.zeta_plus),
            TailedFunction(self.U, t.U_minus, t.U_plus),
            TailedFunction(self.H, 0.0, t.H_inf),
        )

    def nodal(self) -> np.ndarray:
        """``(3, n)`` array ``(zeta, U, H)``."""
        return np.stack([self.zeta, self.U, self.H])

    @classmethod
    def from_nodal(cls, grid: Grid, arr: np.ndarray, tails: Tails | None = None) -> "LagrangianState":
        arr = np.asarray(arr, dtype=float)
        y = arr[0] + grid.xi
        if tails is None:
            return cls.from_arrays(grid, y, arr[1], arr[2])
        return cls(grid, y, arr[1], arr[2], tails)

    def cell_derivatives(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Forward differences ``(y_xi, U_xi, H_xi)`` on each of the ``n - 1`` cells."""
        h = self.grid.h
        return np.diff(self.y) / h, np.diff(self.U) / h, np.diff(self.H) / h

    def node_derivatives(self) -> np.ndarray:
        """``(3, n)`` central-difference derivatives ``(y_xi, U_xi, H_xi)``."""
        h = self.grid.h
        return np.stack([np.gradient(a, h) for a in (self.y, self.U, self.H)])

    def lerp(self, other: "LagrangianState", s: float) -> "LagrangianState":
        """``(1 - s) self + s other``."""
        if other.grid != self.grid:
            raise GridMismatch("states live on different grids")
        a, b = self.tails, other.tails
        tails = Tails(*((1 - s) * p + s * q for p, q in zip(a.__dict__.values(), b.__dict__.values())))
        return LagrangianState(
            self.grid,
            (1 - s) * self.y + s * other.y,
            (1 - s) * self.U + s * other.U,
            (1 - s) * self.H + s * other.H,
            tails,
        )

    def minus(self, other: "LagrangianState") -> BanachTriple:
        """Tangent vector ``self - other`` as an element of B."""
        if other.grid != self.grid:
            raise GridMismatch("states live on different grids")
        return self.as_triple() - other.as_triple()

    def support_indices(self, tol: float = 1e-13) -> tuple[int, int] | None:
        """First and last node where the state differs from its tail values."""
        t = self.tails
        z = self.zeta
        dev_left = np.maximum.reduce(
            [np.abs(z - t.zeta_minus), np.abs(self.U - t.U_minus), np.abs(self.H)]
        )
        dev_right = np.maximum.reduce(
            [np.abs(z - t.zeta_plus), np.abs(self.U - t.U_plus), np.abs(self.H - t.H_inf)]
        )
        scale = tol * (1.0 + np.abs(self.nodal()).max())
        left = np.flatnonzero(dev_left > scale)
        right = np.flatnonzero(dev_right > scale)
        if not len(left) or not len(right):
            return None
        return int(max(left[0] - 1, 0)), int(min(right[-1] + 1, self.grid.n - 1))


# --------------------------------------------------------------------------
# L : D -> F0


def _generalized_inverse(mu: RadonMeasure, xi: np.ndarray) -> np.ndarray:
    """``y(xi) = sup{y : mu((-inf, y)) + y < xi}`` evaluated exactly.

    On each interval between breakpoints ``G`` is quadratic, so the inverse is
    a closed-form root; atoms give plateaus ``[G(b), G(b) + m]`` of ``y = b``.
    """
    b = mu.breakpoints()
    if not len(b):
        return xi.copy()
    P = b + mu.cdf_open(b)
    if len(mu.atoms):
        mass = np.zeros(len(b))
        idx = np.searchsorted(b, mu.atoms[:, 0])
        mass[idx] = mu.atoms[:, 1]
    else:
        mass = np.zeros(len(b))
    Q = P + mass
    lim = np.array([mu.density_limits(x) for x in b])
    d_right = lim[:, 1]
    d_left = lim[:, 0]

    k = np.searchsorted(P, xi, side="right") - 1
    y = np.empty_like(xi)
    before = k < 0
    y[before] = xi[before]
    kk = np.clip(k, 0, len(b) - 1)
    on_plateau = (~before) & (xi <= Q[kk])
    y[on_plateau] = b[kk[on_plateau]]
    after = (~before) & (~on_plateau) & (k == len(b) - 1)
    y[after] = xi[after] - mu.total_mass
    mid = (~before) & (~on_plateau) & (k < len(b) - 1)
    if np.any(mid):
        j = kk[mid]
        width = b[j + 1] - b[j]
        alpha = (d_left[j + 1] - d_right[j]) / (2.0 * width)
        beta = 1.0 + d_right[j]
        r = xi[mid] - Q[j]
        disc = np.maximum(beta * beta + 4.0 * alpha * r, 0.0)
        s = 2.0 * r / (beta + np.sqrt(disc))
        y[mid] = b[j] + np.clip(s, 0.0, width)
    return y


def to_lagrangian(state: EulerianState, grid: Grid, check: bool = True) -> LagrangianState:
    """The map L: D -> F0, evaluated at the grid nodes."""
    if check:
        state.check_compatibility()
    mu = state.mu
    total = mu.total_mass
    feats = state.features()
    if feats is not None:
        lo, hi = feats
        if not grid.xi_min < lo:
            raise DomainTooNarrow(
                f"xi_min = {grid.xi_min} must lie left of the first feature at x = {lo}"
            )
        if not grid.xi_max > hi + total:
            raise DomainTooNarrow(
                f"xi_max = {grid.xi_max} must exceed {hi + total} (last feature plus total energy)"
            )
    xi = grid.xi
    y = _generalized_inverse(mu, np.asarray(xi, dtype=float))
    H = xi - y
    H[0] = 0.0
    U = state.u(y)
    tails = Tails(0.0, -total, state.tail_minus, state.tail_plus, total)
    return LagrangianState(grid, y, U, H, tails)


# --------------------------------------------------------------------------
# M : F -> D


def _check_monotone(X: LagrangianState) -> None:
    a, _, c = X.cell_derivatives()
    if a.min() < -TOL_MONO * (1 + np.abs(X.y).max()) or c.min() < -TOL_MONO * (1 + np.abs(X.H).max()):
        raise NotInF("y and H must be nondecreasing")


def relation_defect(X: LagrangianState) -> np.ndarray:
    """Cellwise ``(y_xi H_xi - U_xi^2) / (y_xi + H_xi)^2``."""
    a, b, c = X.cell_derivatives()
    return (a * c - b * b) / np.maximum((a + c) ** 2, 1e-300)


def to_eulerian(X: LagrangianState, strict: bool = True) -> EulerianState:
    """The map M: F -> D.

    Consecutive nodes whose ``y`` increments are below ``1e-10 h`` form a
    plateau; the ``H`` increase across a plateau becomes an atom.  With
    ``strict=False`` states in G (``y_xi H_xi >= U_xi^2``) are accepted and the
    density is ``H_xi / y_xi`` cell by cell.
    """
    _check_monotone(X)
    if strict and np.any(np.abs(relation_defect(X)) > TOL_REL):
        raise NotInF("y_xi H_xi = U_xi^2 violated")
    eps = PLATEAU_FACTOR * X.grid.h
    # tolerated roundoff dips in y must not reorder the knots
    y, U, H = np.maximum.accumulate(X.y), X.U, X.H
    dy = np.diff(y)
    dH = np.diff(H)
    moving = dy >= eps
    group = np.concatenate([[0], np.cumsum(moving)])
    starts = np.flatnonzero(np.concatenate([[True], moving]))
    knots = np.column_stack([y[starts], U[starts]])

    atoms = []
    plateau = ~moving
    if np.any(plateau):
        cells = np.flatnonzero(plateau)
        gid = group[cells]
        for g in np.unique(gid):
            sel = cells[gid == g]
            m = float(dH[sel].sum())
            if m > 0:
                atoms.append((float(y[sel[0]]), m))
    cells = np.flatnonzero(moving)
    dens = dH[cells] / dy[cells]
    dk = []
    if len(cells):
        # merge contiguous cells with identical density
        brk = np.flatnonzero(
            (np.diff(dens) != 0) | (np.diff(cells) != 1) | (y[cells[1:]] != y[cells[:-1] + 1])
        )
        run_start = np.concatenate([[0], brk + 1])
        run_end = np.concatenate([brk, [len(cells) - 1]])
        for s, e in zip(run_start, run_end):
            d = float(dens[s])
            a, b = float(y[cells[s]]), float(y[cells[e] + 1])
            if d * (b - a) > eps:
                dk += [(a, 0.0), (a, d), (b, d), (b, 0.0)]
    mu = RadonMeasure(atoms=atoms, density_knots=dk)
    t = X.tails
    return EulerianState(knots, t.U_minus, t.U_plus, mu)


# --------------------------------------------------------------------------
# relabelings and the projection onto G0


@dataclass(frozen=True)
class Relabeling:
    """Strictly increasing piecewise-linear ``f`` with ``f = id`` outside its knots."""

    x: np.ndarray
    fx: np.ndarray

    def __post_init__(self):
        x = _frozen(self.x)
        fx = _frozen(self.fx)
        if x.shape != fx.shape or len(x) < 2:
            raise ValidationError("relabeling needs matching knot arrays", field="f")
        if np.any(np.diff(x) <= 0) or np.any(np.diff(fx) <= 0):
            raise NotMonotone("relabeling must be strictly increasing")
        if abs(fx[0] - x[0]) > 1e-12 or abs(fx[-1] - x[-1]) > 1e-12:
            raise ValidationError("f - id must vanish at the end knots", field="f")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "fx", fx)

    @classmethod
    def from_function(cls, fn, x) -> "Relabeling":
        x = np.asarray(x, dtype=float)
        return cls(x, fn(x))

    @classmethod
    def identity(cls, a: float = -1.0, b: float = 1.0) -> "Relabeling":
        return cls(np.array([a, b]), np.array([a, b]))

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        return xi + np.interp(xi, self.x, self.fx - self.x, left=0.0, right=0.0)

    def inverse(self) -> "Relabeling":
        return Relabeling(self.fx, self.x)

    @property
    def alpha(self) -> float:
        """``||f - id||_{W^{1,inf}} + ||f^{-1} - id||_{W^{1,inf}}``."""
        def size(x, fx):
            slopes = np.diff(fx) / np.diff(x)
            return float(np.abs(fx - x).max() + np.abs(slopes - 1.0).max())
        return size(self.x, self.fx) + size(self.fx, self.x)


def _compose(X: LagrangianState, p: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Evaluate the piecewise-linear extension of X (affine outside the grid) at ``p``."""
    xi = X.grid.xi
    zeta = np.interp(p, xi, X.zeta)
    return p + zeta, np.interp(p, xi, X.U), np.interp(p, xi, X.H)


def relabel(X: LagrangianState, f: Relabeling) -> LagrangianState:
    """``X o f = (y o f, U o f, H o f)`` by piecewise-linear interpolation."""
    g = X.grid
    if f.x[0] < g.xi_min or f.x[-1] > g.xi_max:
        raise DomainTooNarrow("f - id must be supported inside the grid")
    y, U, H = _compose(X, f(g.xi))
    return LagrangianState(g, y, U, H, X.tails)


def project_pi(X: LagrangianState) -> LagrangianState:
    """``Pi(X) = X o (y + H)^{-1}``, landing on the slice ``y + H = id``."""
    g = X.grid
    xi = g.xi
    w = X.y + X.H
    if np.any(np.diff(w) <= 0):
        raise NotInvertible("y + H is not strictly increasing")
    t = X.tails
    shift_left = t.zeta_minus
    shift_right = t.zeta_plus + t.H_inf
    sup = X.support_indices()
    if sup is not None:
        lo, hi = sup
        if w[lo] < g.xi_min or w[hi] > g.xi_max:
            raise DomainTooNarrow("the relabeled state would leave the grid window")
    p = np.interp(xi, w, xi)
    p = np.where(xi < w[0], xi - shift_left, p)
    p = np.where(xi > w[-1], xi - shift_right, p)
    y, U, _ = _compose(X, p)
    H = xi - y
    tails = Tails(0.0, -t.H_inf, t.U_minus, t.U_plus, t.H_inf)
    return LagrangianState(g, y, U, H, tails)


# --------------------------------------------------------------------------
# class membership


@dataclass(frozen=True)
class ClassReport:
    in_F: bool
    in_G: bool
    in_F0: bool
    in_G0: bool
    alpha_estimate: float
    c_estimate: float
    relation_defect: float
    identity_defect: float
    convcond_max: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def validate(
    X: LagrangianState,
    tol_mono: float = TOL_MONO,
    tol_rel: float = TOL_REL,
    tol_id: float = TOL_ID,
) -> ClassReport:
    """Evaluate the discrete F / G / F0 / G0 predicates cell by cell."""
    a, b, c = X.cell_derivatives()
    mono = bool(a.min() >= -tol_mono and c.min() >= -tol_mono)
    c_est = float((a + c).min())
    positive = c_est > 0
    rel = (a * c - b * b) / np.maximum((a + c) ** 2, 1e-300)
    in_F = mono and positive and bool(np.abs(rel).max() <= tol_rel)
    in_G = mono and positive and bool(rel.min() >= -tol_rel)
    xi = X.grid.xi
    w = X.y + X.H
    id_defect = float(np.abs(w - xi).max())
    t = X.tails
    id_ok = id_defect <= tol_id and abs(t.zeta_minus) <= tol_id and abs(t.zeta_plus + t.H_inf) <= tol_id
    if positive:
        wx = a + c
        inv = np.interp(xi, w, xi)
        alpha = (
            float(np.abs(w - xi).max() + np.abs(wx - 1.0).max())
            + float(np.abs(inv - xi).max() + np.abs(1.0 / wx - 1.0).max())
        )
    else:
        alpha = float("inf")
    conv = float((a * a + c * c + 2 * b * b).max())
    return ClassReport(
        in_F=in_F,
        in_G=in_G,
        in_F0=bool(in_F and id_ok),
        in_G0=bool(in_G and id_ok),
        alpha_estimate=alpha,
        c_estimate=c_est,
        relation_defect=float(np.abs(rel).max()),
        identity_defect=id_defect,
        convcond_max=conv,
    )


def eulerian_sup_distance(a: EulerianState, b: EulerianState, xs=None) -> dict:
    """Sup distances between two Eulerian states on a probe set.

    ``u`` is compared pointwise; measures through their cumulative functions
    (a weak-star diagnostic; no topology on the measure part is implied).
    """
    if xs is None:
        # cumulative functions jump at atoms, so they are probed off the knots
        generic = np.linspace(-20.0, 20.0, 40001) + 1e-7 * np.pi
        pts = [generic]
        for s in (a, b):
            if len(s.u_knots):
                pts.append(s.u_knots[:, 0])
        xs = np.unique(np.concatenate(pts))
    else:
        generic = xs = np.asarray(xs, dtype=float)
    return {
        "u": float(np.abs(a.u(xs) - b.u(xs)).max()),
        "cdf": float(np.abs(a.mu.cdf(generic) - b.mu.cdf(generic)).max()),
        "mass": abs(a.mu.total_mass - b.mu.total_mass),
    }
