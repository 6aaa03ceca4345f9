import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hsx.banach import (
    BanachTriple,
    Grid,
    TailedFunction,
    b_inner,
    b_norm,
    chi_minus,
    chi_plus,
    e1_decompose,
    e2_decompose,
    h1_norm_sq,
    nodal_gram,
)
from hsx.errors import GridMismatch, TailMismatch, ValidationError

GRID = Grid(-3.0, 3.0, 61)


def random_triple(rng, grid=GRID):
    arr = rng.normal(size=(3, grid.n))
    arr[2, 0] = 0.0
    return BanachTriple.from_nodal(arr)


class TestGrid:
    def test_spacing_and_nodes(self):
        g = Grid(-2.0, 2.0, 5)
        assert g.h == 1.0
        np.testing.assert_array_equal(g.xi, [-2, -1, 0, 1, 2])

    @pytest.mark.parametrize("lo, hi, n", [(-1.0, 2.0, 10), (-2.0, 1.0, 10), (-2.0, 2.0, 2)])
    def test_rejects_bad_grids(self, lo, hi, n):
        with pytest.raises(ValidationError):
            Grid(lo, hi, n)

    def test_refined_halves_spacing(self):
        assert GRID.refined().h == pytest.approx(GRID.h / 2)


class TestPartitionOfUnity:
    @pytest.mark.parametrize("xi, expected", [(-1.0, 0.0), (0.0, 0.5), (1.0, 1.0), (-5.0, 0.0), (7.0, 1.0)])
    def test_values(self, xi, expected):
        assert chi_plus(xi) == expected

    def test_sums_to_one_and_monotone(self):
        xi = np.linspace(-3, 3, 1001)
        np.testing.assert_allclose(chi_plus(xi) + chi_minus(xi), 1.0, atol=0)
        assert np.all(np.diff(chi_plus(xi)) >= 0)

    @given(st.floats(-10, 10), st.floats(-10, 10))
    def test_monotone_pairs(self, a, b):
        lo, hi = sorted((a, b))
        assert chi_plus(lo) <= chi_plus(hi)


class TestDecomposition:
    def test_zero(self):
        bar, a, b = e2_decompose(TailedFunction(np.zeros(GRID.n), 0, 0), GRID)
        assert (a, b) == (0, 0) and not bar.any()

    def test_constant(self):
        bar, a, b = e2_decompose(TailedFunction(np.full(GRID.n, 2.5), 2.5, 2.5), GRID)
        assert (a, b) == (2.5, 2.5)
        np.testing.assert_allclose(bar, 0.0, atol=1e-15)

    def test_chi_plus(self):
        f = TailedFunction(chi_plus(GRID.xi), 0.0, 1.0)
        bar, a, b = e2_decompose(f, GRID)
        assert (a, b) == (1.0, 0.0)
        np.testing.assert_allclose(bar, 0.0, atol=1e-15)

    def test_tail_mismatch(self):
        with pytest.raises(TailMismatch):
            e2_decompose(TailedFunction(np.zeros(GRID.n), 1.0, 0.0), GRID)
        with pytest.raises(TailMismatch):
            e1_decompose(TailedFunction(np.zeros(GRID.n), 1.0, 0.0), GRID)

    @given(st.lists(st.floats(-100, 100), min_size=GRID.n, max_size=GRID.n))
    def test_reconstruction_is_exact(self, vals):
        f = TailedFunction.from_samples(vals)
        bar, a, b = e2_decompose(f, GRID)
        rebuilt = bar + a * chi_plus(GRID.xi) + b * chi_minus(GRID.xi)
        np.testing.assert_allclose(rebuilt, f.samples, rtol=0, atol=1e-12)
        assert abs(bar[0]) <= 1e-12 and abs(bar[-1]) <= 1e-12


class TestH1:
    @pytest.mark.parametrize("lo, hi", [(-2.0, 2.0), (-3.0, 3.0)])
    def test_hat_by_hand(self, lo, hi):
        # 5 nodes, hat of height 1 at the middle node:
        # trapezoid of bar^2 = h; central differences +-1/(2h) at two interior
        # nodes (weight h each) give 2 h / (4 h^2) = 1 / (2h).
        g = Grid(lo, hi, 5)
        h = g.h
        assert h1_norm_sq(np.array([0, 0, 1.0, 0, 0]), g) == pytest.approx(h + 1 / (2 * h), rel=1e-15)

    def test_zero(self):
        assert h1_norm_sq(np.zeros(GRID.n), GRID) == 0.0

    def test_homogeneity(self):
        bar = np.random.default_rng(3).normal(size=GRID.n)
        assert h1_norm_sq(2 * bar, GRID) == pytest.approx(4 * h1_norm_sq(bar, GRID), rel=1e-14)

    def test_shape_checked(self):
        with pytest.raises(GridMismatch):
            h1_norm_sq(np.zeros(GRID.n + 1), GRID)

    def test_second_order_under_halving(self):
        # f = exp(-4 xi^2): ||f||^2 = sqrt(pi/8), ||f'||^2 = 64 sqrt(pi) / (2 * 8^1.5)
        exact = np.sqrt(np.pi / 8) + 64 * np.sqrt(np.pi) / (2 * 8**1.5)
        errs = []
        g = Grid(-4.0, 4.0, 81)
        for _ in range(3):
            errs.append(abs(h1_norm_sq(np.exp(-4 * g.xi**2), g) - exact))
            g = g.refined()
        assert errs[1] / errs[0] == pytest.approx(0.25, abs=0.03)
        assert errs[2] / errs[1] == pytest.approx(0.25, abs=0.03)


class TestInner:
    def test_zero(self):
        Z = BanachTriple.from_nodal(np.zeros((3, GRID.n)))
        assert b_inner(Z, Z, GRID) == 0.0

    def test_symmetric_and_cauchy_schwarz(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            X, Y = random_triple(rng), random_triple(rng)
            assert abs(b_inner(X, Y, GRID) - b_inner(Y, X, GRID)) <= 1e-12 * (1 + abs(b_inner(X, Y, GRID)))
            assert abs(b_inner(X, Y, GRID)) <= b_norm(X, GRID) * b_norm(Y, GRID) * (1 + 1e-12)

    def test_bilinear(self):
        rng = np.random.default_rng(12)
        X, Y, Z = (random_triple(rng) for _ in range(3))
        lhs = b_inner(X.scale(2.0) + Y, Z, GRID)
        rhs = 2 * b_inner(X, Z, GRID) + b_inner(Y, Z, GRID)
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_positive_on_tails_only(self):
        arr = np.zeros((3, GRID.n))
        arr[1] = 1.0  # constant U: only tails are nonzero
        X = BanachTriple.from_nodal(arr)
        assert b_norm(X, GRID) == pytest.approx(np.sqrt(2.0))

    def test_grid_mismatch(self):
        X = random_triple(np.random.default_rng(0))
        with pytest.raises(GridMismatch):
            b_inner(X, X, Grid(-3.0, 3.0, 11))

    def test_h_component_must_vanish_left(self):
        f = TailedFunction(np.ones(GRID.n), 0.0, 1.0)
        with pytest.raises(TailMismatch):
            BanachTriple(f, f, TailedFunction(np.ones(GRID.n), 1.0, 1.0))

    def test_nodal_gram_matches_decomposition(self):
        rng = np.random.default_rng(5)
        ng = nodal_gram(GRID)
        for _ in range(5):
            X, Y = random_triple(rng), random_triple(rng)
            assert ng.inner(X.nodal(), Y.nodal()) == pytest.approx(b_inner(X, Y, GRID), rel=1e-11)
