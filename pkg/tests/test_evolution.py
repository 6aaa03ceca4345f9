import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import resolved_states
from hsx.errors import NotInF, SupportEscapesGrid, ValidationError
from hsx.evolution import (
    TestFunction,
    Trajectory,
    breaking_time,
    evolve,
    evolve_eulerian,
    invariant_defect,
    weak_residual,
)
from hsx.scenarios import default_grid, get_scenario, random_g0_state, random_relabeling, shift_frame
from hsx.state import EulerianState, LagrangianState, eulerian_sup_distance, relabel, to_lagrangian, validate

GRID = default_grid(512)
XS = np.linspace(-4.0, 4.0, 8001) + 1e-7


class TestEvolve:
    def test_zero_time_is_identity(self):
        X = random_g0_state(1, GRID)
        np.testing.assert_array_equal(evolve(X, 0.0).nodal(), X.nodal())

    def test_characteristics_by_hand(self, grid4096):
        # breaking data: at xi = 0 the particle sits at rest with no energy
        # to its left, at xi = 2 it has y = 1, U = -1, H = 1.
        X0 = to_lagrangian(get_scenario("breaking").initial, grid4096)
        i0 = int(np.argmin(np.abs(grid4096.xi)))
        i2 = int(np.argmin(np.abs(grid4096.xi - 2.0)))
        for t in (0.5, 2.0, 3.0):
            X = evolve(X0, t)
            assert X.y[i0] == pytest.approx(-t * t / 8, abs=1e-14)
            assert X.y[i2] == pytest.approx(1 - t + t * t / 8, abs=1e-14)
            assert X.U[i2] == pytest.approx(-1 + t / 4, abs=1e-14)

    @given(st.integers(0, 10_000), st.floats(0, 3), st.floats(0, 3))
    def test_semigroup(self, seed, s, t):
        X = random_g0_state(seed, GRID)
        a = evolve(evolve(X, s), t)
        b = evolve(X, s + t)
        np.testing.assert_allclose(a.nodal(), b.nodal(), atol=1e-12 * (1 + s + t) ** 2)
        assert a.tails.zeta_plus == pytest.approx(b.tails.zeta_plus, abs=1e-12 * (1 + s + t) ** 2)

    @given(resolved_states(GRID), st.floats(0, 5))
    def test_stays_in_f(self, s, t):
        X = evolve(to_lagrangian(s, GRID), t)
        assert validate(X).in_F

    @given(st.integers(0, 10_000), st.floats(0, 6))
    def test_relation_and_gronwall(self, seed, t):
        X0 = random_g0_state(seed, GRID)
        d = invariant_defect(evolve(X0, t), X0, t)
        assert d["rel_drift"] <= 1e-12 * (1 + t) ** 2
        assert d["gronwall_margin"] >= -1e-12

    @given(resolved_states(GRID), st.floats(0, 5))
    def test_energy_conserved(self, s, t):
        X0 = to_lagrangian(s, GRID)
        X = evolve(X0, t)
        assert X.tails.H_inf == X0.tails.H_inf
        E = evolve_eulerian(s, t, GRID)
        assert E.energy == pytest.approx(s.energy, rel=1e-9, abs=1e-12)

    @given(st.integers(0, 10_000), st.floats(0, 4))
    def test_commutes_with_relabeling(self, seed, t):
        X = random_g0_state(seed, GRID)
        f = random_relabeling(seed, GRID)
        a = evolve(relabel(X, f), t)
        b = relabel(evolve(X, t), f)
        np.testing.assert_allclose(a.nodal(), b.nodal(), atol=1e-12 * (1 + t) ** 2)

    @given(resolved_states(GRID), st.floats(0.01, 5))
    def test_y_increasing_away_from_breaking_times(self, s, t):
        X0 = to_lagrangian(s, GRID)
        a, b, c = X0.cell_derivatives()
        # each cell collapses at most once, at t = -2 U_xi / H_xi
        falling = (b < 0) & (c > 0)
        collapse = -2 * b[falling] / c[falling]
        assume(not len(collapse) or np.abs(collapse - t).min() > 1e-6)
        assert evolve(X0, t).cell_derivatives()[0].min() > 0

    def test_negative_time(self):
        with pytest.raises(ValidationError):
            evolve(LagrangianState.identity(GRID), -1.0)

    def test_rejects_states_outside_g(self):
        X = LagrangianState.identity(GRID)
        U = np.zeros(GRID.n)
        U[200:260] = 0.3 * np.sin(np.linspace(0, np.pi, 60))
        with pytest.raises(NotInF):
            evolve(LagrangianState.from_arrays(GRID, X.y, U, X.H), 1.0)


class TestScenarios:
    @pytest.mark.parametrize("t", [0.0, 0.5, 1.0, 1.5, 1.99, 2.5, 3.0, 5.0])
    def test_breaking_matches_closed_form(self, grid4096, t):
        sc = get_scenario("breaking")
        E = evolve_eulerian(sc.initial, t, grid4096)
        assert np.abs(E.u(XS) - sc.exact_u(t, XS)).max() <= 1e-12
        assert np.abs(E.mu.cdf(XS) - sc.exact_mu(t).cdf(XS)).max() <= 1e-10

    def test_breaking_atom_in_both_frames(self, grid4096):
        E = evolve_eulerian(get_scenario("breaking").initial, 2.0, grid4096)
        np.testing.assert_allclose(E.mu.atoms, [[-0.5, 1.0]], atol=1e-12)
        assert E.u(-0.5) == pytest.approx(-0.5, abs=1e-14)
        P = shift_frame(E, 2.0)
        np.testing.assert_allclose(P.mu.atoms, [[0.0, 1.0]], atol=1e-12)
        assert np.abs(P.u(XS)).max() <= 1e-12

    @pytest.mark.parametrize("t", [0.5, 1.0, 3.0])
    def test_one_sided_frame(self, grid4096, t):
        # u(t, z) = 2z/(t-2) on [0, (2-t)^2/4], 0 left of it, (t-2)/2 right of it
        E = shift_frame(evolve_eulerian(get_scenario("breaking").initial, t, grid4096), t)
        end = (2 - t) ** 2 / 4
        expected = np.where(XS <= 0, 0.0, np.where(XS < end, 2 * XS / (t - 2), (t - 2) / 2))
        assert np.abs(E.u(XS) - expected).max() <= 1e-12

    @pytest.mark.parametrize("name, energy", [("dirac8", 8.0), ("twochar", 1.0)])
    def test_fans(self, grid4096, name, energy):
        sc = get_scenario(name)
        for t in (0.5, 1.0, 2.0):
            E = evolve_eulerian(sc.initial, t, grid4096)
            assert np.abs(E.u(XS) - np.clip(2 * XS / t, -energy * t / 4, energy * t / 4)).max() <= 1e-12
            assert E.energy == pytest.approx(energy)

    def test_twochar_edges(self, grid4096):
        E = evolve_eulerian(get_scenario("twochar").initial, 2.0, grid4096)
        k = E.mu.density_knots
        assert k[0, 0] == pytest.approx(-0.5, abs=1e-12) and k[-1, 0] == pytest.approx(0.5, abs=1e-12)

    def test_still(self, grid4096):
        E = evolve_eulerian(get_scenario("still").initial, 3.0, grid4096)
        assert eulerian_sup_distance(E, EulerianState.constant(0.0))["u"] == 0.0

    def test_breaking_times(self):
        assert breaking_time(get_scenario("breaking").initial) == 2.0
        assert breaking_time(get_scenario("dirac8").initial) == float("inf")
        assert breaking_time(EulerianState.from_u([[0.0, 0.0], [1.0, 4.0]])) == float("inf")


class TestWeakResidual:
    def test_initial_term_sign(self):
        # u = 1 transported rigidly; the test function is nonzero at t = 0, so
        # the residual vanishes only with the initial term on the correct side
        X0 = to_lagrangian(EulerianState.constant(1.0), GRID)
        phi = TestFunction(0.1, 0.0, 0.5, 0.5)
        res = [weak_residual(Trajectory.compute(X0, np.linspace(0.0, 1.0, k + 1)), phi) for k in (50, 100)]
        assert res[1] / res[0] == pytest.approx(0.25, abs=0.01)
        assert abs(res[1]) <= 2e-4
        initial_term = phi.rx * phi(0.0, phi.x0)  # the cubic bump integrates to its radius
        assert abs(res[1]) <= 1e-3 * initial_term

    def test_decreases_under_refinement(self):
        sc = get_scenario("breaking")
        phi = TestFunction(1.0, -0.1, 0.5, 0.3)
        res = []
        grid = default_grid(256)
        for slices in (50, 100):
            X0 = to_lagrangian(sc.initial, grid)
            res.append(abs(weak_residual(Trajectory.compute(X0, np.linspace(0, 4, slices + 1)), phi)))
            grid = grid.refined()
        assert res[1] <= 0.65 * res[0]

    def test_support_checks(self):
        X0 = to_lagrangian(get_scenario("breaking").initial, GRID)
        traj = Trajectory.compute(X0, np.linspace(0, 1, 11))
        with pytest.raises(SupportEscapesGrid):
            weak_residual(traj, TestFunction(1.0, 0.0, 0.5, 0.3))
        with pytest.raises(SupportEscapesGrid):
            weak_residual(traj, TestFunction(0.5, 11.0, 0.2, 3.0))

    def test_trajectory_validation(self):
        X = LagrangianState.identity(GRID)
        with pytest.raises(ValidationError):
            Trajectory((0.0, 0.0), (X, X), 0.0)
        with pytest.raises(ValidationError):
            Trajectory((0.0,), (X, X), 0.0)

    def test_radii_positive(self):
        with pytest.raises(ValidationError):
            TestFunction(1.0, 0.0, 0.0, 1.0)
