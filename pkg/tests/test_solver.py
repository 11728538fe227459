"""Solver tests: linear solves, the two timestepping schemes, conservation
and consistency properties, and the smooth-function projection."""

import warnings

import numpy as np
import numpy.testing as npt
import pytest
import scipy.sparse as sp

from escher.assembly import assemble_operators
from escher.config import sphere_eoc_initial
from escher.diagnostics import l2_error
from escher.errors import (
    IncompatibleRHS,
    NewtonDivergence,
    SingularMatrix,
    ValidationError,
)
from escher.linalg import solve_mean_zero_spd, solve_sparse
from escher.meshing import advance_mesh, build_icosphere, mesh_size_h
from escher.potentials import quartic_potential
from escher.solver import (
    PhaseState,
    SchemeConfig,
    chemical_potential_for,
    initial_data_interpolate,
    ritz_projection,
    run_simulation,
    step_fully_implicit,
    step_imex,
)
from escher.surfaces import OscillatingSphere, StaticSphere


@pytest.fixture(scope="module")
def pot():
    return quartic_potential()


@pytest.fixture(scope="module")
def sphere_mesh():
    return build_icosphere(OscillatingSphere(), 2)


class TestSolveSparse:
    def test_identity(self):
        b = np.arange(5.0)
        npt.assert_allclose(solve_sparse(sp.identity(5, format="csr"), b), b)

    def test_small_symmetric(self):
        A = sp.csr_matrix(np.array([[2.0, 1.0], [1.0, 2.0]]))
        npt.assert_allclose(solve_sparse(A, np.array([3.0, 3.0])), [1, 1])

    @pytest.mark.parametrize("method", ["lu", "bicgstab"])
    def test_random_spd_residual(self, method):
        rng = np.random.default_rng(0)
        raw = rng.normal(size=(50, 50))
        A = sp.csr_matrix(raw @ raw.T + 50 * np.eye(50))
        b = rng.normal(size=50)
        x = solve_sparse(A, b, method=method)
        assert np.linalg.norm(A @ x - b) <= 1e-12 * np.linalg.norm(b) * 50

    def test_singular_matrix(self):
        A = sp.csr_matrix(np.array([[1.0, 1.0], [1.0, 1.0]]))
        with pytest.raises(SingularMatrix):
            solve_sparse(A, np.ones(2))


class TestSolveMeanZero:
    def test_zero_rhs(self, sphere_mesh):
        ops = assemble_operators(sphere_mesh)
        x = solve_mean_zero_spd(ops.A, np.zeros(ops.node_count), ops.M)
        npt.assert_array_equal(x, 0.0)

    def test_residual_and_mean(self, sphere_mesh):
        ops = assemble_operators(sphere_mesh)
        rng = np.random.default_rng(1)
        z = rng.normal(size=ops.node_count)
        b = ops.M @ z
        b -= b.sum() / ops.node_count  # make compatible
        x = solve_mean_zero_spd(ops.A, b, ops.M)
        assert np.abs(ops.A @ x - b).max() <= 1e-10 * np.abs(b).max()
        lumped = np.asarray(ops.M.sum(axis=1)).ravel()
        assert abs(lumped @ x) <= 1e-10 * np.abs(x).max()

    def test_incompatible_rhs(self, sphere_mesh):
        ops = assemble_operators(sphere_mesh)
        b = ops.M @ np.ones(ops.node_count)
        with pytest.raises(IncompatibleRHS):
            solve_mean_zero_spd(ops.A, b, ops.M)


def make_state(mesh, alpha, cfg, pot):
    beta = chemical_potential_for(mesh, alpha, cfg, pot)
    return PhaseState(alpha, beta, time=mesh.current_time, step=0)


class TestSteps:
    def test_mass_conserved_per_step(self, sphere_mesh, pot):
        cfg = SchemeConfig(eps=0.05, tau=1e-4, t_end=1e-3)
        alpha = initial_data_interpolate(sphere_mesh, sphere_eoc_initial)
        state = make_state(sphere_mesh, alpha, cfg, pot)
        ops0 = assemble_operators(sphere_mesh)
        mass0 = float((ops0.M @ alpha).sum())
        for stepper in (step_fully_implicit, step_imex):
            mesh_next = advance_mesh(sphere_mesh, cfg.tau)
            out = stepper(sphere_mesh, mesh_next, state, cfg, pot)
            mass1 = float((assemble_operators(mesh_next).M @ out.alpha).sum())
            assert mass1 == pytest.approx(mass0, abs=1e-10 * max(1.0, abs(mass0)))

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_pure_phase_fixed_point(self, pot):
        mesh = build_icosphere(StaticSphere(), 1)
        cfg = SchemeConfig(eps=0.05, tau=1e-3, t_end=1e-2)
        alpha = np.ones(mesh.node_count)
        result = run_simulation(cfg, mesh, alpha, pot)
        npt.assert_allclose(result.final_state.alpha, 1.0, atol=1e-12)
        npt.assert_allclose(result.final_state.beta, 0.0, atol=1e-12)

    def test_newton_iteration_budget(self, pot):
        # tau = 1e-4 with previous-step initial guesses stays comfortably
        # within eight iterations per step
        mesh = build_icosphere(OscillatingSphere(), 2)
        cfg = SchemeConfig(eps=0.05, tau=1e-4, t_end=2e-3)
        alpha = initial_data_interpolate(mesh, sphere_eoc_initial)
        result = run_simulation(cfg, mesh, alpha, pot)
        iters = [r.newton_iters for r in result.records[1:]]
        assert max(iters) <= 8

    def test_newton_divergence_is_reported(self, sphere_mesh, pot):
        cfg = SchemeConfig(eps=0.05, tau=1e-4, t_end=1e-3, newton_max_iter=1,
                           newton_tol=1e-14)
        rng = np.random.default_rng(2)
        alpha = 1e4 * rng.normal(size=sphere_mesh.node_count)
        state = PhaseState(alpha, np.zeros_like(alpha), time=0.0, step=0)
        mesh_next = advance_mesh(sphere_mesh, cfg.tau)
        with pytest.raises(NewtonDivergence):
            step_imex(sphere_mesh, mesh_next, state, cfg, pot)

    def test_uniqueness_regime_two_guesses(self, sphere_mesh, pot):
        # tau below 4 eps^3 / theta^2: Newton lands on the same solution
        # from the previous state and from zero
        cfg = SchemeConfig(eps=0.05, tau=1e-4, t_end=1e-3)
        assert cfg.tau < cfg.uniqueness_bound(pot)
        alpha = initial_data_interpolate(sphere_mesh, sphere_eoc_initial)
        state = make_state(sphere_mesh, alpha, cfg, pot)
        mesh_next = advance_mesh(sphere_mesh, cfg.tau)
        a = step_fully_implicit(sphere_mesh, mesh_next, state, cfg, pot)
        zeros = np.zeros(sphere_mesh.node_count)
        b = step_fully_implicit(sphere_mesh, mesh_next, state, cfg, pot,
                                initial_guess=(zeros, zeros))
        assert np.abs(a.alpha - b.alpha).max() <= 1e-9
        assert np.abs(a.beta - b.beta).max() <= 1e-9

    def test_newton_superlinear_tail(self, sphere_mesh, pot):
        cfg = SchemeConfig(eps=0.05, tau=1e-4, t_end=1e-3)
        alpha = initial_data_interpolate(sphere_mesh, sphere_eoc_initial)
        state = make_state(sphere_mesh, alpha, cfg, pot)
        mesh_next = advance_mesh(sphere_mesh, cfg.tau)
        out = step_fully_implicit(sphere_mesh, mesh_next, state, cfg, pot)
        hist = out.residual_history
        assert len(hist) >= 2
        assert hist[-1] <= hist[-2] ** 1.5

    def test_schemes_agree_to_first_order(self, pot):
        # terminal difference between the two schemes halves with tau
        mesh = build_icosphere(StaticSphere(), 2)
        alpha = initial_data_interpolate(mesh, sphere_eoc_initial)
        t_end = 2e-3
        deltas = []
        for tau in (2e-4, 1e-4, 5e-5):
            finals = {}
            for scheme in ("fully_implicit", "imex"):
                cfg = SchemeConfig(eps=0.05, tau=tau, t_end=t_end, scheme=scheme)
                finals[scheme] = run_simulation(cfg, mesh, alpha, pot).final_state.alpha
            deltas.append(np.abs(finals["fully_implicit"] - finals["imex"]).max())
        for coarse, fine in zip(deltas[:-1], deltas[1:]):
            assert 1.6 <= coarse / fine <= 2.4


class TestRunSimulation:
    def test_zero_steps(self, sphere_mesh, pot):
        cfg = SchemeConfig(eps=0.05, tau=1e-4, t_end=0.0)
        alpha = initial_data_interpolate(sphere_mesh, sphere_eoc_initial)
        result = run_simulation(cfg, sphere_mesh, alpha, pot)
        assert len(result.records) == 1
        assert result.final_state.step == 0

    def test_tau_must_divide_t_end(self, sphere_mesh, pot):
        cfg = SchemeConfig(eps=0.05, tau=3e-4, t_end=1e-3)
        with pytest.raises(ValidationError):
            run_simulation(cfg, sphere_mesh, np.zeros(sphere_mesh.node_count), pot)

    def test_uniqueness_warning(self, sphere_mesh, pot):
        cfg = SchemeConfig(eps=0.05, tau=1e-3, t_end=1e-3)  # above 5e-4 bound
        alpha = initial_data_interpolate(sphere_mesh, sphere_eoc_initial)
        with pytest.warns(RuntimeWarning):
            run_simulation(cfg, sphere_mesh, alpha, pot)

    def test_no_warning_for_imex(self, sphere_mesh, pot):
        cfg = SchemeConfig(eps=0.05, tau=1e-3, t_end=1e-3, scheme="imex")
        alpha = initial_data_interpolate(sphere_mesh, sphere_eoc_initial)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            run_simulation(cfg, sphere_mesh, alpha, pot)

    def test_mass_drift_bound_over_run(self, sphere_mesh, pot):
        cfg = SchemeConfig(eps=0.05, tau=1e-4, t_end=5e-3)
        alpha = initial_data_interpolate(sphere_mesh, sphere_eoc_initial)
        result = run_simulation(cfg, sphere_mesh, alpha, pot)
        masses = [r.mass for r in result.records]
        n_steps = len(masses) - 1
        assert abs(masses[-1] - masses[0]) <= (
            1e-8 * abs(masses[0]) + n_steps * cfg.newton_tol
        )

    def test_record_times_increase(self, sphere_mesh, pot):
        cfg = SchemeConfig(eps=0.05, tau=1e-4, t_end=1e-3)
        alpha = initial_data_interpolate(sphere_mesh, sphere_eoc_initial)
        result = run_simulation(cfg, sphere_mesh, alpha, pot)
        times = [r.time for r in result.records]
        assert all(b > a for a, b in zip(times[:-1], times[1:]))

    def test_snapshots_at_cadence(self, sphere_mesh, pot):
        cfg = SchemeConfig(eps=0.05, tau=1e-4, t_end=1e-3)
        alpha = initial_data_interpolate(sphere_mesh, sphere_eoc_initial)
        result = run_simulation(cfg, sphere_mesh, alpha, pot, snapshot_every=5)
        assert [s.step for _, s in result.snapshots] == [0, 5, 10]


class TestRitzProjection:
    def test_constant(self, sphere_mesh):
        c = 2.5
        vals = ritz_projection(sphere_mesh,
                               z=lambda p: np.full(p.shape[:-1], c),
                               grad_z=lambda p: np.zeros_like(p))
        npt.assert_allclose(vals, c, atol=1e-9)

    def test_ambient_linear_equals_interpolant(self, sphere_mesh):
        g = np.array([0.4, -0.2, 1.0])
        vals = ritz_projection(sphere_mesh,
                               z=lambda p: p @ g,
                               grad_z=lambda p: np.broadcast_to(g, p.shape))
        npt.assert_allclose(vals, sphere_mesh.nodes @ g, atol=1e-8)

    def test_second_order_agreement_with_interpolant(self):
        # smooth non-polynomial function: the gap to the interpolant
        # shrinks like h^2 under refinement
        surface = StaticSphere()

        def z(p):
            return np.sin(p[..., 0] + 2 * p[..., 1]) * np.exp(p[..., 2])

        def grad_z(p):
            gx = np.cos(p[..., 0] + 2 * p[..., 1]) * np.exp(p[..., 2])
            gz = z(p)
            g = np.stack([gx, 2 * gx, gz], axis=-1)
            normal = p / np.linalg.norm(p, axis=-1, keepdims=True)
            return g - (g * normal).sum(axis=-1, keepdims=True) * normal

        gaps, hs = [], []
        for subdiv in (1, 2, 3):
            mesh = build_icosphere(surface, subdiv)
            ritz = ritz_projection(mesh, z, grad_z)
            interp = initial_data_interpolate(mesh, z)
            gaps.append(l2_error(mesh, ritz, interp))
            hs.append(mesh_size_h(mesh))
        rate = np.log(gaps[0] / gaps[-1]) / np.log(hs[0] / hs[-1])
        assert rate > 1.6
