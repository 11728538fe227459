"""Time stepping for the surface phase-field system on a moving mesh.

Both schemes march the coupled nodal system for the order parameter
``alpha`` and the chemical potential ``beta``.  With M and A the mass and
stiffness matrices on the current mesh, F the nonlinear load of the convex
part of the well, and matrices from the previous time level on the right,
one step solves the 2N x 2N block system

    fully implicit:
        [[M, tau*A], [-eps*A + (theta/eps)*M, M]] (alpha; beta)
            - (1/eps) (0; F(alpha)) = (M_prev alpha_prev; 0)

    implicit-explicit (convex part implicit, concave part explicit):
        [[M, tau*A], [-eps*A, M]] (alpha; beta)
            - (1/eps) (0; F(alpha)) = (M_prev alpha_prev;
                                       -(theta/eps) M_prev alpha_prev)

by Newton's method with the exact Jacobian; each linearisation is solved by
sparse LU, either factored directly or reused as a Krylov preconditioner on
long fine-mesh runs.  Testing the first block row with constants shows the
mass ``1^T M alpha`` is conserved step to step by construction.

The fully implicit solution is unique only for ``tau < 4 eps^3 / theta^2``;
a violation triggers a warning, not an error, since the scheme may still
converge to one of the admissible solutions.
"""

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .assembly import (
    assemble_nonlinear_jacobian,
    assemble_nonlinear_load,
    assemble_operators,
    element_geometry,
    quadrature_points_3d,
)
from .diagnostics import DiagnosticRecord, ginzburg_landau_energy, hminus1_norm
from .errors import LengthMismatch, NewtonDivergence, ValidationError
from .linalg import lu_factor, solve_mean_zero_spd, solve_sparse
from .meshing import advance_mesh, mesh_size_h, surface_area
from .quadrature import quadrature_rule

FULLY_IMPLICIT = "fully_implicit"
IMEX = "imex"
SCHEMES = (FULLY_IMPLICIT, IMEX)

# beyond this many nodes the block LU becomes memory-hungry; fall back to
# the preconditioned iterative solver when the choice is left to 'auto'
DIRECT_SOLVER_NODE_LIMIT = 50_000


@dataclass(frozen=True)
class SchemeConfig:
    """Scheme selection, timestep, and solver knobs for one run."""

    eps: float
    tau: float
    t_end: float
    scheme: str = FULLY_IMPLICIT
    newton_tol: float = 1e-11
    newton_max_iter: int = 25
    linear_solver: str = "auto"  # 'auto' | 'lu' | 'bicgstab'

    def validate(self):
        if not np.isfinite(self.eps) or self.eps <= 0.0:
            raise ValidationError("eps", "must be positive")
        if not np.isfinite(self.tau) or self.tau <= 0.0:
            raise ValidationError("tau", "must be positive")
        if self.t_end < 0.0:
            raise ValidationError("t_end", "must be nonnegative")
        if self.tau > self.t_end > 0.0:
            raise ValidationError("tau", "timestep exceeds final time")
        if self.scheme not in SCHEMES:
            raise ValidationError("scheme", f"expected one of {SCHEMES}")
        if self.newton_tol <= 0.0:
            raise ValidationError("newton_tol", "must be positive")
        if self.newton_max_iter < 1:
            raise ValidationError("newton_max_iter", "must be >= 1")
        if self.linear_solver not in ("auto", "lu", "reuse-lu", "bicgstab"):
            raise ValidationError("linear_solver", "expected auto, lu, reuse-lu or bicgstab")

    def step_count(self):
        """Number of steps; the timestep must divide the final time."""
        if self.t_end == 0.0:
            return 0
        n = int(round(self.t_end / self.tau))
        if n < 1 or abs(n * self.tau - self.t_end) > 1e-8 * self.t_end:
            raise ValidationError(
                "tau", f"{self.tau!r} does not divide t_end={self.t_end!r}"
            )
        return n

    def uniqueness_bound(self, pot):
        theta = pot.theta
        return np.inf if theta == 0.0 else 4.0 * self.eps**3 / theta**2


@dataclass(frozen=True)
class PhaseState:
    """Nodal coefficients of the order parameter and chemical potential."""

    alpha: np.ndarray = field(repr=False)
    beta: np.ndarray = field(repr=False)
    time: float = 0.0
    step: int = 0
    newton_iters: int = 0
    residual_history: tuple = ()


def _check_state(mesh, state):
    n = mesh.node_count
    if state.alpha.shape != (n,) or state.beta.shape != (n,):
        raise LengthMismatch(
            f"state of length {state.alpha.shape[0]} on a mesh with {n} nodes"
        )


def _linear_method(cfg, node_count):
    if cfg.linear_solver == "auto":
        if node_count > DIRECT_SOLVER_NODE_LIMIT:
            return "bicgstab"
        return "reuse-lu" if node_count > 2000 else "lu"
    return cfg.linear_solver


class LinearContext:
    """Linear solves for Newton iterations, reusable across timesteps.

    ``lu`` factors every matrix directly.  ``reuse-lu`` keeps the last
    factorisation and applies it as a preconditioner for BiCGStab on
    subsequent nearby systems, refactoring when the iteration stops being
    cheap; on fine meshes with small timesteps consecutive Jacobians differ
    little, so this cuts most factorisations while solving each
    linearisation to direct-solver accuracy.  ``bicgstab`` is the
    diagonally preconditioned fallback for systems too large to factor.
    """

    # inner Krylov tolerance: inexact Newton directions are fine because the
    # outer iteration always re-evaluates the true nonlinear residual
    RTOL = 1e-6
    REUSE_MAX_ITER = 24

    def __init__(self, method):
        self.method = method
        self._factor = None

    def solve(self, matrix, b):
        if self.method == "lu":
            return lu_factor(matrix).solve(b)
        if self.method == "bicgstab":
            return solve_sparse(matrix, b, method="bicgstab")
        return self._solve_reuse(matrix, b)

    def _solve_reuse(self, matrix, b):
        import scipy.sparse.linalg as spla

        if self._factor is not None:
            precond = spla.LinearOperator(matrix.shape, self._factor.solve,
                                          dtype=float)
            count = 0

            def tick(_):
                nonlocal count
                count += 1

            x, info = spla.bicgstab(matrix, b, M=precond, rtol=self.RTOL,
                                    atol=1e-300, maxiter=self.REUSE_MAX_ITER,
                                    callback=tick)
            if info == 0 and np.isfinite(x).all():
                if count > self.REUSE_MAX_ITER // 2:
                    self._factor = None  # getting stale, refactor next time
                return x
        self._factor = lu_factor(matrix)
        return self._factor.solve(b)


def _newton(ops, rhs1, rhs2, b_matrix, state, cfg, pot, mesh_next,
            initial_guess=None, context=None):
    """Solve the block system by Newton; returns the state at the new time.

    ``b_matrix`` is the (2,1) block of the linear part; the residual is

        G1 = M a + tau A b - rhs1
        G2 = B a + M b - (1/eps) F(a) - rhs2

    Full Newton steps are tried first: near the solvability fold of the
    fully implicit scheme the residual must be allowed to rise transiently,
    where a monotone line search provably stalls at local minima.  If the
    undamped iteration blows up or runs out of budget, a damped
    backtracking pass retries from the initial guess.
    """
    M, A = ops.M, ops.A
    tau, eps = cfg.tau, cfg.eps
    if context is None:
        context = LinearContext(_linear_method(cfg, ops.node_count))

    if initial_guess is None:
        guess = (state.alpha.copy(), state.beta.copy())
    else:
        guess = tuple(np.array(v, dtype=float) for v in initial_guess)

    def residual(a, b):
        g1 = M @ a + tau * (A @ b) - rhs1
        g2 = (b_matrix @ a + M @ b
              - assemble_nonlinear_load(mesh_next, a, pot) / eps - rhs2)
        return max(np.abs(g1).max(), np.abs(g2).max()), g1, g2

    def jacobian(a):
        jac_f = assemble_nonlinear_jacobian(mesh_next, a, pot)
        return sp.bmat([[M, tau * A], [b_matrix - jac_f / eps, M]],
                       format="csc")

    def iterate(damped):
        alpha, beta = (v.copy() for v in guess)
        res, g1, g2 = residual(alpha, beta)
        history = [res]
        ceiling = 1e6 * (res + 1.0)
        for iteration in range(1, cfg.newton_max_iter + 1):
            if res <= cfg.newton_tol:
                return PhaseState(alpha, beta, time=mesh_next.current_time,
                                  step=state.step + 1,
                                  newton_iters=iteration - 1,
                                  residual_history=tuple(history))
            delta = context.solve(jacobian(alpha), -np.concatenate([g1, g2]))
            da, db = delta[: ops.node_count], delta[ops.node_count:]
            if damped:
                lam, accepted = 1.0, None
                for _ in range(12):
                    trial = residual(alpha + lam * da, beta + lam * db)
                    if trial[0] < res or trial[0] <= cfg.newton_tol:
                        accepted = trial
                        break
                    lam *= 0.5
                if accepted is None:
                    return None  # stalled: no descent along the direction
                alpha, beta = alpha + lam * da, beta + lam * db
                res, g1, g2 = accepted
            else:
                alpha, beta = alpha + da, beta + db
                res, g1, g2 = residual(alpha, beta)
                if not np.isfinite(res) or res > ceiling:
                    return None  # undamped iteration left the basin
            history.append(res)
        return None

    result = iterate(damped=False)
    if result is None:
        result = iterate(damped=True)
    if result is None:
        raise NewtonDivergence(
            f"no convergence to {cfg.newton_tol:g} within "
            f"{cfg.newton_max_iter} undamped or damped iterations"
        )
    return result


def step_fully_implicit(mesh_prev, mesh_next, state, cfg, pot,
                        initial_guess=None, context=None, _depth=0):
    """One backward-Euler step with the whole well treated implicitly.

    Newton starts from the previous time level.  For timesteps above the
    uniqueness bound the iteration can fail in the nonconvex residual
    landscape, so the step falls back to better warm starts: first the
    implicit-explicit solution of the same step (its monotone implicit
    part solves reliably), then two recursive half-steps whose endpoint
    approximates the full-step solution to second order in tau.  The
    system Newton finally converges on is the full-tau fully implicit one
    in every case; if no warm start reaches it the divergence is reported.
    """
    _check_state(mesh_prev, state)
    ops_prev = assemble_operators(mesh_prev)
    ops = assemble_operators(mesh_next)
    rhs1 = ops_prev.M @ state.alpha
    rhs2 = np.zeros_like(rhs1)
    b_matrix = (-cfg.eps) * ops.A + (pot.theta / cfg.eps) * ops.M
    try:
        return _newton(ops, rhs1, rhs2, b_matrix, state, cfg, pot, mesh_next,
                       initial_guess=initial_guess, context=context)
    except NewtonDivergence:
        if initial_guess is not None:
            raise
    try:
        warm = step_imex(mesh_prev, mesh_next, state, cfg, pot,
                         context=context)
        return _newton(ops, rhs1, rhs2, b_matrix, state, cfg, pot, mesh_next,
                       initial_guess=(warm.alpha, warm.beta), context=context)
    except NewtonDivergence:
        if _depth >= 8:
            raise
    half_cfg = replace(cfg, tau=0.5 * cfg.tau)
    t_mid = mesh_next.current_time - half_cfg.tau
    mesh_mid = advance_mesh(mesh_prev, t_mid)
    first = step_fully_implicit(mesh_prev, mesh_mid, state, half_cfg, pot,
                                context=context, _depth=_depth + 1)
    second = step_fully_implicit(mesh_mid, mesh_next, first, half_cfg, pot,
                                 context=context, _depth=_depth + 1)
    return _newton(ops, rhs1, rhs2, b_matrix, state, cfg, pot, mesh_next,
                   initial_guess=(second.alpha, second.beta), context=context)


def step_imex(mesh_prev, mesh_next, state, cfg, pot, initial_guess=None,
              context=None):
    """One convex-concave splitting step: convex part implicit, concave
    quadratic explicit at the previous time level."""
    _check_state(mesh_prev, state)
    ops_prev = assemble_operators(mesh_prev)
    ops = assemble_operators(mesh_next)
    m_alpha = ops_prev.M @ state.alpha
    rhs2 = (-pot.theta / cfg.eps) * m_alpha
    b_matrix = (-cfg.eps) * ops.A
    return _newton(ops, m_alpha, rhs2, b_matrix, state, cfg, pot, mesh_next,
                   initial_guess=initial_guess, context=context)


_STEPPERS = {FULLY_IMPLICIT: step_fully_implicit, IMEX: step_imex}


def initial_data_interpolate(mesh, u0):
    """Lagrange interpolant: evaluate u0 at every node.

    ``u0`` may be vectorised over an (N, 3) array of points or accept a
    single point of shape (3,).
    """
    try:
        values = np.asarray(u0(mesh.nodes), dtype=float)
        if values.shape == (mesh.node_count,):
            return values
    except Exception:
        pass
    return np.array([float(u0(x)) for x in mesh.nodes])


def chemical_potential_for(mesh, alpha, cfg, pot):
    """Nodal chemical potential consistent with the order parameter:
    solves M beta = eps A alpha + (1/eps)(F(alpha) - theta M alpha)."""
    ops = assemble_operators(mesh)
    rhs = cfg.eps * (ops.A @ alpha) + (
        assemble_nonlinear_load(mesh, alpha, pot) - pot.theta * (ops.M @ alpha)
    ) / cfg.eps
    method = _linear_method(cfg, mesh.node_count)
    if method != "bicgstab":
        method = "lu"  # the mass matrix factors cheaply at any size we direct-solve
    return solve_sparse(ops.M, rhs, method=method)


def ritz_projection(mesh, z, grad_z, degree=4):
    """Project a smooth function onto P1 through its tangential gradient.

    Solves the stiffness system with right side ``integral grad_z . grad
    phi_j`` (quadrature on the triangulated surface) subject to the mesh
    integral of the result matching the integral of ``z``.  Supplying the
    ambient gradient is fine: hat gradients lie in the element planes, so
    only the tangential part enters.
    """
    ops = assemble_operators(mesh)
    areas, grads = element_geometry(mesh)
    rule = quadrature_rule(degree)
    pts = quadrature_points_3d(mesh, degree)
    gz = np.asarray(grad_z(pts.reshape(-1, 3)), dtype=float).reshape(pts.shape)
    rhs_elem = areas[:, None] * np.einsum("q,tqd,tjd->tj", rule.weights, gz, grads)
    rhs = np.bincount(mesh.triangles.ravel(), weights=rhs_elem.ravel(),
                      minlength=mesh.node_count)
    zvals = np.asarray(z(pts.reshape(-1, 3)), dtype=float).reshape(pts.shape[:2])
    target_integral = float(areas @ (zvals @ rule.weights))

    x = solve_mean_zero_spd(ops.A, rhs, ops.M)
    total_area = np.asarray(ops.M.sum(axis=1)).ravel().sum()
    return x + target_integral / total_area


@dataclass
class SimulationResult:
    """Trajectory of diagnostics plus optional state snapshots."""

    records: list
    final_mesh: object
    final_state: PhaseState
    snapshots: list  # [(mesh, state), ...] at the configured cadence


def _record(mesh, state, cfg, pot, record_hminus1):
    hm1 = None
    if record_hminus1:
        ops = assemble_operators(mesh)
        lumped = np.asarray(ops.M.sum(axis=1)).ravel()
        mean_free = state.alpha - lumped @ state.alpha / lumped.sum()
        hm1 = hminus1_norm(mesh, mean_free)
    return DiagnosticRecord(
        step=state.step,
        time=state.time,
        energy=ginzburg_landau_energy(mesh, state.alpha, pot, cfg.eps),
        mass=float((assemble_operators(mesh).M @ state.alpha).sum()),
        area=surface_area(mesh),
        h=mesh_size_h(mesh),
        newton_iters=state.newton_iters,
        hminus1=hm1,
    )


def run_simulation(cfg, mesh, alpha0, pot, *, snapshot_every=0,
                   record_hminus1=False):
    """March the configured scheme from the mesh's current time to t_end.

    Advances the mesh with the surface's exact node motion before every
    step, records energy/mass/area diagnostics per step, and keeps
    ``(mesh, state)`` snapshots every ``snapshot_every`` steps when that
    cadence is positive.
    """
    cfg.validate()
    n_steps = cfg.step_count()
    alpha0 = np.asarray(alpha0, dtype=float)
    if alpha0.shape != (mesh.node_count,):
        raise LengthMismatch(
            f"initial data of length {alpha0.shape} on a mesh with "
            f"{mesh.node_count} nodes"
        )
    if cfg.scheme == FULLY_IMPLICIT and cfg.tau >= cfg.uniqueness_bound(pot):
        warnings.warn(
            f"tau = {cfg.tau:g} >= 4 eps^3/theta^2 = "
            f"{cfg.uniqueness_bound(pot):g}: the fully implicit step may "
            "admit multiple solutions",
            RuntimeWarning,
            stacklevel=2,
        )

    stepper = _STEPPERS[cfg.scheme]
    context = LinearContext(_linear_method(cfg, mesh.node_count))
    t0 = mesh.current_time
    state = PhaseState(alpha0, chemical_potential_for(mesh, alpha0, cfg, pot),
                       time=t0, step=0)
    records = [_record(mesh, state, cfg, pot, record_hminus1)]
    snapshots = [(mesh, state)] if snapshot_every > 0 else []

    for n in range(1, n_steps + 1):
        mesh_next = advance_mesh(mesh, t0 + n * cfg.tau)
        try:
            state = stepper(mesh, mesh_next, state, cfg, pot, context=context)
        except Exception as exc:
            exc.args = (f"step {n} (t={t0 + n * cfg.tau:g}): {exc}",)
            raise
        mesh = mesh_next
        records.append(_record(mesh, state, cfg, pot, record_hminus1))
        if snapshot_every > 0 and n % snapshot_every == 0:
            snapshots.append((mesh, state))

    return SimulationResult(records=records, final_mesh=mesh,
                            final_state=state, snapshots=snapshots)
