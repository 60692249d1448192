"""Sweep families, node solvers, convergence control, and the time loop.

Three sweep families are provided:

* constrained ("sdc-c"): spectral integration of the differential equations
  only, with the algebraic constraints enforced exactly at every node in
  every sweep;
* semi-integrating ("si-sdc"): solves for the derivative of the differential
  variables, constraints hold only at convergence;
* fully-integrating ("fi-sdc"): solves for the derivative of the whole state.

A direct collocation solve of the coupled node system is included as the
implicit Runge-Kutta reference.
"""

from __future__ import annotations

import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .collocation import CollocationScheme, QDeltaMatrix, make_qdelta, make_radau_nodes
from .linalg import SingularMatrixError, lu_solve
from .problems import SemiExplicitDAE

VARIANTS = ("sdc-c", "si-sdc", "fi-sdc", "collocation")

NEWTON_MAX_ITER = 50
NEWTON_MAX_HALVINGS = 8


class NodeSolveError(RuntimeError):
    """Newton failed at one node; carries (node index, sweep index, residual)."""

    def __init__(self, node: int, sweep: int, residual: float):
        self.node = node
        self.sweep = sweep
        self.residual = residual
        super().__init__(f"node solve failed at node {node}, sweep {sweep}, "
                         f"residual {residual:.3e}")


class StepFailure(RuntimeError):
    pass


@dataclass
class StepController:
    """Convergence control for one step: increment tolerance, sweep budget,
    and the Newton tolerance policy (fixed, or coupled to the step size)."""

    e_tol: float = 1e-12
    k_max: int = 100
    newton_policy: str = "fixed"  # fixed | coupled
    newton_tol: float = 1e-13
    newton_tol_ref: float = 1.3e-12
    dt_ref: float = 2.6e-3

    def newton_tolerance(self, dt: float) -> float:
        if self.e_tol <= 0:
            raise ValueError("e_tol must be positive")
        if self.newton_policy == "coupled":
            return self.newton_tol_ref * dt / self.dt_ref
        return self.newton_tol


@dataclass
class SweepState:
    """Per-node unknowns of one iteration.

    y_nodes / z_nodes hold state values for the constrained variant; for the
    integrating variants y_nodes holds derivative unknowns (Y or the
    differential part of U) and deriv_z holds the algebraic derivative part
    (fully-integrating only).
    """

    variant: str
    y_nodes: np.ndarray             # (M, n_d)
    z_nodes: np.ndarray             # (M, n_a)
    deriv_z: np.ndarray | None = None  # (M, n_a), fi-sdc only
    k: int = 0

    def copy(self):
        return SweepState(self.variant, self.y_nodes.copy(), self.z_nodes.copy(),
                          None if self.deriv_z is None else self.deriv_z.copy(), self.k)

    def flat(self) -> np.ndarray:
        parts = [self.y_nodes.ravel(), self.z_nodes.ravel()]
        if self.deriv_z is not None:
            parts.append(self.deriv_z.ravel())
        return np.concatenate(parts)


@dataclass
class RunRecord:
    t_end: float
    y: np.ndarray
    z: np.ndarray
    sweeps: int
    converged: bool
    increments: list[float] = field(default_factory=list)
    g_residuals: list[float] = field(default_factory=list)  # max over nodes, per sweep
    errors: list[float] = field(default_factory=list)       # vs exact solution, per sweep
    wallclock_s: float = 0.0
    err_y: float = float("nan")
    err_z: float = float("nan")


def _newton_solve(residual, jacobian, x0, tol, *, node: int, sweep: int, strict: bool = True):
    """Damped Newton: absolute inf-norm test, step halving when the residual grows.

    With strict=False, exhausting the iteration budget warns and returns the
    last iterate instead of raising (the iterate can still improve the step).
    """
    x = np.asarray(x0, dtype=float).copy()
    res = residual(x)
    nrm = np.max(np.abs(res)) if res.size else 0.0
    for _ in range(NEWTON_MAX_ITER):
        if nrm <= tol:
            return x
        if not np.isfinite(nrm):
            raise NodeSolveError(node, sweep, nrm)
        step = lu_solve(jacobian(x), res)
        lam = 1.0
        for _ in range(NEWTON_MAX_HALVINGS + 1):
            x_new = x - lam * step
            res_new = residual(x_new)
            nrm_new = np.max(np.abs(res_new)) if res_new.size else 0.0
            if nrm_new < nrm or lam <= 0.5 ** NEWTON_MAX_HALVINGS:
                break
            lam *= 0.5
        x, res, nrm = x_new, res_new, nrm_new
    if nrm > tol:
        if strict:
            raise NodeSolveError(node, sweep, float(nrm))
        warnings.warn(f"node {node} Newton stopped at residual {nrm:.3e} "
                      f"(tolerance {tol:.3e})", RuntimeWarning, stacklevel=2)
    return x


# --------------------------------------------------------------------------
# constrained sweep
# --------------------------------------------------------------------------

def _sdc_c_node(problem, tau, qmm, rhs_known, f_old_m, y_guess, z_guess, tol, node, sweep,
                strict=True):
    """Solve the coupled (y, z) system at one node of the constrained sweep."""
    n_d, n_a = problem.n_d, problem.n_a

    if qmm == 0.0:
        y = rhs_known
        z = problem.solve_constraint(y, tau, z_guess, tol=tol, strict=strict)
        return y, z

    def residual(x):
        y, z = x[:n_d], x[n_d:]
        r1 = y - qmm * (problem.f(y, z, tau) - f_old_m) - rhs_known
        r2 = np.atleast_1d(problem.g(y, z, tau))
        return np.concatenate([r1, r2])

    def jacobian(x):
        y, z = x[:n_d], x[n_d:]
        J = np.empty((n_d + n_a, n_d + n_a))
        J[:n_d, :n_d] = np.eye(n_d) - qmm * problem.jac_f_y(y, z, tau)
        J[:n_d, n_d:] = -qmm * problem.jac_f_z(y, z, tau)
        J[n_d:, :n_d] = problem.jac_g_y(y, z, tau)
        J[n_d:, n_d:] = problem.jac_g_z(y, z, tau)
        return J

    x = _newton_solve(residual, jacobian, np.concatenate([y_guess, z_guess]),
                      tol, node=node, sweep=sweep, strict=strict)
    return x[:n_d], x[n_d:]


def sweep_sdc_c(problem: SemiExplicitDAE, scheme: CollocationScheme,
                qdelta: QDeltaMatrix, state: SweepState, y0: np.ndarray,
                *, newton_tol: float = 1e-13, executor: ThreadPoolExecutor | None = None,
                strict: bool = True) -> SweepState:
    """One constrained sweep; node systems run concurrently for diagonal preconditioners."""
    if state.variant != "sdc-c":
        raise ValueError("state is not a constrained-sweep state")
    M = scheme.M
    Qd = qdelta.matrix
    f_old = np.array([problem.f(state.y_nodes[m], state.z_nodes[m], scheme.nodes[m])
                      for m in range(M)])
    new = state.copy()
    new.k = state.k + 1

    def base_rhs(m):
        return y0 + scheme.Q[m] @ f_old

    if qdelta.diagonal_flag:
        def solve_node(m):
            rhs = base_rhs(m)
            return _sdc_c_node(problem, scheme.nodes[m], Qd[m, m], rhs, f_old[m],
                               state.y_nodes[m], state.z_nodes[m], newton_tol, m, new.k,
                               strict=strict)
        if executor is not None:
            results = list(executor.map(solve_node, range(M)))
        else:
            results = [solve_node(m) for m in range(M)]
        for m, (y, z) in enumerate(results):
            new.y_nodes[m], new.z_nodes[m] = y, z
    else:
        f_new = f_old.copy()
        for m in range(M):
            rhs = base_rhs(m) + Qd[m, :m] @ (f_new[:m] - f_old[:m])
            y, z = _sdc_c_node(problem, scheme.nodes[m], Qd[m, m], rhs, f_old[m],
                               state.y_nodes[m], state.z_nodes[m], newton_tol, m, new.k,
                               strict=strict)
            new.y_nodes[m], new.z_nodes[m] = y, z
            f_new[m] = problem.f(y, z, scheme.nodes[m])
    return new


# --------------------------------------------------------------------------
# semi-integrating sweep
# --------------------------------------------------------------------------

def _si_node(problem, tau, qmm, y_base, deriv_guess, z_guess, tol, node, sweep, strict=True):
    n_d, n_a = problem.n_d, problem.n_a

    def residual(x):
        Y, z = x[:n_d], x[n_d:]
        y = y_base + qmm * Y
        r1 = Y - problem.f(y, z, tau)
        r2 = np.atleast_1d(problem.g(y, z, tau))
        return np.concatenate([r1, r2])

    def jacobian(x):
        Y, z = x[:n_d], x[n_d:]
        y = y_base + qmm * Y
        J = np.empty((n_d + n_a, n_d + n_a))
        J[:n_d, :n_d] = np.eye(n_d) - qmm * problem.jac_f_y(y, z, tau)
        J[:n_d, n_d:] = -problem.jac_f_z(y, z, tau)
        J[n_d:, :n_d] = qmm * problem.jac_g_y(y, z, tau)
        J[n_d:, n_d:] = problem.jac_g_z(y, z, tau)
        return J

    x = _newton_solve(residual, jacobian, np.concatenate([deriv_guess, z_guess]),
                      tol, node=node, sweep=sweep, strict=strict)
    return x[:n_d], x[n_d:]


def sweep_si_sdc(problem, scheme, qdelta, state: SweepState, y0,
                 *, newton_tol: float = 1e-13, executor=None, strict=True) -> SweepState:
    if state.variant != "si-sdc":
        raise ValueError("state is not a semi-integrating state")
    M = scheme.M
    Qd = qdelta.matrix
    Y_old = state.y_nodes
    new = state.copy()
    new.k = state.k + 1

    if qdelta.diagonal_flag:
        def solve_node(m):
            y_base = y0 + (scheme.Q[m] - Qd[m]) @ Y_old
            return _si_node(problem, scheme.nodes[m], Qd[m, m], y_base,
                            Y_old[m], state.z_nodes[m], newton_tol, m, new.k, strict=strict)
        if executor is not None:
            results = list(executor.map(solve_node, range(M)))
        else:
            results = [solve_node(m) for m in range(M)]
        for m, (Y, z) in enumerate(results):
            new.y_nodes[m], new.z_nodes[m] = Y, z
    else:
        for m in range(M):
            y_base = (y0 + (scheme.Q[m] - Qd[m]) @ Y_old
                      + Qd[m, :m] @ new.y_nodes[:m])
            Y, z = _si_node(problem, scheme.nodes[m], Qd[m, m], y_base,
                            Y_old[m], state.z_nodes[m], newton_tol, m, new.k, strict=strict)
            new.y_nodes[m], new.z_nodes[m] = Y, z
    return new


def recover_si_states(scheme, y0, Y_nodes):
    """y at the nodes from derivative values: y_m = y0 + sum_j q_mj Y_j."""
    return y0[None, :] + scheme.Q @ Y_nodes


# --------------------------------------------------------------------------
# fully-integrating sweep
# --------------------------------------------------------------------------

def _fi_node(problem, tau, qmm, u_base, deriv_guess, tol, node, sweep, strict=True):
    n_d, n_a = problem.n_d, problem.n_a

    def states(U):
        y = u_base[:n_d] + qmm * U[:n_d]
        z = u_base[n_d:] + qmm * U[n_d:]
        return y, z

    def residual(U):
        y, z = states(U)
        r1 = U[:n_d] - problem.f(y, z, tau)
        r2 = -np.atleast_1d(problem.g(y, z, tau))
        return np.concatenate([r1, r2])

    def jacobian(U):
        y, z = states(U)
        J = np.empty((n_d + n_a, n_d + n_a))
        J[:n_d, :n_d] = np.eye(n_d) - qmm * problem.jac_f_y(y, z, tau)
        J[:n_d, n_d:] = -qmm * problem.jac_f_z(y, z, tau)
        J[n_d:, :n_d] = -qmm * problem.jac_g_y(y, z, tau)
        J[n_d:, n_d:] = -qmm * problem.jac_g_z(y, z, tau)
        return J

    return _newton_solve(residual, jacobian, deriv_guess, tol, node=node, sweep=sweep,
                         strict=strict)


def sweep_fi_sdc(problem, scheme, qdelta, state: SweepState, u0,
                 *, newton_tol: float = 1e-13, executor=None, strict=True) -> SweepState:
    if state.variant != "fi-sdc":
        raise ValueError("state is not a fully-integrating state")
    M = scheme.M
    n_d = problem.n_d
    Qd = qdelta.matrix
    U_old = np.hstack([state.y_nodes, state.deriv_z])
    new = state.copy()
    new.k = state.k + 1

    if qdelta.diagonal_flag:
        def solve_node(m):
            u_base = u0 + (scheme.Q[m] - Qd[m]) @ U_old
            return _fi_node(problem, scheme.nodes[m], Qd[m, m], u_base,
                            U_old[m], newton_tol, m, new.k, strict=strict)
        if executor is not None:
            results = list(executor.map(solve_node, range(M)))
        else:
            results = [solve_node(m) for m in range(M)]
        for m, U in enumerate(results):
            new.y_nodes[m], new.deriv_z[m] = U[:n_d], U[n_d:]
    else:
        U_new = U_old.copy()
        for m in range(M):
            u_base = u0 + (scheme.Q[m] - Qd[m]) @ U_old + Qd[m, :m] @ U_new[:m]
            U = _fi_node(problem, scheme.nodes[m], Qd[m, m], u_base,
                         U_old[m], newton_tol, m, new.k, strict=strict)
            U_new[m] = U
            new.y_nodes[m], new.deriv_z[m] = U[:n_d], U[n_d:]
    # recovered states at nodes
    U_all = np.hstack([new.y_nodes, new.deriv_z])
    u_nodes = u0[None, :] + scheme.Q @ U_all
    new.z_nodes = u_nodes[:, n_d:]
    return new


# --------------------------------------------------------------------------
# direct collocation reference
# --------------------------------------------------------------------------

def solve_collocation_direct(problem, scheme, y0, z0, newton_tol=1e-13):
    """Global Newton on the coupled node system; order-(2M-1) reference."""
    M = scheme.M
    n_d, n_a = problem.n_d, problem.n_a
    n = n_d + n_a

    def split(x):
        blocks = x.reshape(M, n)
        return blocks[:, :n_d], blocks[:, n_d:]

    def residual(x):
        Y, Z = split(x)
        fvals = np.array([problem.f(Y[m], Z[m], scheme.nodes[m]) for m in range(M)])
        out = np.empty((M, n))
        for m in range(M):
            out[m, :n_d] = Y[m] - y0 - scheme.Q[m] @ fvals
            out[m, n_d:] = np.atleast_1d(problem.g(Y[m], Z[m], scheme.nodes[m]))
        return out.ravel()

    def jacobian(x):
        Y, Z = split(x)
        J = np.zeros((M * n, M * n))
        for m in range(M):
            rm = slice(m * n, m * n + n_d)
            ra = slice(m * n + n_d, (m + 1) * n)
            for j in range(M):
                cy = slice(j * n, j * n + n_d)
                cz = slice(j * n + n_d, (j + 1) * n)
                J[rm, cy] = -scheme.Q[m, j] * problem.jac_f_y(Y[j], Z[j], scheme.nodes[j])
                J[rm, cz] = -scheme.Q[m, j] * problem.jac_f_z(Y[j], Z[j], scheme.nodes[j])
            J[rm, slice(m * n, m * n + n_d)] += np.eye(n_d)
            J[ra, slice(m * n, m * n + n_d)] = problem.jac_g_y(Y[m], Z[m], scheme.nodes[m])
            J[ra, slice(m * n + n_d, (m + 1) * n)] = problem.jac_g_z(Y[m], Z[m], scheme.nodes[m])
        return J

    x0 = np.tile(np.concatenate([y0, z0]), M)
    try:
        x = _newton_solve(residual, jacobian, x0, newton_tol, node=-1, sweep=0)
    except NodeSolveError as exc:
        raise StepFailure(f"direct collocation solve failed: {exc}") from exc
    Y, Z = split(x)
    return Y, Z


# --------------------------------------------------------------------------
# step orchestration
# --------------------------------------------------------------------------

def provisional_state(problem, scheme, variant, y0, z0, newton_tol=1e-13, strict=True) -> SweepState:
    """Spread the initial condition to all nodes.

    The constrained variant additionally projects z through one constraint
    solve per node so the provisional iterate satisfies g exactly.
    """
    M = scheme.M
    if variant == "sdc-c":
        y_nodes = np.tile(y0, (M, 1))
        z_nodes = np.empty((M, problem.n_a))
        for m in range(M):
            z_nodes[m] = problem.solve_constraint(y0, scheme.nodes[m], z0, tol=newton_tol,
                                                  strict=strict)
        return SweepState("sdc-c", y_nodes, z_nodes)
    f0 = problem.f(y0, z0, scheme.t0)
    if variant == "si-sdc":
        return SweepState("si-sdc", np.tile(f0, (M, 1)), np.tile(z0, (M, 1)))
    if variant == "fi-sdc":
        return SweepState("fi-sdc", np.tile(f0, (M, 1)), np.tile(z0, (M, 1)),
                          deriv_z=np.zeros((M, problem.n_a)))
    raise ValueError(f"unknown sweep variant {variant!r}")


_SWEEPERS = {"sdc-c": sweep_sdc_c, "si-sdc": sweep_si_sdc, "fi-sdc": sweep_fi_sdc}


def node_values(problem, scheme, state: SweepState, y0):
    """(y, z) at all nodes for any variant (recovering states where needed)."""
    if state.variant == "sdc-c":
        return state.y_nodes, state.z_nodes
    if state.variant == "si-sdc":
        return recover_si_states(scheme, y0, state.y_nodes), state.z_nodes
    if state.variant == "fi-sdc":
        raise ValueError("use node_values_fi for fully-integrating states")
    raise ValueError(state.variant)


def node_values_fi(problem, scheme, state: SweepState, y0, z0):
    U = np.hstack([state.y_nodes, state.deriv_z])
    u0 = np.concatenate([y0, z0])
    u_nodes = u0[None, :] + scheme.Q @ U
    return u_nodes[:, :problem.n_d], u_nodes[:, problem.n_d:]


def max_constraint_residual(problem, scheme, y_nodes, z_nodes) -> float:
    vals = [np.max(np.abs(np.atleast_1d(problem.g(y_nodes[m], z_nodes[m], scheme.nodes[m]))))
            for m in range(scheme.M)]
    return float(max(vals))


def residual(problem, scheme, state: SweepState, y0) -> np.ndarray:
    """Per-node inf-norms of the discretized integral-equation residual
    r_m = y0 + sum_j q_mj f_j - y_m (differential rows only)."""
    if state.variant == "sdc-c":
        y_nodes, z_nodes = state.y_nodes, state.z_nodes
    elif state.variant == "si-sdc":
        y_nodes, z_nodes = recover_si_states(scheme, y0, state.y_nodes), state.z_nodes
    else:
        raise ValueError("residual() needs state values; use node_values_fi first for fi-sdc")
    fvals = np.array([problem.f(y_nodes[m], z_nodes[m], scheme.nodes[m])
                      for m in range(scheme.M)])
    r = y0[None, :] + scheme.Q @ fvals - y_nodes
    return np.max(np.abs(r), axis=1)


def run_step(problem, scheme, qdelta, variant, controller: StepController,
             y0, z0, *, threads: int = 1, exact=None) -> RunRecord:
    """Sweep from the spread provisional iterate until the increment criterion.

    Returns the node-M values as the step solution (stiffly accurate nodes).
    A step that exhausts k_max is returned flagged not-converged, never raised.
    """
    y0 = np.asarray(y0, dtype=float)
    z0 = np.asarray(z0, dtype=float)
    dt = scheme.dt
    if dt == 0.0:
        rec = RunRecord(t_end=scheme.t1, y=y0.copy(), z=z0.copy(), sweeps=1,
                        converged=True, increments=[0.0])
        rec.g_residuals.append(float(np.max(np.abs(np.atleast_1d(
            problem.g(y0, z0, scheme.t0)))) if z0.size else 0.0))
        return rec
    newton_tol = controller.newton_tolerance(dt)
    strict = controller.newton_policy != "coupled"
    state = provisional_state(problem, scheme, variant, y0, z0, newton_tol, strict=strict)
    sweep = _SWEEPERS[variant]
    u0 = np.concatenate([y0, z0])

    record = RunRecord(t_end=scheme.t1, y=y0.copy(), z=z0.copy(), sweeps=0, converged=False)
    executor = ThreadPoolExecutor(max_workers=threads) if (threads > 1 and qdelta.diagonal_flag) else None
    start = time.perf_counter()
    try:
        converged = False
        for _ in range(controller.k_max):
            kwargs = {"newton_tol": newton_tol, "executor": executor, "strict": strict}
            if variant == "fi-sdc":
                new_state = sweep(problem, scheme, qdelta, state, u0, **kwargs)
            else:
                new_state = sweep(problem, scheme, qdelta, state, y0, **kwargs)
            inc = float(np.max(np.abs(new_state.flat() - state.flat()))) if new_state.flat().size else 0.0
            record.increments.append(inc)
            if variant == "fi-sdc":
                y_nodes, z_nodes = node_values_fi(problem, scheme, new_state, y0, z0)
            else:
                y_nodes, z_nodes = node_values(problem, scheme, new_state, y0)
            record.g_residuals.append(max_constraint_residual(problem, scheme, y_nodes, z_nodes))
            if exact is not None:
                ye, ze = exact
                err = max(np.max(np.abs(y_nodes[-1] - ye)),
                          np.max(np.abs(z_nodes[-1] - ze)) if ze.size else 0.0)
                record.errors.append(float(err))
            state = new_state
            record.sweeps = state.k
            record.y, record.z = y_nodes[-1].copy(), z_nodes[-1].copy()
            if not np.isfinite(inc):
                break
            if inc < controller.e_tol:
                converged = True
                break
        record.converged = converged
    finally:
        if executor is not None:
            executor.shutdown()
    record.wallclock_s = time.perf_counter() - start
    return record


def run_step_fixed_sweeps(problem, scheme, qdelta, variant, k_sweeps, *,
                          newton_tol=1e-13, y0=None, z0=None):
    """Exactly k sweeps from the provisional iterate (order studies).

    k = 0 returns the provisional values themselves.
    """
    if y0 is None or z0 is None:
        y0, z0 = problem.initial_values()
    y0 = np.asarray(y0, dtype=float)
    z0 = np.asarray(z0, dtype=float)
    state = provisional_state(problem, scheme, variant, y0, z0, newton_tol)
    sweep = _SWEEPERS[variant]
    u0 = np.concatenate([y0, z0])
    for _ in range(k_sweeps):
        if variant == "fi-sdc":
            state = sweep(problem, scheme, qdelta, state, u0, newton_tol=newton_tol)
        else:
            state = sweep(problem, scheme, qdelta, state, y0, newton_tol=newton_tol)
    if variant == "fi-sdc":
        return node_values_fi(problem, scheme, state, y0, z0)
    return node_values(problem, scheme, state, y0)


@dataclass
class IntegrateConfig:
    t_end: float
    dt: float
    M: int
    qdelta_kind: str = "LU"
    variant: str = "sdc-c"
    controller: StepController = field(default_factory=StepController)
    threads: int = 1
    seed: int = 0
    coefficients_file: str | None = None


def default_thread_count() -> int:
    env = os.environ.get("DAE_SDC_THREADS")
    return int(env) if env else 1


def integrate(problem, config: IntegrateConfig) -> list[RunRecord]:
    """Advance [t0, t_end] step by step, rebuilding the scheme per interval."""
    t0 = problem.t0
    if config.t_end < t0:
        raise ValueError("t_end must be >= t0")
    if config.t_end == t0:
        return []
    n_steps_f = (config.t_end - t0) / config.dt
    n_steps = round(n_steps_f)
    if abs(n_steps_f - n_steps) > 1e-12 * max(1.0, n_steps):
        raise ValueError("dt must divide t_end - t0")
    y, z = problem.initial_values()
    records = []
    for i in range(n_steps):
        a = t0 + i * config.dt
        b = t0 + (i + 1) * config.dt
        scheme = make_radau_nodes(config.M, a, b)
        qdelta = make_qdelta(config.qdelta_kind, scheme, seed=config.seed,
                             coefficients_file=config.coefficients_file)
        exact = problem.exact_solution(b)
        if config.variant == "collocation":
            start = time.perf_counter()
            try:
                Y, Z = solve_collocation_direct(problem, scheme, y, z,
                                                config.controller.newton_tolerance(config.dt))
            except StepFailure as exc:
                raise StepFailure(f"step {i}: {exc}") from exc
            rec = RunRecord(t_end=b, y=Y[-1], z=Z[-1], sweeps=1, converged=True,
                            wallclock_s=time.perf_counter() - start)
            rec.g_residuals.append(max_constraint_residual(problem, scheme, Y, Z))
        else:
            rec = run_step(problem, scheme, qdelta, config.variant, config.controller,
                           y, z, threads=config.threads, exact=exact)
            if not np.all(np.isfinite(rec.y)) or not np.all(np.isfinite(rec.z)):
                raise StepFailure(f"step {i} diverged (non-finite state)")
        if exact is not None:
            ye, ze = exact
            rec.err_y = float(np.max(np.abs(rec.y - ye))) if ye.size else 0.0
            rec.err_z = float(np.max(np.abs(rec.z - ze))) if ze.size else 0.0
        records.append(rec)
        y, z = rec.y, rec.z
    return records


def linf_error(records: list[RunRecord]) -> float:
    """Aggregated max error over the time grid (both variable groups)."""
    vals = [max(r.err_y, r.err_z) for r in records if np.isfinite(r.err_y)]
    return max(vals) if vals else float("nan")
