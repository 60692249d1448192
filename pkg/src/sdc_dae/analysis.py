"""Linear-case iteration matrices, stiff-limit matrices, and order estimation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .collocation import CollocationScheme, QDeltaMatrix, make_qdelta, make_radau_nodes
from .linalg import Spectrum, eigenvalues, lu_solve
from .problems import SemiExplicitDAE
from .sdc_core import run_step_fixed_sweeps


@dataclass(frozen=True)
class IterationMatrixReport:
    M: int
    dt: float
    qdelta_kind: str
    matrix: np.ndarray
    spectrum: Spectrum
    limit_kind: str  # "full" | "stiff-limit"


@dataclass(frozen=True)
class OrderEstimate:
    variable: str
    k: int
    dt_samples: np.ndarray
    error_samples: np.ndarray
    slope: float
    fit_residual: float


def stiff_limit_matrix(scheme: CollocationScheme, qdelta: QDeltaMatrix) -> IterationMatrixReport:
    """E = I - Qd^{-1} Q, the error propagator of the purely algebraic limit."""
    M = scheme.M
    Qd = qdelta.matrix
    if np.any(np.abs(np.diag(Qd)) == 0.0):
        raise ValueError(f"preconditioner {qdelta.kind!r} is singular; "
                         "the stiff-limit matrix needs an invertible diagonal")
    E = np.eye(M) - np.linalg.solve(Qd, scheme.Q)
    return IterationMatrixReport(M=M, dt=scheme.dt, qdelta_kind=qdelta.kind,
                                 matrix=E, spectrum=eigenvalues(E), limit_kind="stiff-limit")


def iteration_matrix_linear(problem: SemiExplicitDAE, scheme: CollocationScheme,
                            qdelta: QDeltaMatrix) -> IterationMatrixReport:
    """Error-propagation matrix of one constrained sweep for a linear problem.

    One sweep is the affine map u^{k+1} = K u^k + c with

        K = P^{-1} ((Q - Qd) x I) D_f,
        P = Itilde + E_g - (Qd x I) D_f,

    where Itilde keeps only the differential identity rows per node block,
    D_f holds the differential rows of the coefficient matrix and E_g the
    constraint rows (enforced unintegrated at every node).

    The degenerate purely algebraic problem (no differential variables)
    routes to the stiff-limit formula, which is the same object derived the
    other way around.
    """
    if not problem.linear_flag:
        raise ValueError("iteration matrix requires a linear problem")
    if problem.n_d == 0:
        return stiff_limit_matrix(scheme, qdelta)
    M = scheme.M
    n_d, n_a = problem.n_d, problem.n_a
    n = n_d + n_a
    A_f = np.atleast_2d(problem.A_f)
    A_g = np.atleast_2d(problem.A_g) if n_a else np.zeros((0, n))
    Df = np.zeros((n, n))
    Df[:n_d, :] = A_f
    Eg = np.zeros((n, n))
    if n_a:
        Eg[n_d:, :] = A_g
    Itilde_blk = np.diag(np.concatenate([np.ones(n_d), np.zeros(n_a)]))

    P = np.kron(np.eye(M), Itilde_blk + Eg) - np.kron(qdelta.matrix, Df)
    R = np.kron(scheme.Q - qdelta.matrix, Df)
    K = np.linalg.solve(P, R)
    return IterationMatrixReport(M=M, dt=scheme.dt, qdelta_kind=qdelta.kind,
                                 matrix=K, spectrum=eigenvalues(K), limit_kind="full")


def sweep_constant_term(problem, scheme, qdelta, y0, z0) -> np.ndarray:
    """Constant c of the affine sweep map u^{k+1} = K u^k + c (linear problems)."""
    n_d, n_a = problem.n_d, problem.n_a
    n = n_d + n_a
    M = scheme.M
    A_f = np.atleast_2d(problem.A_f)
    Df = np.zeros((n, n))
    Df[:n_d, :] = A_f
    Eg = np.zeros((n, n))
    if n_a:
        Eg[n_d:, :] = np.atleast_2d(problem.A_g)
    Itilde_blk = np.diag(np.concatenate([np.ones(n_d), np.zeros(n_a)]))
    P = np.kron(np.eye(M), Itilde_blk + Eg) - np.kron(qdelta.matrix, Df)
    rhs = np.concatenate([np.concatenate([y0, np.zeros(n_a)])] * M)
    return np.linalg.solve(P, rhs)


def fit_loglog_slope(dts: np.ndarray, errors: np.ndarray, floor: float = 1e-15):
    """Unweighted least squares on log10-log10; floor-noise samples dropped."""
    dts = np.asarray(dts, dtype=float)
    errors = np.asarray(errors, dtype=float)
    mask = errors >= floor
    if mask.sum() < 3:
        raise ValueError("need at least 3 samples above the noise floor for a fit")
    x = np.log10(dts[mask])
    y = np.log10(errors[mask])
    coeffs, res, *_ = np.polyfit(x, y, 1, full=True)
    residual = float(res[0]) if res.size else 0.0
    return float(coeffs[0]), residual, mask


def order_study(problem, variant: str, qdelta_kind: str, M: int,
                dt_list, k_list, *, newton_tol: float = 1e-13,
                variable_groups=None, seed: int = 0) -> list[OrderEstimate]:
    """Single-step error-vs-dt slopes after exactly k sweeps, per variable group.

    variable_groups maps a name to a slice into the concatenated (y, z)
    state; defaults to {"y": differential part, "z": algebraic part}.
    """
    dt_list = sorted(dt_list, reverse=True)
    if variable_groups is None:
        variable_groups = {"y": slice(0, problem.n_d),
                           "z": slice(problem.n_d, problem.n_d + problem.n_a)}
    estimates = []
    errors = {name: {k: [] for k in k_list} for name in variable_groups}
    for dt in dt_list:
        scheme = make_radau_nodes(M, problem.t0, problem.t0 + dt)
        qdelta = make_qdelta(qdelta_kind, scheme, seed=seed)
        exact = problem.exact_solution(problem.t0 + dt)
        if exact is None:
            raise ValueError("order_study needs a problem with an exact solution")
        u_exact = np.concatenate(exact)
        for k in k_list:
            y_nodes, z_nodes = run_step_fixed_sweeps(problem, scheme, qdelta, variant, k,
                                                     newton_tol=newton_tol)
            u = np.concatenate([y_nodes[-1], z_nodes[-1]])
            for name, sel in variable_groups.items():
                errors[name][k].append(float(np.max(np.abs(u[sel] - u_exact[sel]))))
    dts = np.asarray(dt_list)
    for name in variable_groups:
        for k in k_list:
            errs = np.asarray(errors[name][k])
            slope, res, mask = fit_loglog_slope(dts, errs)
            estimates.append(OrderEstimate(variable=name, k=k, dt_samples=dts[mask],
                                           error_samples=errs[mask], slope=slope,
                                           fit_residual=res))
    return estimates
