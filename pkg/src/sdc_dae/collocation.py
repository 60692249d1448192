"""Collocation schemes on right-Radau nodes and the preconditioner family.

A scheme bundles the nodes tau_1 < ... < tau_M in (t0, t1], the spectral
integration matrix Q (row m integrates the Lagrange basis over [t0, tau_m])
and the end-point weights b. Preconditioner matrices are built from a scheme
by ``make_qdelta``.
"""

from __future__ import annotations

import functools
import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre
from scipy.optimize import minimize

from .linalg import spectral_radius, unpivoted_lu

QDELTA_KINDS = ("IE", "EE", "Picard", "LU", "MIN-SR-S", "MIN-SR-NS")


@dataclass(frozen=True)
class CollocationScheme:
    M: int
    t0: float
    t1: float
    nodes: np.ndarray       # shape (M,), strictly increasing, nodes[-1] == t1
    substeps: np.ndarray    # shape (M,), substeps[0] = nodes[0] - t0
    Q: np.ndarray           # shape (M, M)
    b: np.ndarray           # shape (M,)
    family: str = "radau-right"

    @property
    def dt(self) -> float:
        return self.t1 - self.t0


@dataclass(frozen=True)
class QDeltaMatrix:
    kind: str
    matrix: np.ndarray  # (M, M), lower triangular
    coefficients_source: str = "analytic"  # analytic | optimized | optimized-unconverged | loaded-from-file

    @property
    def diagonal_flag(self) -> bool:
        off = self.matrix - np.diag(np.diag(self.matrix))
        return bool(np.all(off == 0.0))


def _radau_right_unit_nodes(M: int) -> np.ndarray:
    """Right-Radau points on (0, 1], i.e. roots of P_M - P_{M-1} mapped from [-1, 1].

    Roots come from the companion matrix of the Legendre-basis polynomial and
    are polished by Newton iteration on the defining condition.
    """
    if M == 1:
        return np.array([1.0])
    coeffs = np.zeros(M + 1)
    coeffs[M] = 1.0
    coeffs[M - 1] = -1.0  # P_M(x) - P_{M-1}(x) in the Legendre basis
    roots = legendre.legroots(coeffs)
    roots = np.sort(np.real(roots))
    deriv = legendre.legder(coeffs)
    for _ in range(100):
        f = legendre.legval(roots, coeffs)
        df = legendre.legval(roots, deriv)
        step = f / df
        roots = roots - step
        if np.max(np.abs(step)) < 1e-15:
            break
    return (roots + 1.0) / 2.0


def make_radau_nodes(M: int, t0: float, t1: float) -> CollocationScheme:
    """Build the full scheme (nodes, Q, b) on M right-Radau points over (t0, t1]."""
    if M < 1:
        raise ValueError("node count M must be >= 1")
    if t1 < t0:
        raise ValueError("interval must satisfy t1 >= t0")
    if t1 == t0:
        # degenerate zero-width step: all nodes coincide, integration is void
        z = np.zeros(M)
        return CollocationScheme(M=M, t0=float(t0), t1=float(t0),
                                 nodes=np.full(M, float(t0)), substeps=z,
                                 Q=np.zeros((M, M)), b=z)
    unit = _radau_right_unit_nodes(M)
    nodes = t0 + (t1 - t0) * unit
    nodes[-1] = t1  # affine map is exact at the right endpoint
    substeps = np.diff(nodes, prepend=t0)
    Q = make_Q(nodes, t0)
    b = _integrate_lagrange(nodes, t0, t1)
    return CollocationScheme(M=M, t0=float(t0), t1=float(t1), nodes=nodes,
                             substeps=substeps, Q=Q, b=b)


def _gauss_rule(npts: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(npts)


def _lagrange_values(nodes: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Values of every Lagrange basis polynomial at pts; shape (len(pts), M)."""
    M = nodes.size
    vals = np.ones((pts.size, M))
    for j in range(M):
        for i in range(M):
            if i != j:
                vals[:, j] *= (pts - nodes[i]) / (nodes[j] - nodes[i])
    return vals


def _integrate_lagrange(nodes: np.ndarray, a: float, b: float) -> np.ndarray:
    """Integrals of each Lagrange basis polynomial over [a, b], exact for the degree."""
    M = nodes.size
    x, w = _gauss_rule(M)  # exact through degree 2M-1 >= M-1
    pts = 0.5 * (b - a) * x + 0.5 * (a + b)
    vals = _lagrange_values(nodes, pts)
    return 0.5 * (b - a) * (w @ vals)


def make_Q(nodes: np.ndarray, t0: float) -> np.ndarray:
    """Spectral integration matrix: row m integrates the basis over [t0, tau_m]."""
    nodes = np.asarray(nodes, dtype=float)
    M = nodes.size
    if np.unique(nodes).size != M:
        raise ValueError("collocation nodes must be distinct")
    Q = np.empty((M, M))
    for m in range(M):
        Q[m, :] = _integrate_lagrange(nodes, t0, nodes[m])
    return Q


def collocation_update(scheme: CollocationScheme, u0: np.ndarray, f_values: np.ndarray) -> np.ndarray:
    """End-point update u0 + sum_j b_j f_j (needed when tau_M != t1)."""
    u0 = np.asarray(u0, dtype=float)
    f_values = np.asarray(f_values, dtype=float)
    if f_values.shape[0] != scheme.M or f_values.shape[1:] != u0.shape:
        raise ValueError("f_values must have shape (M,) + u0.shape")
    return u0 + np.tensordot(scheme.b, f_values, axes=1)


def _ie_matrix(substeps: np.ndarray) -> np.ndarray:
    M = substeps.size
    mat = np.zeros((M, M))
    for m in range(M):
        mat[m, : m + 1] = substeps[: m + 1]
    return mat


def _ee_matrix(substeps: np.ndarray) -> np.ndarray:
    M = substeps.size
    mat = np.zeros((M, M))
    for m in range(1, M):
        mat[m, :m] = substeps[1: m + 1]
    return mat


def _minsr_objective(kind: str, Q: np.ndarray):
    M = Q.shape[0]
    if kind == "MIN-SR-S":
        def objective(d):
            return spectral_radius(np.eye(M) - Q / d[:, None])
    else:  # MIN-SR-NS
        def objective(d):
            return spectral_radius(Q - np.diag(d))
    return objective


@functools.lru_cache(maxsize=None)
def _minsr_unit_coefficients(kind: str, M: int, seed: int) -> tuple[tuple[float, ...], str]:
    """Positive diagonal minimizing the relevant spectral-radius objective on [0, 1].

    Deterministic multi-start simplex search: the analytic candidate tau_m / m,
    the diagonal of the LU preconditioner, the diagonal of Q, and seeded random
    log-uniform starts. Coefficients for an arbitrary interval follow by the
    linear scaling of the quadrature weights.
    """
    scheme = make_radau_nodes(M, 0.0, 1.0)
    Q = scheme.Q
    objective = _minsr_objective(kind, Q)

    starts = [scheme.nodes / np.arange(1, M + 1)]
    _, U = unpivoted_lu(Q.T)
    starts.append(np.abs(np.diag(U)))
    starts.append(np.maximum(np.diag(Q), 1e-3))
    starts.append(np.full(M, 1.0 / M))
    rng = np.random.default_rng(seed)
    while len(starts) < 32:
        starts.append(np.exp(rng.uniform(np.log(1e-3), np.log(2.0), size=M)))

    best_d, best_val = None, np.inf
    for d0 in starts:
        p0 = np.log(d0)
        res = minimize(lambda p: objective(np.exp(p)), p0, method="Nelder-Mead",
                       options={"fatol": 1e-12, "xatol": 1e-12, "maxiter": 400 * M, "maxfev": 400 * M})
        val = objective(np.exp(res.x))
        if val < best_val:
            best_val, best_d = val, np.exp(res.x)

    source = "optimized"
    # a start is only replaced if the optimizer genuinely improves on it
    analytic = starts[0]
    if objective(analytic) <= best_val:
        best_d, best_val = analytic, objective(analytic)
        source = "analytic"
    if not np.isfinite(best_val):
        warnings.warn(f"{kind} optimization did not converge for M={M}; using best found")
        source = "optimized-unconverged"
    return tuple(float(v) for v in best_d), source


def load_coefficients_file(path: str, kind: str, M: int) -> np.ndarray:
    """Read a diagonal-coefficients sidecar: {"M", "family", "kind", "diagonal"}."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if data.get("M") != M:
        raise ValueError(f"coefficients file is for M={data.get('M')}, expected M={M}")
    if data.get("kind") != kind:
        raise ValueError(f"coefficients file is for kind={data.get('kind')!r}, expected {kind!r}")
    if data.get("family", "radau-right") != "radau-right":
        raise ValueError("coefficients file must use the radau-right family")
    diag = np.asarray(data["diagonal"], dtype=float)
    if diag.shape != (M,) or np.any(diag <= 0):
        raise ValueError("diagonal must hold M positive values")
    return diag


def make_qdelta(kind: str, scheme: CollocationScheme, *, seed: int = 0,
                coefficients_file: str | None = None) -> QDeltaMatrix:
    """Build the preconditioner matrix of the requested kind for a scheme."""
    if kind not in QDELTA_KINDS:
        raise ValueError(f"unknown preconditioner kind {kind!r}; valid: {', '.join(QDELTA_KINDS)}")
    M = scheme.M
    if scheme.dt == 0.0:
        return QDeltaMatrix(kind, np.zeros((M, M)))
    if kind == "IE":
        return QDeltaMatrix(kind, _ie_matrix(scheme.substeps))
    if kind == "EE":
        return QDeltaMatrix(kind, _ee_matrix(scheme.substeps))
    if kind == "Picard":
        return QDeltaMatrix(kind, np.zeros((M, M)))
    if kind == "LU":
        _, U = unpivoted_lu(scheme.Q.T)
        return QDeltaMatrix(kind, U.T)
    if coefficients_file is not None:
        diag = load_coefficients_file(coefficients_file, kind, M)
        return QDeltaMatrix(kind, np.diag(diag * scheme.dt), coefficients_source="loaded-from-file")
    coeffs, source = _minsr_unit_coefficients(kind, M, seed)
    return QDeltaMatrix(kind, np.diag(np.asarray(coeffs) * scheme.dt), coefficients_source=source)
