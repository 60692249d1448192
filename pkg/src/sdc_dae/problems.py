"""Semi-explicit index-1 DAE test problems.

Each problem exposes differential right-hand side f(y, z, t), constraint
g(y, z, t), Jacobian blocks (analytic where available, central finite
differences otherwise), consistent initial values, and optionally the exact
solution. Registry names: ``linear``, ``stiff-scalar``, ``reaction-diffusion``.
"""

from __future__ import annotations

import warnings

import numpy as np

from .linalg import lu_solve


def _fd_jacobian(func, x, *args):
    """Central finite differences of func w.r.t. x, step 1e-7 * (1 + ||x||)."""
    x = np.asarray(x, dtype=float)
    h = 1e-7 * (1.0 + np.linalg.norm(x, np.inf) if x.size else 1.0)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((func(x + e, *args) - func(x - e, *args)) / (2 * h))
    if not cols:
        return np.zeros((np.asarray(func(x, *args)).size, 0))
    return np.column_stack(cols)


class SemiExplicitDAE:
    """Base class: y' = f(y, z, t), 0 = g(y, z, t) with J_g^z nonsingular.

    Subclasses override f and g and may override the jac_* methods with
    analytic blocks; the base class falls back to central differences.
    """

    name = "dae"
    n_d: int
    n_a: int
    t0: float = 0.0
    linear_flag = False
    # constant coefficient matrices (rows of f then g against (y, z)) when linear
    A_f: np.ndarray | None = None
    A_g: np.ndarray | None = None

    def f(self, y, z, t):
        raise NotImplementedError

    def g(self, y, z, t):
        raise NotImplementedError

    def initial_values(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def exact_solution(self, t):
        """Return (y, z) at time t, or None when no closed form is known."""
        return None

    # Jacobian blocks ------------------------------------------------------
    def jac_f_y(self, y, z, t):
        return _fd_jacobian(lambda yy: np.atleast_1d(self.f(yy, z, t)), y)

    def jac_f_z(self, y, z, t):
        return _fd_jacobian(lambda zz: np.atleast_1d(self.f(y, zz, t)), z)

    def jac_g_y(self, y, z, t):
        return _fd_jacobian(lambda yy: np.atleast_1d(self.g(yy, z, t)), y)

    def jac_g_z(self, y, z, t):
        return _fd_jacobian(lambda zz: np.atleast_1d(self.g(y, zz, t)), z)

    # implicit-function machinery -----------------------------------------
    def solve_constraint(self, y, t, z_guess, tol=1e-13, max_iter=50, strict=True):
        """Damped Newton solve of g(y, z, t) = 0 for z from z_guess.

        With strict=False a stalled solve warns and returns the best iterate
        instead of raising.
        """
        z = np.asarray(z_guess, dtype=float).copy()
        if z.size == 0:
            return z
        res = np.atleast_1d(self.g(y, z, t))
        for _ in range(max_iter):
            nrm = np.max(np.abs(res))
            if nrm <= tol:
                return z
            step = lu_solve(np.atleast_2d(self.jac_g_z(y, z, t)), res)
            lam = 1.0
            for _ in range(9):
                z_new = z - lam * step
                res_new = np.atleast_1d(self.g(y, z_new, t))
                if np.max(np.abs(res_new)) < nrm or lam <= 1.0 / 256:
                    break
                lam *= 0.5
            z, res = z_new, res_new
        if np.max(np.abs(res)) > tol:
            msg = f"constraint solve stalled at residual {np.max(np.abs(res)):.3e}"
            if strict:
                raise RuntimeError(msg)
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
        return z

    def implicit_map(self, y, t, z_guess, tol=1e-13):
        """z = G(y, t) via the constraint solve."""
        return self.solve_constraint(y, t, z_guess, tol=tol)

    def implicit_map_jacobian(self, y, z, t):
        """J_G = -(J_g^z)^{-1} J_g^y at a consistent point (y, z)."""
        Jgz = np.atleast_2d(self.jac_g_z(y, z, t))
        Jgy = np.atleast_2d(self.jac_g_y(y, z, t))
        out = np.empty((self.n_a, self.n_d))
        for j in range(self.n_d):
            out[:, j] = -lu_solve(Jgz, Jgy[:, j])
        return out


class LinearTestDAE(SemiExplicitDAE):
    """Scalar linear index-1 problem: y' = -2y + z, 0 = -2y - z, y(t) = e^{-4t}."""

    name = "linear"
    n_d = 1
    n_a = 1
    linear_flag = True

    def __init__(self):
        self.A_f = np.array([[-2.0, 1.0]])
        self.A_g = np.array([[-2.0, -1.0]])

    def f(self, y, z, t):
        return -2.0 * y + z

    def g(self, y, z, t):
        return -2.0 * y - z

    def jac_f_y(self, y, z, t):
        return np.array([[-2.0]])

    def jac_f_z(self, y, z, t):
        return np.array([[1.0]])

    def jac_g_y(self, y, z, t):
        return np.array([[-2.0]])

    def jac_g_z(self, y, z, t):
        return np.array([[-1.0]])

    def initial_values(self):
        return np.array([1.0]), np.array([-2.0])

    def exact_solution(self, t):
        return np.array([np.exp(-4.0 * t)]), np.array([-2.0 * np.exp(-4.0 * t)])


class StiffScalar(SemiExplicitDAE):
    """eps * z' = z as an ODE for eps > 0; the eps = 0 limit is purely algebraic.

    The degenerate eps = 0 object carries n_d = 0 and the single constraint
    g = z; it exists so the analysis module can derive the stiff-limit
    iteration matrix from the same code path as the general linear case.
    """

    name = "stiff-scalar"

    def __init__(self, epsilon: float, z0: float = 1.0):
        if epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        self.epsilon = float(epsilon)
        self.z0 = float(z0)
        self.linear_flag = True
        if epsilon > 0:
            self.n_d, self.n_a = 1, 0
            self.A_f = np.array([[1.0 / epsilon]])
            self.A_g = np.zeros((0, 1))
        else:
            self.n_d, self.n_a = 0, 1
            self.A_f = np.zeros((0, 1))
            self.A_g = np.array([[1.0]])

    def f(self, y, z, t):
        if self.epsilon == 0:
            return np.zeros(0)
        return y / self.epsilon

    def g(self, y, z, t):
        if self.epsilon == 0:
            return np.asarray(z, dtype=float)
        return np.zeros(0)

    def jac_f_y(self, y, z, t):
        return np.array([[1.0 / self.epsilon]]) if self.epsilon > 0 else np.zeros((0, 0))

    def jac_f_z(self, y, z, t):
        return np.zeros((self.n_d, self.n_a))

    def jac_g_y(self, y, z, t):
        return np.zeros((self.n_a, self.n_d))

    def jac_g_z(self, y, z, t):
        return np.array([[1.0]]) if self.epsilon == 0 else np.zeros((0, 0))

    def initial_values(self):
        if self.epsilon == 0:
            return np.zeros(0), np.array([0.0])
        return np.array([self.z0]), np.zeros(0)

    def exact_solution(self, t):
        if self.epsilon == 0:
            return np.zeros(0), np.array([0.0])
        return np.array([self.z0 * np.exp(t / self.epsilon)]), np.zeros(0)


def dft(values: np.ndarray) -> np.ndarray:
    """Unitary forward transform (power-of-two length)."""
    values = np.asarray(values)
    n = values.shape[-1]
    if n & (n - 1):
        raise ValueError("transform length must be a power of two")
    return np.fft.fft(values, norm="ortho")


def idft(coefficients: np.ndarray) -> np.ndarray:
    coefficients = np.asarray(coefficients)
    n = coefficients.shape[-1]
    if n & (n - 1):
        raise ValueError("transform length must be a power of two")
    return np.fft.ifft(coefficients, norm="ortho")


class ReactionDiffusionPDAE(SemiExplicitDAE):
    """Periodic 1-D reaction-diffusion system with an elliptic constraint.

    Two concentrations u, v diffuse and are advected by the gradient of a
    third field w tied to them through -u - v - w_xx = 0. Manufactured
    source terms make u = A sin(2 pi x) e^t, v = B sin(2 pi x) e^t,
    w = (A + B)/(4 pi^2) sin(2 pi x) e^t the exact solution (A = B = -1).

    The Laplacian symbol vanishes at wavenumber zero, so the constraint pins
    the mean of w to zero; the mean of u + v must vanish for solvability.
    State is stored in real space; spatial operators act in Fourier space.
    """

    name = "reaction-diffusion"

    def __init__(self, n: int = 256, amp_u: float = -1.0, amp_v: float = -1.0):
        if n < 2 or n & (n - 1):
            raise ValueError("grid size n must be a power of two")
        self.n = n
        self.A = amp_u
        self.B = amp_v
        self.n_d = 2 * n
        self.n_a = n
        self.x = np.arange(n) / n
        kappa = np.fft.fftfreq(n, d=1.0 / n)  # integer wavenumbers
        self.sym_d1 = 2j * np.pi * kappa
        self.sym_d2 = -(2.0 * np.pi * kappa) ** 2
        # dense real-space operators, used only inside Jacobian blocks
        F = np.fft.fft(np.eye(n), axis=0)
        Finv = np.fft.ifft(np.eye(n), axis=0)
        self._D1 = np.real(Finv @ (self.sym_d1[:, None] * F))
        self._D2 = np.real(Finv @ (self.sym_d2[:, None] * F))
        self._mean_op = np.full((n, n), 1.0 / n)

    # spectral helpers -----------------------------------------------------
    def _dx(self, field):
        return np.real(np.fft.ifft(self.sym_d1 * np.fft.fft(field)))

    def _dxx(self, field):
        return np.real(np.fft.ifft(self.sym_d2 * np.fft.fft(field)))

    def _exact_fields(self, t):
        s = np.sin(2.0 * np.pi * self.x) * np.exp(t)
        u = self.A * s
        v = self.B * s
        w = (self.A + self.B) / (4.0 * np.pi ** 2) * s
        return u, v, w

    def _sources(self, t):
        u, v, w = self._exact_fields(t)
        wx = self._dx(w)
        # u_t = u, u_xx = -4 pi^2 u for the single-mode exact solution
        src_u = u + 4.0 * np.pi ** 2 * u - u * wx
        src_v = v + 4.0 * np.pi ** 2 * v + v * wx
        return src_u, src_v

    # problem interface ----------------------------------------------------
    def f(self, y, z, t):
        u, v = y[: self.n], y[self.n:]
        w = z
        wx = self._dx(w)
        src_u, src_v = self._sources(t)
        fu = self._dxx(u) + u * wx + src_u
        fv = self._dxx(v) - v * wx + src_v
        return np.concatenate([fu, fv])

    def g(self, y, z, t):
        u, v = y[: self.n], y[self.n:]
        w = z
        # mode-zero row of -u - v - w_xx is replaced by mean(w) = 0
        base = -u - v - self._dxx(w)
        return base + np.mean(u + v) + np.mean(w)

    def jac_f_y(self, y, z, t):
        wx = self._dx(z)
        n = self.n
        out = np.zeros((2 * n, 2 * n))
        out[:n, :n] = self._D2 + np.diag(wx)
        out[n:, n:] = self._D2 - np.diag(wx)
        return out

    def jac_f_z(self, y, z, t):
        u, v = y[: self.n], y[self.n:]
        return np.vstack([u[:, None] * self._D1, -v[:, None] * self._D1])

    def jac_g_y(self, y, z, t):
        block = -np.eye(self.n) + self._mean_op
        return np.hstack([block, block])

    def jac_g_z(self, y, z, t):
        return -self._D2 + self._mean_op

    def initial_values(self):
        u, v, w = self._exact_fields(0.0)
        return np.concatenate([u, v]), w

    def exact_solution(self, t):
        u, v, w = self._exact_fields(t)
        return np.concatenate([u, v]), w


def linear_test_dae() -> LinearTestDAE:
    return LinearTestDAE()


def stiff_limit_scalar(epsilon: float) -> StiffScalar:
    return StiffScalar(epsilon)


def reaction_diffusion_pdae(n: int = 256) -> ReactionDiffusionPDAE:
    return ReactionDiffusionPDAE(n)


PROBLEM_REGISTRY = {
    "linear": linear_test_dae,
    "stiff-scalar": lambda: stiff_limit_scalar(1.0),
    "reaction-diffusion": reaction_diffusion_pdae,
}


def make_problem(name: str, **kwargs) -> SemiExplicitDAE:
    if name not in PROBLEM_REGISTRY:
        raise ValueError(f"unknown problem {name!r}; valid: {', '.join(sorted(PROBLEM_REGISTRY))}")
    if name == "reaction-diffusion" and "n" in kwargs:
        return reaction_diffusion_pdae(kwargs["n"])
    return PROBLEM_REGISTRY[name]()
