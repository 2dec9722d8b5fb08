"""Dense discretization of the linearized generator in the higher-energy norm.

The state (u1, u2) is represented by regular factors u1 = r^3 w1, u2 = r w2,
which encodes the behavior required at r = 0. The image of the generator keeps
w1, w2 even in r, so both are stored as polynomials in y = r^2 on Radau-type
nodes in (0, 1]. With d/dr = 2r d/dy the free part becomes

    w1 -> -2 w1 - 2y w1' + 2 w2',        w2 -> 3 w1 + 2y w1' - w2 - 2y w2',

and the potential term -V1(r) int_0^r s u2(s) ds acts on w2 through
(K w2)(y) = int_0^1 s^2 w2(s^2 y) ds. The Gram matrix reproduces
||u||^2 = int |u1'|^2 / r^2 + int |u2'|^2 exactly for the polynomial factors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from numpy.polynomial import chebyshev as C
from numpy.polynomial import legendre
from scipy.integrate import quad

from . import defaults as D
from .errors import ConditioningError, ConfigError, ContourError, DomainError
from .potentials import gauge_vector_factors, h0, obstruction_inhomogeneity


# -- grid ---------------------------------------------------------------------


def _bary_weights(x):
    d = 4.0 * (x[:, None] - x[None, :])
    np.fill_diagonal(d, 1.0)
    sign = np.prod(np.sign(d), axis=1)
    logs = np.sum(np.log(np.abs(d)), axis=1)
    return sign * np.exp(-(logs - logs.max()))


def _gauss(m, a=0.0, b=1.0):
    s, w = legendre.leggauss(m)
    return a + (b - a) * (s + 1) / 2, w * (b - a) / 2


@dataclass(frozen=True)
class GridDiscretization:
    """Polynomial collocation in y = r^2 on n nodes y_j = (1 + cos(2 pi j/(2n - 1)))/2."""

    n: int
    nodes: np.ndarray
    weights: np.ndarray = field(repr=False)
    diff_matrix: np.ndarray = field(repr=False)
    int_matrix: np.ndarray = field(repr=False)
    quad_weights: np.ndarray = field(repr=False)

    @property
    def rho(self):
        return np.sqrt(self.nodes)

    def interp_matrix(self, t):
        """Matrix mapping nodal values to values of the interpolant at points t."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        d = t[:, None] - self.nodes[None, :]
        exact = d == 0
        d[exact] = 1.0
        c = self.weights[None, :] / d
        E = c / c.sum(axis=1, keepdims=True)
        rows, cols = np.nonzero(exact)
        E[rows] = 0.0
        E[rows, cols] = 1.0
        return E


def build_grid(n: int) -> GridDiscretization:
    if not (D.GRID_MIN <= n <= D.GRID_MAX):
        raise ConfigError(f"n must lie in [{D.GRID_MIN}, {D.GRID_MAX}]")
    j = np.arange(n)
    y = (1.0 + np.cos(2.0 * np.pi * j / (2 * n - 1))) / 2.0
    w = _bary_weights(y)
    d = y[:, None] - y[None, :]
    np.fill_diagonal(d, 1.0)
    Dm = (w[None, :] / w[:, None]) / d
    np.fill_diagonal(Dm, 0.0)
    np.fill_diagonal(Dm, -Dm.sum(axis=1))
    grid = GridDiscretization(n, y, w, Dm, np.empty((0, 0)), np.empty(0))
    s, ws = _gauss(n // 2 + 2)
    E = grid.interp_matrix((y[:, None] * s[None, :]).ravel()).reshape(n, len(s), n)
    Imat = y[:, None] * np.einsum("q,iqj->ij", ws, E)
    return GridDiscretization(n, y, w, Dm, Imat, Imat[0].copy())


# -- operator matrices ---------------------------------------------------------


@dataclass
class OperatorMatrices:
    L0: np.ndarray
    Lprime: np.ndarray
    L: np.ndarray
    gram: np.ndarray
    n: int
    grid: GridDiscretization = field(repr=False)
    K: np.ndarray = field(repr=False)
    chol: np.ndarray = field(repr=False)
    behavioral_factors: dict = field(
        default_factory=lambda: {"u1": "rho^3 * w1(rho^2)", "u2": "rho * w2(rho^2)"}
    )

    def to_g(self, A):
        """A in Cholesky coordinates, where the G-norm is the Euclidean norm."""
        return self.chol @ A @ sla.solve_triangular(self.chol, np.eye(2 * self.n))

    def norm(self, x):
        """G-norm of one state vector or of each column of a stack."""
        return np.linalg.norm(self.chol @ x, axis=0)

    def inner(self, x, z):
        return np.vdot(self.chol @ z, self.chol @ x)

    def op_norm(self, A):
        return float(np.linalg.norm(self.to_g(A), 2))


def _k_matrix(grid):
    s, ws = _gauss(grid.n + 2)
    n = grid.n
    E = grid.interp_matrix((grid.nodes[:, None] * s[None, :] ** 2).ravel()).reshape(n, len(s), n)
    return np.einsum("q,iqj->ij", ws * s**2, E)


def _gram(grid):
    n = grid.n
    r, wr = _gauss(2 * n + 2)
    Eq = grid.interp_matrix(r * r)
    YD = grid.nodes[:, None] * grid.diff_matrix
    I = np.eye(n)
    B1 = r[:, None] * (Eq @ (3 * I + 2 * YD))
    B2 = Eq @ (I + 2 * YD)
    G = np.zeros((2 * n, 2 * n))
    G[:n, :n] = B1.T @ (wr[:, None] * B1)
    G[n:, n:] = B2.T @ (wr[:, None] * B2)
    return 0.5 * (G + G.T)


def build_operators(grid: GridDiscretization) -> OperatorMatrices:
    n = grid.n
    y = grid.nodes
    I = np.eye(n)
    Dm = grid.diff_matrix
    YD = y[:, None] * Dm
    K = _k_matrix(grid)
    L0 = np.block([[-2 * I - 2 * YD, 2 * Dm], [3 * I + 2 * YD, -I - 2 * YD]])
    V1 = -16.0 / (1.0 + y) ** 2
    Lp = np.zeros_like(L0)
    Lp[:n, n:] = -V1[:, None] * K
    G = _gram(grid)
    mineig = np.linalg.eigvalsh(G)[0]
    if mineig < D.GRAM_MIN_EIG:
        raise ConditioningError(f"Gram matrix min eigenvalue {mineig:.2e} below {D.GRAM_MIN_EIG:g}")
    R = np.linalg.cholesky(G).T
    return OperatorMatrices(L0, Lp, L0 + Lp, G, n, grid, K, R)


def gauge_mode(ops: OperatorMatrices):
    """Vector gauge eigenfunction in factored nodal form."""
    w1, w2 = gauge_vector_factors(ops.grid.rho)
    return np.r_[w1, w2].astype(float)


def from_physical(grid: GridDiscretization, u1, u2):
    """Factored unknowns from callables u1(rho), u2(rho) sampled at the nodes."""
    r = grid.rho
    return np.r_[u1(r) / r**3, u2(r) / r]


def random_admissible(grid: GridDiscretization, rng, n_coef=16, decay=0.6):
    """Random smooth state: Chebyshev series in 2y - 1 with geometrically decaying coefficients."""
    t = 2 * grid.nodes - 1
    scale = decay ** np.arange(n_coef)
    a = C.chebval(t, rng.standard_normal(n_coef) * scale)
    b = C.chebval(t, rng.standard_normal(n_coef) * scale)
    return np.r_[a, b]


# -- spectrum ------------------------------------------------------------------


@dataclass
class SpectralDecomposition:
    eigenvalues: np.ndarray
    right_eigenvectors: np.ndarray = field(repr=False)
    residuals: np.ndarray
    reliable: np.ndarray
    drift: np.ndarray
    n: int

    def reliable_eigenvalues(self):
        return self.eigenvalues[self.reliable]


def _eig(ops):
    # solving in Cholesky coordinates keeps the backward error small in the G-norm
    lam, X = sla.eig(ops.to_g(ops.L))
    V = sla.solve_triangular(ops.chol, X)
    order = np.lexsort((-lam.imag, -lam.real))
    lam, V = lam[order], V[:, order]
    V = V / ops.norm(V)
    res = ops.norm(ops.L @ V - V * lam) / ops.norm(V)
    return lam, V, res


def spectrum(ops: OperatorMatrices, check_ops: OperatorMatrices | None = None) -> SpectralDecomposition:
    """Eigenvalues of L sorted by real part, with a two-resolution reliability filter.

    ``check_ops`` defaults to the discretization at ceil(3n/2); eigenvalues whose
    nearest counterpart there lies further than RELIABILITY_DRIFT are unreliable.
    """
    if ops.n > D.GRID_MAX:
        raise ConfigError("grid too large for a dense eigensolve")
    lam, V, res = _eig(ops)
    if check_ops is None:
        m = min(-(-3 * ops.n // 2), D.GRID_MAX)
        check_ops = build_operators(build_grid(m))
    other = sla.eigvals(check_ops.L)
    drift = np.min(np.abs(lam[:, None] - other[None, :]), axis=1)
    reliable = (drift <= D.RELIABILITY_DRIFT) & (res <= 1e-8)
    return SpectralDecomposition(lam, V, res, reliable, drift, ops.n)


def scalar_mode(ops: OperatorMatrices, v):
    """Scalar mode u = r^-2 int_0^r s u2(s) ds of an eigenvector, as u = r (K w2)."""
    n = ops.n
    return ops.grid.rho * (ops.K @ v[n:])


def reduction_residual(ops: OperatorMatrices, lam, v):
    """Max-norm defect of u1 = r^2 u2 + (lam - 2) int_0^r s u2 in factored form, relative to w1."""
    n = ops.n
    a, b = v[:n], v[n:]
    defect = a - b - (lam - 2) * (ops.K @ b)
    return float(np.max(np.abs(defect)) / np.max(np.abs(a)))


def scalar_mode_residual(ops: OperatorMatrices, lam, v, rho_max=0.95):
    """Relative residual of the primal mode equation for the scalar mode of v.

    With u = r c(y): u' = c + 2y c_y and u'' = 2r(3 c_y + 2y c_yy). Evaluated
    at nodes with r <= rho_max and normalized by the size of the terms.
    """
    grid = ops.grid
    Dm = grid.diff_matrix
    y = grid.nodes
    r = grid.rho
    c = ops.K @ v[ops.n :]
    cy = Dm @ c
    cyy = Dm @ cy
    u = r * c
    du = c + 2 * y * cy
    d2u = 2 * r * (3 * cy + 2 * y * cyy)
    q = 1 - y
    V = 2 * (1 - 6 * y + y * y) / (1 + y) ** 2
    terms = [-q * d2u, -2 * q / r * du, 2 * lam * r * du, V / y * u, lam * (lam + 1) * u]
    sel = r <= rho_max
    res = np.abs(sum(terms))[sel]
    size = np.max(sum(np.abs(t) for t in terms)[sel])
    return float(np.max(res) / size)


# -- Riesz projection ------------------------------------------------------------


@dataclass
class RieszProjection:
    P: np.ndarray = field(repr=False)
    center: float
    radius: float
    points: int
    idempotency: float
    rank: int
    singular_values: np.ndarray = field(repr=False)


def riesz_projection(
    ops: OperatorMatrices, center=D.RIESZ_CENTER, radius=D.RIESZ_RADIUS, points=D.RIESZ_POINTS
) -> RieszProjection:
    """Trapezoidal contour integral of the resolvent around a circle."""
    lam = sla.eigvals(ops.L)
    gap = np.min(np.abs(np.abs(lam - center) - radius))
    if gap < 1e-3:
        raise ContourError(f"an eigenvalue lies {gap:.1e} from the projection contour")
    N = 2 * ops.n
    theta = 2 * np.pi * np.arange(points) / points
    P = np.zeros((N, N), complex)
    for z in center + radius * np.exp(1j * theta):
        P += (z - center) * np.linalg.solve(z * np.eye(N) - ops.L, np.eye(N))
    P /= points
    if np.max(np.abs(P.imag)) < 1e-10 * np.max(np.abs(P.real)):
        P = P.real
    Pg = ops.to_g(P)
    sv = np.linalg.svd(Pg, compute_uv=False)
    rank = int(np.sum(sv > D.RIESZ_RANK_TOL * sv[0]))
    idem = float(np.linalg.norm(ops.to_g(P @ P - P), 2))
    return RieszProjection(P, center, radius, points, idem, rank, sv)


# -- operator inequalities --------------------------------------------------------


@dataclass
class DissipativityReport:
    trials: int
    violations: int
    worst_margin: float
    tolerance: float


def dissipativity_margin(ops: OperatorMatrices, u):
    """Re<L0 u, u>_G / ||u||_G^2 + 1/2 (nonpositive when the estimate holds)."""
    return float(np.real(ops.inner(ops.L0 @ u, u)) / np.real(ops.inner(u, u)) + 0.5)


def dissipativity_check(ops: OperatorMatrices, trials=1000, seed=0, tol=D.DISSIPATIVITY_TOL):
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    margins = np.array(
        [dissipativity_margin(ops, random_admissible(ops.grid, rng)) for _ in range(trials)]
    )
    worst = float(margins.max())
    return DissipativityReport(trials, int(np.sum(margins > tol)), worst, tol)


def numerical_abscissa(ops: OperatorMatrices, which="L0"):
    """Largest eigenvalue of the G-symmetric part of L0 or L."""
    M = ops.to_g(ops.L0 if which == "L0" else ops.L)
    return float(np.linalg.eigvalsh(0.5 * (M + M.T))[-1])


def resolvent_norm(ops: OperatorMatrices, lam, which="L0"):
    """||(lam - A)^{-1}||_G for A = L0 or L."""
    A = ops.L0 if which == "L0" else ops.L
    M = ops.to_g(complex(lam) * np.eye(2 * ops.n) - A)
    smin = np.linalg.svd(M, compute_uv=False)[-1]
    if smin < 1e-12 * np.linalg.norm(M, 2):
        raise ConditioningError(f"lam = {lam} is numerically in the spectrum of {which}")
    return float(1.0 / smin)


def lprime_norm(ops: OperatorMatrices):
    return ops.op_norm(ops.Lprime)


def sup_bound(ops: OperatorMatrices, u):
    """Max nodal |u1|, |u2| of a factored state (for the embedding inequality)."""
    r = ops.grid.rho
    n = ops.n
    return float(max(np.max(np.abs(r**3 * u[:n])), np.max(np.abs(r * u[n:]))))


def obstruction_integral(epsabs=1e-13, epsrel=1e-13):
    """int_0^1 r^2 h0(r) g(r) dr with g(r) = r(5 + r^2)/(1 + r^2)^2, by adaptive quadrature."""

    def f(r):
        return r * r * h0(r) * obstruction_inhomogeneity(r)

    val, err = quad(f, 0.0, 1.0, epsabs=epsabs, epsrel=epsrel)
    if err > 1e-10:
        raise DomainError(f"quadrature error estimate {err:.1e} too large")
    return val
