"""Time evolution of the linearized first-order system in similarity coordinates.

The semi-discrete system Phi' = L Phi is advanced with classical RK4. For a
linear autonomous system one RK4 step is exactly multiplication by
R(hL) = I + hL + (hL)^2/2 + (hL)^3/6 + (hL)^4/24, so the step matrix is formed
once and sampled output is produced with its powers. All propagation happens in
Cholesky coordinates of the Gram matrix, where the G-norm is Euclidean.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.integrate import quad

from . import defaults as D
from .errors import ConfigError, DomainError, InstabilityError
from .operator import GridDiscretization, OperatorMatrices, RieszProjection, random_admissible
from .potentials import ghat, u_eps, u_eps_d


@dataclass
class StateVector:
    tau: float
    w1: np.ndarray
    w2: np.ndarray

    def __post_init__(self):
        self.w1 = np.asarray(self.w1)
        self.w2 = np.asarray(self.w2)
        if self.w1.shape != self.w2.shape:
            raise ValueError("w1 and w2 must have the same length")
        if not (np.all(np.isfinite(self.w1)) and np.all(np.isfinite(self.w2))):
            raise ValueError("state has non-finite entries")

    @classmethod
    def from_vector(cls, tau, x):
        n = len(x) // 2
        return cls(float(tau), x[:n], x[n:])

    @property
    def vector(self):
        return np.r_[self.w1, self.w2]

    def physical(self, grid: GridDiscretization):
        """(phi1, phi2) = (r^3 w1, r w2) at the nodes."""
        r = grid.rho
        return r**3 * self.w1, r * self.w2


@dataclass(frozen=True)
class EvolutionConfig:
    t_final: float
    dt: float | None = None
    cfl: float = D.CFL
    sample_interval: float = 0.01
    integrator: str = "rk4"

    def __post_init__(self):
        if self.t_final <= 0:
            raise ConfigError("t_final must be positive")
        if self.integrator != "rk4":
            raise ConfigError("only the classical RK4 integrator is available")
        if self.cfl <= 0 or self.sample_interval <= 0:
            raise ConfigError("cfl and sample_interval must be positive")

    def max_dt(self, grid: GridDiscretization):
        """cfl * (min node spacing in r) / 2; characteristic speeds r -/+ 1 are at most 2."""
        return self.cfl * np.min(np.abs(np.diff(np.sort(grid.rho)))) / 2.0

    def schedule(self, grid: GridDiscretization):
        """(dt, steps per sample, number of samples) with dt <= the CFL limit."""
        limit = self.max_dt(grid)
        dt = limit if self.dt is None else float(self.dt)
        if dt > limit * (1 + 1e-12):
            raise ConfigError(f"dt = {dt:.3e} violates the CFL limit {limit:.3e}")
        per = max(1, int(np.ceil(self.sample_interval / dt)))
        samples = max(1, int(np.ceil(self.t_final / (per * dt))))
        return self.t_final / (per * samples), per, samples


@dataclass
class Trajectory:
    tau: np.ndarray
    states: np.ndarray = field(repr=False)
    norms: np.ndarray
    dt: float
    generator: str

    def state(self, k) -> StateVector:
        return StateVector.from_vector(self.tau[k], self.states[k])

    def at(self, tau) -> StateVector:
        k = int(np.argmin(np.abs(self.tau - tau)))
        if abs(self.tau[k] - tau) > 1e-9:
            raise DomainError(f"tau = {tau} is not a sample of the trajectory")
        return self.state(k)

    def to_csv(self, path, projected_norm=None, pointwise_error=None):
        cols = {"tau": self.tau, "norm": self.norms}
        if projected_norm is not None:
            cols["projected_norm"] = projected_norm
        if pointwise_error is not None:
            cols["pointwise_error"] = pointwise_error
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            w.writerows(zip(*cols.values()))


def rk4_step_matrix(A, h):
    """Amplification matrix of one classical RK4 step for y' = A y."""
    I = np.eye(A.shape[0])
    hA = h * A
    return I + hA @ (I + hA @ (I + hA @ (I + hA / 4) / 3) / 2)


def evolve(state: StateVector, ops: OperatorMatrices, cfg: EvolutionConfig, generator="L"):
    """RK4 trajectory of the discrete generator (``"L"`` or the free part ``"L0"``)."""
    A = {"L": ops.L, "L0": ops.L0}[generator]
    dt, per, samples = cfg.schedule(ops.grid)
    R = ops.chol
    M = R @ sla.solve_triangular(R, A.T, trans="T").T  # R A R^{-1}
    S = np.linalg.matrix_power(rk4_step_matrix(M, dt), per)
    x = R @ state.vector.astype(complex)
    taus = state.tau + dt * per * np.arange(samples + 1)
    xs = np.empty((samples + 1, len(x)), complex)
    xs[0] = x
    n0 = np.linalg.norm(x)
    for k in range(1, samples + 1):
        xs[k] = S @ xs[k - 1]
        growth = np.linalg.norm(xs[k]) / n0 if n0 > 0 else 0.0
        elapsed = taus[k] - state.tau
        if not np.isfinite(growth) or growth > np.exp(D.INSTABILITY_EXPONENT * elapsed):
            raise InstabilityError(
                f"norm grew by {growth:.3e} after tau = {elapsed:.3f}", tau=taus[k], growth=growth
            )
    norms = np.linalg.norm(xs, axis=1)
    states = sla.solve_triangular(R, xs.T).T
    if np.isrealobj(state.vector) and np.max(np.abs(states.imag)) == 0:
        states = states.real
    return Trajectory(taus, states, norms, dt, generator)


def project_out_gauge(state: StateVector, riesz: RieszProjection) -> StateVector:
    x = state.vector
    if riesz.P.shape[0] != len(x):
        raise DomainError("projection and state live on different grids")
    return StateVector.from_vector(state.tau, x - riesz.P @ x)


# -- rate fits -------------------------------------------------------------------


@dataclass
class GrowthFit:
    rate: float
    window: tuple
    residual: float


def fit_rate(tau, norms, window=D.RATE_WINDOW) -> GrowthFit:
    """Least-squares slope of log ||Phi(tau)|| over the window."""
    t0, t1 = window
    if t1 - t0 < 2:
        raise DomainError("rate window must be at least 2 long")
    tau = np.asarray(tau, float)
    norms = np.asarray(norms, float)
    sel = (tau >= t0 - 1e-12) & (tau <= t1 + 1e-12)
    if sel.sum() < 3 or tau[sel][0] > t0 + 1e-6 or tau[sel][-1] < t1 - 1e-6:
        raise DomainError("window is not covered by the trajectory")
    if np.any(norms[sel] <= 0):
        raise DomainError("norms must be positive in the fit window")
    logn = np.log(norms[sel])
    coef, res, *_ = np.polyfit(tau[sel], logn, 1, full=True)
    rms = float(np.sqrt(res[0] / sel.sum())) if len(res) else 0.0
    return GrowthFit(float(coef[0]), (t0, t1), rms)


# -- initial data ------------------------------------------------------------------


def psi_T(r, T=D.BLOWUP_TIME):
    """Blow-up solution 2 arctan(r/T) at t = 0 and its r- and t-derivatives."""
    r = np.asarray(r, float)
    return 2 * np.arctan(r / T), 2 * T / (T * T + r * r), 2 * r / (T * T + r * r)


def initial_data(f, df, g, grid: GridDiscretization, T=D.BLOWUP_TIME, tol=1e-12) -> StateVector:
    """Similarity-coordinate data (phi1, phi2) at tau = -log T for Cauchy data (f, g).

    phi1 = T r^2 [g(Tr) - psi_t], phi2 = T r [f'(Tr) - psi_r] + 2 [f(Tr) - psi],
    returned in factored form w1 = phi1/r^3, w2 = phi2/r.
    """
    if abs(f(np.array([0.0]))[0]) > tol or abs(g(np.array([0.0]))[0]) > tol:
        raise DomainError("data must vanish at the origin")
    r = grid.rho
    x = T * r
    p, pr, pt = psi_T(x, T)
    w1 = T * (g(x) - pt) / r
    w2 = T * (df(x) - pr) + 2 * (f(x) - p) / r
    return StateVector(-np.log(T), w1, w2)


def gauge_datum(grid: GridDiscretization, T=D.BLOWUP_TIME, eps=1.0):
    """Data from shifting the blow-up time, linearized: f = psi + eps d_T psi, g likewise."""
    d = lambda r: T * T + r * r

    def f(r):
        return 2 * np.arctan(r / T) - eps * 2 * r / d(r)

    def df(r):
        return 2 * T / d(r) - eps * 2 * (T * T - r * r) / d(r) ** 2

    def g(r):
        return 2 * r / d(r) - eps * 4 * r * T / d(r) ** 2

    return initial_data(f, df, g, grid, T)


def random_state(grid: GridDiscretization, rng, decay=0.2, n_coef=16):
    """Smooth random admissible state (factored Chebyshev data with fast coefficient decay)."""
    return StateVector.from_vector(0.0, random_admissible(grid, rng, n_coef=n_coef, decay=decay))


# -- exact free solution ---------------------------------------------------------


def free_exact_state(grid: GridDiscretization, eps, tau, T=D.BLOWUP_TIME, T_exact=1.5):
    """Exact (phi1, phi2) factors of psi_eps = s^a u_eps(r/s), s = T_exact - t, a = -1/2 + eps.

    Similarity coordinates use blow-up time T; with T_exact > T the exact
    solution is smooth on the whole backward light cone of (T, 0).
    """
    if not (0.05 < eps <= 0.5):
        raise DomainError("eps must lie in (0.05, 0.5]")
    a = -0.5 + eps
    rho = grid.rho
    s = T_exact - T + np.exp(-tau)
    sig = np.exp(-tau) * rho / s
    u = u_eps(sig, eps)
    du = u_eps_d(sig, eps)
    w1 = np.exp(-tau) * s ** (a - 1) * (sig * du - a * u) / rho
    w2 = s**a * (2 * u + sig * du) / rho
    return StateVector(float(tau), w1, w2)


@dataclass
class FreeExactReport:
    eps: float
    max_error: float
    tau_span: float
    rho_max: float
    n: int


def validate_free_exact(eps, ops: OperatorMatrices, tau_span=1.0, rho_max=0.9, T_exact=1.5):
    """Free (L0) evolution of the exact solution data against the exact solution, pointwise."""
    grid = ops.grid
    x0 = free_exact_state(grid, eps, 0.0, T_exact=T_exact)
    traj = evolve(x0, ops, EvolutionConfig(tau_span, sample_interval=tau_span), generator="L0")
    num = traj.state(len(traj.tau) - 1)
    ex = free_exact_state(grid, eps, traj.tau[-1], T_exact=T_exact)
    sel = grid.rho <= rho_max
    p_num = num.physical(grid)
    p_ex = ex.physical(grid)
    err = max(np.max(np.abs(p_num[i] - p_ex[i])[sel]) for i in range(2))
    return FreeExactReport(eps, float(err), float(traj.tau[-1]), rho_max, grid.n)


def _loglog_slope(s, vals):
    return float(np.polyfit(np.log(s), np.log(vals), 1)[0])


def local_energy(eps, t, T=D.BLOWUP_TIME):
    """E(t) = 1/2 int_0^{T-t} (r^2 psi_t^2 + r^2 psi_r^2 + 2 psi^2) dr for psi_eps."""
    a = -0.5 + eps
    s = T - t

    def integrand(r):
        sig = r / s
        u = u_eps(sig, eps)
        du = u_eps_d(sig, eps)
        pt = s ** (a - 1) * (sig * du - a * u)
        pr = s ** (a - 1) * du
        p = s**a * u
        return 0.5 * (r * r * (pt * pt + pr * pr) + 2 * p * p)

    return quad(integrand, 0.0, s, limit=200)[0]


def local_energy_scaling(eps, T=D.BLOWUP_TIME, s_values=None):
    """Fitted exponent gamma in E(t) ~ (T - t)^gamma for psi_eps."""
    if not (0.05 < eps <= 0.5):
        raise DomainError("eps must lie in (0.05, 0.5]")
    s = np.geomspace(1e-3, 0.5, 12) if s_values is None else np.asarray(s_values)
    return _loglog_slope(s, [local_energy(eps, T - si, T) for si in s])


def higher_energy_blowup(t, T=D.BLOWUP_TIME):
    """int_0^{T-t} (psihat_t^2 + psihat_r^2) dr, psihat = r psi_r + 2 psi, psi = 2 arctan(r/(T-t))."""
    s = T - t

    def integrand(r):
        q = s * s + r * r
        psi_r, psi_t = 2 * s / q, 2 * r / q
        psi_rr, psi_rt = -4 * r * s / q**2, 2 * (s * s - r * r) / q**2
        hr = 3 * psi_r + r * psi_rr
        ht = r * psi_rt + 2 * psi_t
        return hr * hr + ht * ht

    return quad(integrand, 0.0, s, epsabs=0, epsrel=1e-12)[0]


def higher_energy_profile_integral():
    """int_0^1 (r^2 + 1) ghat(r)^2 dr, the coefficient of (T - t)^-1."""
    return quad(lambda r: (r * r + 1) * ghat(r) ** 2, 0.0, 1.0, epsabs=0, epsrel=1e-12)[0]


def blowup_norm_rate(T=D.BLOWUP_TIME, s_values=None):
    """Fitted exponent of the higher-energy norm of psi^T on the shrinking cone."""
    s = np.geomspace(1e-3, 0.5, 12) if s_values is None else np.asarray(s_values)
    return _loglog_slope(s, [higher_energy_blowup(T - si, T) for si in s])
