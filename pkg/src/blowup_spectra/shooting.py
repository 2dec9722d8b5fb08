"""Two-sided shooting for the primal and dual mode equations.

Analytic Frobenius branches are seeded near r = 0 and r = 1, integrated to the
match point and compared through their Wronskian. The right branch is scaled by
1/Gamma(lam): its a_0 = 1 normalization has simple poles at lam = 0, -1, -2, ...
(where the exponents at r = 1 differ by a positive integer), and the scaling
keeps the mismatch entire so that winding numbers count eigenvalues only.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy.special import rgamma

from . import defaults as D
from .errors import ConfigError, ContourError, DomainError, ResonanceError
from .frobenius import Equation, expand_analytic, mode_residual, seed_values
from .ode import dopri54, dopri54_dense

log = logging.getLogger(__name__)

Side = Literal["left", "right"]


@dataclass(frozen=True)
class ShootConfig:
    delta0: float = D.SEED_OFFSET
    delta1: float = D.SEED_OFFSET
    match_point: float = D.MATCH_POINT
    series_order: int = D.SERIES_ORDER
    ode_rtol: float = D.ODE_RTOL
    ode_atol: float = D.ODE_ATOL

    def __post_init__(self):
        if not (0 < self.delta0 < self.match_point < 1 - self.delta1 < 1):
            raise ConfigError("need 0 < delta0 < match_point < 1 - delta1 < 1")
        if self.series_order < 5:
            raise ConfigError("series_order must be at least 5")
        if self.ode_rtol <= 0 or self.ode_atol <= 0:
            raise ConfigError("ODE tolerances must be positive")


@dataclass
class EigenCandidate:
    lam: complex
    mismatch: complex
    iterations: int
    converged: bool
    equation: str
    newton_steps: int = 0
    beyond_correspondence: bool = False
    note: str = ""

    def __post_init__(self):
        self.beyond_correspondence = bool(self.lam.real < -0.5)


@dataclass
class RegionScan:
    rect: tuple
    winding: int
    grid: tuple
    candidates: list = field(default_factory=list)
    boundary_samples: int = 0
    min_abs_mismatch: float = float("nan")
    equation: str = "primal"


# -- ODE right-hand side -------------------------------------------------------


def _potential(equation: Equation, r):
    r2 = r * r
    if equation == "primal":
        return 2.0 * (1.0 - 6.0 * r2 + r2 * r2) / (1.0 + r2) ** 2
    return (6.0 - 2.0 * r2) / (1.0 + r2)


def _rhs(equation: Equation, lam):
    lam = np.asarray(lam, dtype=complex)
    lam2 = lam * (lam + 1.0)

    def f(r, y):
        u, du = y
        q = 1.0 - r * r
        c1 = 2.0 * lam * r - 2.0 * q / r
        c0 = _potential(equation, r) / (r * r) + lam2
        return np.stack([du, (c1 * du + c0 * u) / q])

    return f


def _check_resonance(lam):
    lam = np.atleast_1d(lam)
    k = np.round(lam.real)
    near = (k <= 0) & (np.abs(lam - k) < D.RESONANCE_EXCLUSION_RADIUS)
    if np.any(near):
        raise ResonanceError(
            f"lambda within {D.RESONANCE_EXCLUSION_RADIUS:g} of a resonant integer at r = 1"
        )


def _seeds(equation, lams, point, delta, N):
    u = np.empty(len(lams), complex)
    du = np.empty(len(lams), complex)
    for i, lam in enumerate(lams):
        sv = seed_values(expand_analytic(equation, point, lam, N), delta)
        u[i], du[i] = sv.u, sv.du
    return u, du


def integrate_branch(equation: Equation, lam, side: Side, cfg: ShootConfig = ShootConfig()):
    """Analytic branch on the given side, advanced to the match point.

    Accepts a scalar or an array of lam; returns (u, du) of matching shape.
    """
    lams = np.atleast_1d(np.asarray(lam, dtype=complex))
    if side == "left":
        u, du = _seeds(equation, lams, "zero", cfg.delta0, cfg.series_order)
        r0 = cfg.delta0
    elif side == "right":
        _check_resonance(lams)
        u, du = _seeds(equation, lams, "one", cfg.delta1, cfg.series_order)
        g = rgamma(lams)
        u, du = u * g, du * g
        r0 = 1.0 - cfg.delta1
    else:
        raise ValueError(f"unknown side {side!r}")
    y, _ = dopri54(
        _rhs(equation, lams), r0, np.stack([u, du]), cfg.match_point, cfg.ode_rtol, cfg.ode_atol
    )
    if np.ndim(lam) == 0:
        return complex(y[0, 0]), complex(y[1, 0])
    return y[0], y[1]


def _branches(equation, lams, cfg):
    uL, duL = integrate_branch(equation, lams, "left", cfg)
    uR, duR = integrate_branch(equation, lams, "right", cfg)
    raw = uL * duR - duL * uR
    norm = (np.abs(uL) + np.abs(duL)) * (np.abs(uR) + np.abs(duR))
    return raw, raw / norm


def mismatch(equation: Equation, lam, cfg: ShootConfig = ShootConfig()):
    """Magnitude-normalized Wronskian of the two analytic branches at the match point."""
    lams = np.atleast_1d(np.asarray(lam, dtype=complex))
    _, w = _branches(equation, lams, cfg)
    return complex(w[0]) if np.ndim(lam) == 0 else w


def wronskian(equation: Equation, lam, cfg: ShootConfig = ShootConfig()):
    """Unnormalized Wronskian; analytic in lam."""
    lams = np.atleast_1d(np.asarray(lam, dtype=complex))
    raw, _ = _branches(equation, lams, cfg)
    return complex(raw[0]) if np.ndim(lam) == 0 else raw


# -- root finding ------------------------------------------------------------


def _in_window(z, window):
    a, b, c, d = window
    pad = 0.5
    return (z.real >= a - pad) & (z.real <= b + pad) & (z.imag >= c - pad) & (z.imag <= d + pad)


def refine_roots(
    func: Callable,
    seeds,
    *,
    max_iter=D.SECANT_MAX_ITER,
    step_tol=D.SECANT_STEP_TOL,
    residual_tol=D.SECANT_RESIDUAL_TOL,
    window=D.SCAN_WINDOW,
    fd_step=D.NEWTON_FD_STEP,
):
    """Batched complex secant iteration with a Newton fallback.

    ``func(z)`` maps an array of points to (analytic value, normalized value).
    Returns arrays (z, normalized residual, iterations, converged, newton_steps).
    """
    x1 = np.atleast_1d(np.asarray(seeds, dtype=complex)).copy()
    x0 = x1 + D.SECANT_PERTURBATION
    f0, _ = func(x0)
    f1, w1 = func(x1)
    n = len(x1)
    iters = np.zeros(n, int)
    newton = np.zeros(n, int)
    conv = np.zeros(n, bool)
    active = np.ones(n, bool)
    worse = np.zeros(n, int)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        with np.errstate(all="ignore"):
            step = -f1[idx] * (x1[idx] - x0[idx]) / (f1[idx] - f0[idx])
        use_newton = ~np.isfinite(step) | (worse[idx] >= 2)
        if np.any(use_newton):
            jn = idx[use_newton]
            fp, _ = func(x1[jn] + fd_step)
            fm, _ = func(x1[jn] - fd_step)
            deriv = (fp - fm) / (2 * fd_step)
            with np.errstate(all="ignore"):
                step[use_newton] = -f1[jn] / deriv
            newton[jn] += 1
            worse[jn] = 0
        x2 = x1[idx] + step
        ok = np.isfinite(x2) & _in_window(x2, window)
        try:
            f2, w2 = func(np.where(ok, x2, x1[idx]))
        except (ResonanceError, DomainError):
            f2 = np.full(idx.size, np.nan + 0j)
            w2 = f2.copy()
            for k, z in enumerate(np.where(ok, x2, x1[idx])):
                try:
                    a, b = func(np.array([z]))
                    f2[k], w2[k] = a[0], b[0]
                except (ResonanceError, DomainError):
                    ok[k] = False
        iters[idx] += 1
        worse[idx] = np.where(np.abs(f2) >= np.abs(f1[idx]), worse[idx] + 1, 0)
        x0[idx], f0[idx] = x1[idx], f1[idx]
        x1[idx] = np.where(ok, x2, x1[idx])
        f1[idx] = np.where(ok, f2, f1[idx])
        w1[idx] = np.where(ok, w2, w1[idx])
        done = ok & (np.abs(step) <= step_tol) & (np.abs(w2) <= residual_tol)
        conv[idx[done]] = True
        active[idx[done | ~ok]] = False
    return x1, w1, iters, conv, newton


def find_eigenvalues(equation: Equation, seeds, cfg: ShootConfig = ShootConfig(), **kw):
    """Refine a batch of seeds to zeros of the shooting mismatch."""

    def func(z):
        return _branches(equation, z, cfg)

    z, w, it, conv, nw = refine_roots(func, seeds, **kw)
    return [
        EigenCandidate(complex(z[i]), complex(w[i]), int(it[i]), bool(conv[i]), equation, int(nw[i]))
        for i in range(len(z))
    ]


def find_eigenvalue(equation: Equation, seed, cfg: ShootConfig = ShootConfig(), **kw) -> EigenCandidate:
    """Refine a single seed; non-convergence is reported through ``converged``."""
    return find_eigenvalues(equation, [seed], cfg, **kw)[0]


def richardson(values, factor, order=1):
    """Richardson extrapolation of a sequence computed at parameters h, h/factor, ..."""
    v = np.asarray(values, dtype=complex)
    r = factor**order
    while len(v) > 1:
        v = v[1:] + (v[1:] - v[:-1]) / (r - 1)
        r *= factor
    return complex(v[0])


# -- argument principle ----------------------------------------------------------


def _rect_boundary(rect, n):
    a, b, c, d = rect
    corners = np.array([a + 1j * c, b + 1j * c, b + 1j * d, a + 1j * d, a + 1j * c])
    lengths = np.abs(np.diff(corners))
    counts = np.maximum(2, np.round(n * lengths / lengths.sum()).astype(int))
    pts = [corners[i] + (corners[i + 1] - corners[i]) * np.arange(counts[i]) / counts[i] for i in range(4)]
    return np.concatenate(pts)


def winding_number(
    func: Callable,
    rect,
    *,
    min_samples=D.CONTOUR_MIN_SAMPLES,
    max_samples=D.CONTOUR_MAX_SAMPLES,
    max_jump=D.CONTOUR_PHASE_JUMP,
    min_abs=D.CONTOUR_MIN_ABS,
):
    """Winding number of func around the boundary of a rectangle (counterclockwise).

    The argument is accumulated between neighbouring samples; segments with a
    phase jump above ``max_jump`` are bisected until none remain.
    Returns (winding, number of samples, min |func| on the contour).
    """
    a, b, c, d = rect
    if not (a < b and c < d):
        raise DomainError("rect must satisfy re_min < re_max and im_min < im_max")
    z = _rect_boundary(rect, min_samples)
    w = np.asarray(func(z))
    while True:
        if np.min(np.abs(w)) < min_abs:
            raise ContourError(
                f"|W| = {np.min(np.abs(w)):.2e} on the contour: a zero lies too close to the boundary"
            )
        zc = np.r_[z, z[:1]]
        wc = np.r_[w, w[:1]]
        dphi = np.angle(wc[1:] / wc[:-1])
        bad = np.flatnonzero(np.abs(dphi) > max_jump)
        if bad.size == 0:
            break
        if len(z) + bad.size > max_samples:
            raise ContourError("contour refinement exceeded the sample budget")
        zm = 0.5 * (zc[bad] + zc[bad + 1])
        wm = np.asarray(func(zm))
        z = np.insert(z, bad + 1, zm)
        w = np.insert(w, bad + 1, wm)
    total = dphi.sum() / (2 * np.pi)
    k = int(np.round(total))
    if abs(total - k) > 1e-6:
        raise ContourError(f"accumulated argument {total:.6f} is not close to an integer")
    return k, len(z), float(np.min(np.abs(w)))


def _merge(cands, tol=D.CANDIDATE_MERGE_TOL):
    out = []
    for c in sorted(cands, key=lambda c: (c.lam.real, c.lam.imag)):
        if not any(abs(c.lam - o.lam) < 1e3 * tol for o in out):
            out.append(c)
    return out


def _boundary_distance(z, rect):
    a, b, c, d = rect
    x, y = z.real if isinstance(z, complex) else z, z.imag if isinstance(z, complex) else 0.0
    dx = min(abs(x - a), abs(x - b)) if c <= y <= d else np.inf
    dy = min(abs(y - c), abs(y - d)) if a <= x <= b else np.inf
    corner = min(abs(complex(x, y) - complex(p, q)) for p in (a, b) for q in (c, d))
    return min(dx, dy, corner)


def _clear_of_exclusions(seeds, margin=1e-2):
    """Shift seeds off the excluded integers so the first secant pair is evaluable."""
    k = np.round(seeds.real)
    near = (k <= 0) & (np.abs(seeds - k) < margin)
    return np.where(near, seeds + 5 * margin * 1j, seeds)


def count_zeros(
    equation: Equation,
    rect,
    cfg: ShootConfig = ShootConfig(),
    grid=(5, 5),
    min_samples=D.CONTOUR_MIN_SAMPLES,
    refine=True,
) -> RegionScan:
    """Certified zero count of the mismatch in a rectangle plus refined candidates."""
    a, b, c, d = map(float, rect)
    for k in range(0, int(np.floor(a)) - 2, -1):
        if _boundary_distance(k, (a, b, c, d)) < D.RESONANCE_EXCLUSION_RADIUS:
            raise ResonanceError(f"rectangle boundary passes through the excluded point {k}")

    winding, n_samp, wmin = winding_number(
        lambda z: mismatch(equation, z, cfg), (a, b, c, d), min_samples=min_samples
    )
    cands = []
    if refine:
        nr, ni = grid
        re = a + (b - a) * (np.arange(nr) + 0.5) / nr
        im = c + (d - c) * (np.arange(ni) + 0.5) / ni
        seeds = _clear_of_exclusions((re[:, None] + 1j * im[None, :]).ravel())
        found = find_eigenvalues(equation, seeds, cfg)
        inside = [
            f for f in found if f.converged and a < f.lam.real < b and c < f.lam.imag < d
        ]
        cands = _merge(inside)
        if len(cands) != winding:
            log.warning(
                "winding %d differs from %d refined candidates in %s", winding, len(cands), rect
            )
    return RegionScan((a, b, c, d), winding, tuple(grid), cands, n_samp, wmin, equation)


# -- eigenfunctions and the factorization -------------------------------------


def eigenfunction(equation: Equation, lam, rho, cfg: ShootConfig = ShootConfig()):
    """Values and derivatives of the glued analytic solution at points rho in (0, 1).

    The left branch is used up to the match point and the right branch, rescaled
    to agree at the match point, beyond it. Normalized so the left branch has
    leading coefficient 1 at r = 0.
    """
    lam = complex(lam)
    rho = np.asarray(rho, dtype=float)
    if np.any((rho <= 0) | (rho >= 1)):
        raise DomainError("rho must lie in (0, 1)")
    order = np.argsort(rho)
    rs = rho[order]
    u = np.empty(rs.shape, complex)
    du = np.empty(rs.shape, complex)
    m = cfg.match_point
    sl = expand_analytic(equation, "zero", lam, cfg.series_order)
    sr = expand_analytic(equation, "one", lam, cfg.series_order)
    f = _rhs(equation, np.array([lam]))
    yl0 = np.array(sl.evaluate(cfg.delta0), complex).reshape(2, 1)
    yr0 = np.array(sr.evaluate(1 - cfg.delta1), complex).reshape(2, 1)
    ym_l, _ = dopri54(f, cfg.delta0, yl0, m, cfg.ode_rtol, cfg.ode_atol)
    ym_r, _ = dopri54(f, 1 - cfg.delta1, yr0, m, cfg.ode_rtol, cfg.ode_atol)
    scale = ym_l[0, 0] / ym_r[0, 0]

    near0 = rs <= cfg.delta0
    u[near0], du[near0] = sl.evaluate(rs[near0])
    mid_l = (rs > cfg.delta0) & (rs <= m)
    if np.any(mid_l):
        ys = dopri54_dense(f, cfg.delta0, yl0, rs[mid_l], cfg.ode_rtol, cfg.ode_atol)
        u[mid_l], du[mid_l] = ys[:, 0, 0], ys[:, 1, 0]
    mid_r = (rs > m) & (rs < 1 - cfg.delta1)
    if np.any(mid_r):
        ys = dopri54_dense(f, 1 - cfg.delta1, yr0, rs[mid_r][::-1], cfg.ode_rtol, cfg.ode_atol)
        u[mid_r], du[mid_r] = ys[::-1, 0, 0] * scale, ys[::-1, 1, 0] * scale
    near1 = rs >= 1 - cfg.delta1
    if np.any(near1):
        a, b = sr.evaluate(rs[near1])
        u[near1], du[near1] = a * scale, b * scale
    inv = np.empty_like(order)
    inv[order] = np.arange(len(order))
    return u[inv], du[inv]


class GaugeModeError(ValueError):
    """The factorization operator annihilates the input (gauge mode)."""


def apply_beta(u, du, rho):
    """(1 - r^2) u' - (1 - 3 r^2)/(r (1 + r^2)) u."""
    r = np.asarray(rho, dtype=float)
    return (1 - r * r) * du - (1 - 3 * r * r) / (r * (1 + r * r)) * u


def apply_beta_hat(u, du, rho):
    """-(1 - r^2) u' - (3 - r^2)/(r (1 + r^2)) u."""
    r = np.asarray(rho, dtype=float)
    return -(1 - r * r) * du - (3 - r * r) / (r * (1 + r * r)) * u


def dual_from_primal(lam, rho, u, du, derivatives=False):
    """Dual mode (1 - r^2)^(-lam/2) beta[(1 - r^2)^(lam/2) u] from a primal mode.

    The fractional powers cancel, leaving v = (1 - r^2) u' + B u with
    B = -lam r - (1 - 3r^2)/(r(1 + r^2)). With ``derivatives`` the first two
    derivatives of v are returned as well, eliminating u'' via the primal equation.
    """
    lam = complex(lam)
    if abs(lam - 1) < 1e-8:
        raise GaugeModeError("lambda = 1 is the gauge mode; beta maps it to zero")
    r = np.asarray(rho, dtype=float)
    u = np.asarray(u, dtype=complex)
    du = np.asarray(du, dtype=complex)
    v = apply_beta(u, du, r) - lam * r * u
    if np.max(np.abs(v)) <= 1e-10 * np.max(np.abs(u)):
        raise GaugeModeError("input lies in the kernel of beta")
    if not derivatives:
        return v
    r2 = r * r
    q = 1 - r2
    w = 1 + r2
    F = 2 * lam * r / q - 2 / r
    G = (_potential("primal", r) / r2 + lam * (lam + 1)) / q
    A1 = lam * r - (3 - r2) / (r * w)
    B1 = lam * lam + (3 - 6 * r2 - r2 * r2) / (r2 * w * w)
    dA1 = lam + (3 + 10 * r2 - r2 * r2) / (r2 * w * w)
    dB1 = (-6 - 18 * r2 + 22 * r2 * r2 + 2 * r2**3) / (r2 * r * w**3)
    dv = A1 * du + B1 * u
    d2v = (dA1 + B1 + A1 * F) * du + (dB1 + A1 * G) * u
    return v, dv, d2v


@dataclass
class DualCheck:
    lam: complex
    residual: float
    boundary_value: complex


def dual_check(lam, cfg: ShootConfig = ShootConfig(), interval=(0.05, 0.95), n=200) -> DualCheck:
    """Map the primal mode at lam to the dual side and measure its dual-equation residual.

    The residual is relative to max |v| on the interval. The value of v at r = 1
    (extrapolated from the right-branch series) must be nonzero.
    """
    a, b = interval
    t = np.linspace(a, b, n)
    u, du = eigenfunction("primal", lam, t, cfg)
    v, dv, d2v = dual_from_primal(lam, t, u, du, derivatives=True)
    vmax = np.max(np.abs(v))
    q = 1 - t * t
    pot = _potential("dual", t)
    res = -q * d2v - 2 * q / t * dv + 2 * lam * t * dv + pot / t**2 * v + lam * (lam + 1) * v
    r1 = np.array([1 - 1e-12])
    u1, du1 = eigenfunction("primal", lam, r1, cfg)
    v1 = dual_from_primal(lam, r1, u1, du1)[0] / vmax
    if abs(v1) < 1e-8:
        log.warning("dual mode at lambda=%s vanishes at r = 1 (degenerate candidate)", lam)
    return DualCheck(complex(lam), float(np.max(np.abs(res)) / vmax), complex(v1))
