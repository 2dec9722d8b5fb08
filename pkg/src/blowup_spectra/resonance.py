"""Half-line Schrodinger form of the dual mode problem.

With r = tanh x the dual mode equation becomes

    -v'' + U(x) v = mu^2 v,   U(x) = Vtilde(tanh x)/sinh^2 x = 6/x^2 + Q(x),

and lam is an eigenvalue exactly when mu = i(lam - 1) is a zero of the
Wronskian of the regular solution (~ x^3 at 0) and the outgoing Jost solution
(~ e^{i mu x} at infinity).

U decays like e^{-2x} with no inverse-square tail, so in zeta = e^{-2x} the
equation has a regular singular point at zeta = 0 and the Jost solution is a
convergent series e^{i mu x} sum_k c_k zeta^k. The series is evaluated at the
seed point ``x_max`` and integrated inward to the match point; inward
integration amplifies the incoming solution by e^{2|Im mu|(x_max - x_m)}, so
x_max is kept small. The c_k have simple poles at mu = -ik (lam = 0, -1, ...),
removed by the factor 1/Gamma(1 - i mu) exactly as in the shooting module.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial
from scipy.special import rgamma

from . import defaults as D
from .errors import AccuracyError, ConfigError, DomainError, ResonanceError
from .frobenius import indicial_roots, series_coefficients
from .ode import dopri54
from .potentials import eval_U, x2U_series
from .shooting import (
    ShootConfig,
    _boundary_distance,
    _potential,
    eigenfunction,
    refine_roots,
    winding_number,
)

log = logging.getLogger(__name__)

TAIL_TOL = 1e-12
IM_MU_MAX = 0.2
SEARCH_WINDOW = (-10.0, 10.0, -3.0, 0.0)


@dataclass(frozen=True)
class JostConfig:
    x_min: float = D.JOST_X_MIN
    x_max: float = D.JOST_X_SEED
    x_match: float = D.JOST_X_MATCH
    ode_rtol: float = D.ODE_RTOL
    ode_atol: float = D.ODE_ATOL
    series_order: int = D.JOST_SERIES_ORDER
    regular_order: int = D.REGULAR_SERIES_ORDER

    def __post_init__(self):
        if not (0 < self.x_min < self.x_match <= self.x_max):
            raise ConfigError("need 0 < x_min < x_match <= x_max")
        if self.series_order < 5 or self.regular_order < 3:
            raise ConfigError("series orders too small")
        if self.ode_rtol <= 0 or self.ode_atol <= 0:
            raise ConfigError("ODE tolerances must be positive")


@dataclass
class ResonanceCandidate:
    mu: complex
    wronskian: complex
    lambda_equivalent: complex = field(init=False)
    iterations: int = 0
    converged: bool = False

    def __post_init__(self):
        self.mu = complex(self.mu)
        self.lambda_equivalent = mu_to_lambda(self.mu)


@dataclass
class ResonanceScan:
    rect: tuple
    winding: int
    candidates: list
    boundary_samples: int
    min_abs_wronskian: float


def lambda_mu_map(lam):
    """mu = i(lam - 1)."""
    return 1j * (np.asarray(lam, dtype=complex) - 1.0) if np.ndim(lam) else 1j * (complex(lam) - 1.0)


def mu_to_lambda(mu):
    """Inverse map lam = 1 - i mu."""
    return 1.0 - 1j * np.asarray(mu, dtype=complex) if np.ndim(mu) else 1.0 - 1j * complex(mu)


# -- regular solution ----------------------------------------------------------


def _rhs(mus):
    mu2 = np.asarray(mus, dtype=complex) ** 2

    def f(x, y):
        v, dv = y
        return np.stack([dv, (eval_U(x) - mu2) * v])

    return f


def regular_series(mu, K=D.REGULAR_SERIES_ORDER):
    """Coefficients (in powers of x, starting at x^3) of the regular branch."""
    c = x2U_series(K + 1)
    r = np.zeros(2 * K + 1, complex)
    r[0::2] = -c[: K + 1]
    r[2] += complex(mu) ** 2
    s = indicial_roots(1.0, 0.0, r[0].real)[0]
    if abs(s - 3) > 1e-12:
        raise AssertionError(f"regular exponent {s} differs from 3")
    return series_coefficients([1.0], [0.0], r, 3, 2 * K + 1)


def _regular_seed(mu, cfg: JostConfig):
    a = regular_series(mu, cfg.regular_order)
    x = cfg.x_min
    tail = (abs(a[-1]) * x ** (len(a) - 1) + abs(a[-3]) * x ** (len(a) - 3)) / abs(a[0])
    if not tail <= TAIL_TOL:
        raise AccuracyError(f"regular series tail {tail:.2e} exceeds {TAIL_TOL:.0e}; shrink x_min")
    p = Polynomial(a)
    return x**3 * p(x), 3 * x**2 * p(x) + x**3 * p.deriv()(x)


def regular_solution(mu, cfg: JostConfig = JostConfig(), x=None):
    """Regular solution ~ x^3 (leading coefficient 1) and its derivative at x (default x_match)."""
    mus = np.atleast_1d(np.asarray(mu, dtype=complex))
    x_end = cfg.x_match if x is None else float(x)
    if x_end < cfg.x_min:
        raise DomainError("evaluation point lies below x_min")
    # integrate the seed rescaled to O(1) so atol does not swamp x_min^3
    scale = cfg.x_min**-3
    y0 = np.array([_regular_seed(m, cfg) for m in mus], complex).T * scale
    y, _ = dopri54(_rhs(mus), cfg.x_min, y0, x_end, cfg.ode_rtol, cfg.ode_atol)
    y = y / scale
    if np.ndim(mu) == 0:
        return complex(y[0, 0]), complex(y[1, 0])
    return y[0], y[1]


# -- outgoing Jost solution ----------------------------------------------------


def jost_series(mu, order=D.JOST_SERIES_ORDER):
    """Coefficients c_k of f_+ = e^{i mu x} sum_k c_k e^{-2kx}, c_0 = 1."""
    mu = complex(mu)
    z = Polynomial([0, 1])
    d = (1 - z) ** 2 * (1 + z**2)
    p = -4 * d
    r = 8 * z * (1 + 4 * z + z**2) - mu**2 * d
    return series_coefficients(p.coef, p.coef, r.coef, -0.5j * mu, order)


def _check_mu(mus):
    if np.any(np.abs(mus) < D.MU_MIN_ABS):
        raise DomainError(f"|mu| < {D.MU_MIN_ABS:g}: the gauge point mu = 0 is excluded")
    if np.any(mus.imag > IM_MU_MAX):
        raise DomainError(f"Im mu must not exceed {IM_MU_MAX}")
    k = np.round(-mus.imag)
    if np.any((k >= 1) & (np.abs(mus + 1j * k) < D.RESONANCE_EXCLUSION_RADIUS)):
        raise ResonanceError("mu within the exclusion radius of a point -ik where the series exponents collide")


def _jost_eval(c, mu, x):
    zeta = np.exp(-2.0 * x)
    k = np.arange(len(c))
    terms = c * zeta**k
    tail = np.sum(np.abs(terms[-2:])) / np.max(np.abs(terms))
    if not tail <= TAIL_TOL:
        raise AccuracyError(f"Jost series tail {tail:.2e} at x={x}; raise the order or x_max")
    e = np.exp(1j * mu * x)
    return e * terms.sum(), e * np.sum(terms * (1j * mu - 2.0 * k))


def jost_plus_series(mu, x, cfg: JostConfig = JostConfig()):
    """f_+ and its derivative at x summed directly from the zeta series (scaled by 1/Gamma(1 - i mu))."""
    mus = np.atleast_1d(np.asarray(mu, dtype=complex))
    _check_mu(mus)
    out = np.array([_jost_eval(jost_series(m, cfg.series_order), m, x) for m in mus]).T
    out = out * rgamma(1.0 - 1j * mus)
    if np.ndim(mu) == 0:
        return complex(out[0, 0]), complex(out[1, 0])
    return out[0], out[1]


def jost_plus(mu, cfg: JostConfig = JostConfig(), x=None):
    """Outgoing Jost solution at x (default x_match), seeded at x_max and integrated inward."""
    mus = np.atleast_1d(np.asarray(mu, dtype=complex))
    x_end = cfg.x_match if x is None else float(x)
    y0 = np.array(jost_plus_series(mus, cfg.x_max, cfg), complex)
    y, _ = dopri54(_rhs(mus), cfg.x_max, y0, x_end, cfg.ode_rtol, cfg.ode_atol)
    if np.ndim(mu) == 0:
        return complex(y[0, 0]), complex(y[1, 0])
    return y[0], y[1]


# -- Wronskian and root finding ------------------------------------------------


def _wronskians(mus, cfg):
    f0, df0 = regular_solution(mus, cfg)
    fp, dfp = jost_plus(mus, cfg)
    raw = f0 * dfp - df0 * fp
    norm = (np.abs(f0) + np.abs(df0)) * (np.abs(fp) + np.abs(dfp))
    return raw, raw / norm


def wronskian_res(mu, cfg: JostConfig = JostConfig(), normalized=True):
    """W(f_0, f_+) at the match point; magnitude-normalized unless ``normalized`` is false."""
    mus = np.atleast_1d(np.asarray(mu, dtype=complex))
    raw, w = _wronskians(mus, cfg)
    out = w if normalized else raw
    return complex(out[0]) if np.ndim(mu) == 0 else out


def find_resonances(seeds, cfg: JostConfig = JostConfig(), window=SEARCH_WINDOW, **kw):
    """Refine mu seeds to Wronskian zeros."""
    z, w, it, conv, _ = refine_roots(lambda m: _wronskians(m, cfg), seeds, window=window, **kw)
    return [ResonanceCandidate(z[i], w[i], int(it[i]), bool(conv[i])) for i in range(len(z))]


def find_resonance(seed, cfg: JostConfig = JostConfig(), **kw) -> ResonanceCandidate:
    return find_resonances([seed], cfg, **kw)[0]


def scan_resonances(rect=(-2.0, 2.0, -2.95, -0.05), cfg: JostConfig = JostConfig(), grid=(4, 4)):
    """Winding count of W over a mu-rectangle plus refined candidates inside it."""
    a, b, c, d = map(float, rect)
    if d >= 0 or c < SEARCH_WINDOW[2] or a < SEARCH_WINDOW[0] or b > SEARCH_WINDOW[1]:
        raise DomainError("resonance search is restricted to -3 <= Im mu < 0, |Re mu| <= 10")
    for k in (1, 2, 3):
        if _boundary_distance(-1j * k, (a, b, c, d)) < D.RESONANCE_EXCLUSION_RADIUS:
            raise ResonanceError(f"rectangle boundary passes through the excluded point mu = -{k}i")
    winding, n, wmin = winding_number(lambda m: wronskian_res(m, cfg), (a, b, c, d))
    nr, ni = grid
    re = a + (b - a) * (np.arange(nr) + 0.5) / nr
    im = c + (d - c) * (np.arange(ni) + 0.5) / ni
    seeds = (re[:, None] + 1j * im[None, :]).ravel()
    found = [
        f for f in find_resonances(seeds, cfg)
        if f.converged and a < f.mu.real < b and c < f.mu.imag < d
    ]
    cands = []
    for f in sorted(found, key=lambda f: (f.mu.real, f.mu.imag)):
        if not any(abs(f.mu - g.mu) < 1e-6 for g in cands):
            cands.append(f)
    if len(cands) != winding:
        log.warning("winding %d differs from %d refined resonances in %s", winding, len(cands), rect)
    return ResonanceScan((a, b, c, d), winding, cands, n, wmin)


def cross_check(lams, cfg: JostConfig = JostConfig()):
    """For each eigenvalue lam, the nearest Wronskian zero and |delta mu| from i(lam - 1)."""
    out = []
    for lam in lams:
        target = lambda_mu_map(lam)
        cand = find_resonance(target, cfg)
        out.append((cand, abs(cand.mu - target)))
    return out


# -- transformation consistency ------------------------------------------------


def transformed_residual(lam, x, shoot_cfg: ShootConfig = ShootConfig()):
    """Residual of the half-line equation for vt(x) = sech(x)^lam sinh(x) v(tanh x).

    v is the dual eigenfunction at lam from shooting; v'' is eliminated with the
    dual mode equation. Returns max |residual| / max |vt| over the points x.
    """
    lam = complex(lam)
    x = np.asarray(x, dtype=float)
    r = np.tanh(x)
    v, dv = eigenfunction("dual", lam, r, shoot_cfg)
    q = 1.0 - r * r
    # q^2 v'' from the dual equation, avoiding the division by q near r = 1
    q2d2v = q * (-2.0 * q / r * dv + 2.0 * lam * r * dv + _potential("dual", r) / r**2 * v
                 + lam * (lam + 1.0) * v)
    a = np.sinh(x) * np.cosh(x) ** (-lam)
    da = a * (1.0 / r - lam * r)
    d2a = a * ((1.0 - 3.0 * lam) + lam * (lam + 1.0) * r * r)
    vt = a * v
    d2vt = d2a * v + 2.0 * da * q * dv + a * (q2d2v - 2.0 * r * q * dv)
    mu2 = lambda_mu_map(lam) ** 2
    res = -d2vt + eval_U(x) * vt - mu2 * vt
    return float(np.max(np.abs(res)) / np.max(np.abs(vt)))
