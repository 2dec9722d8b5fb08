"""Closed-form potentials, profiles and exact solutions.

Every other module evaluates against these functions. All functions accept
scalars or numpy arrays and return the same shape. Where two algebraic forms
exist (trigonometric and rational) both are provided so the tests can diff them.
"""

from __future__ import annotations

import numpy as np
from scipy.special import binom

from .errors import DomainError

# Below these thresholds the direct formulas lose digits to cancellation and the
# series branches are used instead.
Q_SERIES_CUTOFF = 1e-2
U_EPS_SERIES_CUTOFF = 0.1
H1_SERIES_CUTOFF = 1e-3


def _check_interval(rho, lo=0.0, hi=1.0, open_lo=False, open_hi=False, name="rho"):
    r = np.asarray(rho, dtype=float)
    bad = (r < lo) | (r > hi)
    if open_lo:
        bad |= r == lo
    if open_hi:
        bad |= r == hi
    if np.any(bad) or np.any(~np.isfinite(r)):
        lb = "(" if open_lo else "["
        rb = ")" if open_hi else "]"
        raise DomainError(f"{name} must lie in {lb}{lo}, {hi}{rb}")
    return r


def _out(r, value):
    return value.item() if np.ndim(r) == 0 else value


# -- potentials ----------------------------------------------------------------


def V_trig(rho):
    """Profile potential 2*cos(4*arctan(rho))."""
    r = _check_interval(rho)
    return _out(r, 2.0 * np.cos(4.0 * np.arctan(r)))


def eval_V(rho):
    """Profile potential in rational form, 2(1 - 6 rho^2 + rho^4)/(1 + rho^2)^2."""
    r = _check_interval(rho)
    r2 = r * r
    return _out(r, 2.0 * (1.0 - 6.0 * r2 + r2 * r2) / (1.0 + r2) ** 2)


def eval_V1(rho):
    """Reduced potential (V - 2)/rho^2 = -16/(1 + rho^2)^2, regular at 0."""
    r = _check_interval(rho)
    return _out(r, -16.0 / (1.0 + r * r) ** 2)


def eval_Vtilde(rho):
    """Potential of the dual mode equation, (6 - 2 rho^2)/(1 + rho^2)."""
    r = _check_interval(rho)
    r2 = r * r
    return _out(r, (6.0 - 2.0 * r2) / (1.0 + r2))


# -- half-line Schrodinger potential ------------------------------------------


def _taylor_x2U(order):
    """Taylor coefficients c_k of x^2 * Vtilde(tanh x)/sinh^2 x = sum c_k x^(2k).

    Uses Vtilde(tanh x) = 2 + 4 sech(2x), so the product is
    (2 + 4/cosh 2x) * (x/sinh x)^2, built by power-series division in t = x^2.
    """
    k = np.arange(order)
    fact = np.cumprod(np.r_[1.0, np.arange(1, 2 * order + 2, dtype=float)])
    cosh2x = 4.0**k / fact[2 * k]  # cosh(2x) in powers of x^2
    sinhc = 1.0 / fact[2 * k + 1]  # sinh(x)/x
    sech2x = _series_inverse(cosh2x)
    first = 4.0 * sech2x
    first[0] += 2.0
    inv_sinhc = _series_inverse(sinhc)
    second = np.convolve(inv_sinhc, inv_sinhc)[:order]
    return np.convolve(first, second)[:order]


def _series_inverse(a):
    """Coefficients of 1/a(t) truncated to len(a) terms (a[0] != 0)."""
    n = len(a)
    b = np.zeros(n)
    b[0] = 1.0 / a[0]
    for m in range(1, n):
        b[m] = -np.dot(a[1 : m + 1], b[m - 1 :: -1][:m]) / a[0]
    return b


_X2U = _taylor_x2U(24)


def x2U_series(order=24):
    """Even Taylor coefficients of x^2 U(x), U the full half-line potential."""
    if order <= len(_X2U):
        return _X2U[:order].copy()
    return _taylor_x2U(order)


def eval_U(x):
    """Full half-line potential Vtilde(tanh x)/sinh^2 x = 6/x^2 + Q(x)."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0) or np.any(~np.isfinite(xa)):
        raise DomainError("x must be positive")
    with np.errstate(over="ignore"):
        t = np.tanh(xa)
        s2 = np.sinh(xa) ** 2
        val = (6.0 - 2.0 * t * t) / (1.0 + t * t) / s2
    return _out(xa, val)


def eval_U_hyperbolic(x):
    """Same potential as eval_U in the form (2 + 4 sech 2x)/sinh^2 x."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0) or np.any(~np.isfinite(xa)):
        raise DomainError("x must be positive")
    with np.errstate(over="ignore"):
        val = (2.0 + 4.0 / np.cosh(2.0 * xa)) / np.sinh(xa) ** 2
    return _out(xa, val)


def eval_Q(x):
    """Short-range part Vtilde(tanh x)/sinh^2 x - 6/x^2 of the half-line potential."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0) or np.any(~np.isfinite(xa)):
        raise DomainError("x must be positive")
    out = np.empty_like(xa)
    small = xa < Q_SERIES_CUTOFF
    if np.any(small):
        xs = xa[small] ** 2
        out[small] = np.polynomial.polynomial.polyval(xs, _X2U[1:12])
    if np.any(~small):
        xb = xa[~small]
        out[~small] = np.asarray(eval_U(xb)) - 6.0 / xb**2
    return _out(xa, out)


# -- profile, gauge modes ------------------------------------------------------


def f0_profile(rho):
    """Blow-up profile 2*arctan(rho)."""
    r = _check_interval(rho)
    return _out(r, 2.0 * np.arctan(r))


def gauge_scalar(rho):
    """Scalar gauge mode rho/(1 + rho^2), the lambda = 1 solution of the mode equation."""
    r = _check_interval(rho)
    return _out(r, r / (1.0 + r * r))


def gauge_scalar_d(rho, order=1):
    """Derivatives of gauge_scalar up to second order."""
    r = _check_interval(rho)
    r2 = r * r
    if order == 1:
        return _out(r, (1.0 - r2) / (1.0 + r2) ** 2)
    if order == 2:
        return _out(r, 2.0 * r * (r2 - 3.0) / (1.0 + r2) ** 3)
    raise ValueError("order must be 1 or 2")


def gauge_vector(rho):
    """Gauge eigenvector of the first-order generator, (2 rho^3, rho(3 + rho^2))/(1 + rho^2)^2."""
    r = _check_interval(rho)
    d = (1.0 + r * r) ** 2
    return _out(r, 2.0 * r**3 / d), _out(r, r * (3.0 + r * r) / d)


def gauge_vector_factors(rho):
    """Regular factors (w1, w2) of the gauge vector, g1 = rho^3 w1, g2 = rho w2."""
    r = _check_interval(rho)
    d = (1.0 + r * r) ** 2
    return _out(r, 2.0 / d), _out(r, (3.0 + r * r) / d)


def ghat(rho):
    """Similarity profile of the differentiated blow-up solution, 2(3 + rho^2)/(1 + rho^2)^2."""
    r = _check_interval(rho)
    return _out(r, 2.0 * (3.0 + r * r) / (1.0 + r * r) ** 2)


# -- solutions of the lambda = 1 homogeneous problem ---------------------------


def h0(rho):
    """Regular solution rho/(1 + rho^2) of the lambda = 1 mode equation."""
    return gauge_scalar(rho)


def h0_d(rho, order=1):
    return gauge_scalar_d(rho, order)


def _h1_parts(r):
    ell = -2.0 * np.arctanh(r)  # log((1 - r)/(1 + r))
    num = 1.0 + 9.0 * r**2 + 6.0 * r**3 * ell
    den = 3.0 * r**2 * (1.0 + r**2)
    return ell, num, den


def _h1_series(r):
    # 6 r^3 log((1-r)/(1+r)) = -12 sum_{k>=0} r^(2k+4)/(2k+1)
    r2 = r * r
    k = np.arange(8)
    tail = -12.0 * np.polynomial.polynomial.polyval(r2, 1.0 / (2 * k + 1))
    num = 1.0 + 9.0 * r2 + tail * r2 * r2
    return num / (3.0 * r2 * (1.0 + r2))


def h1(rho):
    """Second solution of the lambda = 1 mode equation, singular like 1/(3 rho^2) at 0."""
    r = _check_interval(rho, open_lo=True, open_hi=True)
    ra = np.atleast_1d(r)
    out = np.empty_like(ra)
    small = ra < H1_SERIES_CUTOFF
    out[small] = _h1_series(ra[small])
    _, num, den = _h1_parts(ra[~small])
    out[~small] = num / den
    return _out(r, out.reshape(np.shape(r)))


def h1_d(rho, order=1):
    """First or second derivative of h1 on (0, 1) by the quotient rule."""
    r = _check_interval(rho, open_lo=True, open_hi=True)
    ell, N, D = _h1_parts(r)
    q = 1.0 - r * r
    N1 = 18.0 * r + 18.0 * r**2 * ell - 12.0 * r**3 / q
    D1 = 6.0 * r + 12.0 * r**3
    if order == 1:
        return _out(r, (N1 * D - N * D1) / D**2)
    if order == 2:
        N2 = 18.0 + 36.0 * r * ell - 36.0 * r**2 / q - (36.0 * r**2 - 12.0 * r**4) / q**2
        D2 = 6.0 + 36.0 * r**2
        val = N2 / D - 2.0 * N1 * D1 / D**2 - N * D2 / D**2 + 2.0 * N * D1**2 / D**3
        return _out(r, val)
    raise ValueError("order must be 1 or 2")


def obstruction_inhomogeneity(rho):
    """Right-hand side rho(5 + rho^2)/(1 + rho^2)^2 of the lambda = 1 Jordan-chain equation."""
    r = _check_interval(rho)
    return _out(r, r * (5.0 + r * r) / (1.0 + r * r) ** 2)


# -- exact free solution -------------------------------------------------------


def _u_eps_coeffs(eps, kmax=24):
    """Odd-part coefficients A_k of (1 - p r)(1 + r)^p, p = 1/2 + eps."""
    p = 0.5 + eps
    k = np.arange(kmax + 1)
    c = binom(p, k)
    A = c.copy()
    A[1:] -= p * c[:-1]
    return A


def _check_eps(eps):
    if not (0.0 < eps < 1.0):
        raise DomainError("eps must lie in (0, 1)")


def u_eps(rho, eps):
    """Self-similar profile of the exact free solution with similarity exponent -1/2 + eps.

    u = [(1 - p r)(1 + r)^p - (1 + p r)(1 - r)^p]/r^2 with p = 1/2 + eps; the
    singularity at 0 is removable and handled by the odd-part series.
    """
    _check_eps(eps)
    r = _check_interval(rho, open_hi=True)
    ra = np.atleast_1d(r).astype(float)
    out = np.empty_like(ra)
    p = 0.5 + eps
    small = ra < U_EPS_SERIES_CUTOFF
    if np.any(small):
        A = _u_eps_coeffs(eps)
        odd = np.zeros_like(A)
        odd[3::2] = 2.0 * A[3::2]
        # u = sum_k odd[k] r^(k-2)
        out[small] = np.polynomial.polynomial.polyval(ra[small], odd[2:])
    big = ~small
    rb = ra[big]
    out[big] = ((1 - p * rb) * (1 + rb) ** p - (1 + p * rb) * (1 - rb) ** p) / rb**2
    return _out(r, out.reshape(np.shape(r)))


def u_eps_d(rho, eps, order=1):
    """First or second derivative of u_eps."""
    _check_eps(eps)
    r = _check_interval(rho, open_hi=True)
    ra = np.atleast_1d(r).astype(float)
    out = np.empty_like(ra)
    p = 0.5 + eps
    small = ra < U_EPS_SERIES_CUTOFF
    if np.any(small):
        A = _u_eps_coeffs(eps)
        odd = np.zeros_like(A)
        odd[3::2] = 2.0 * A[3::2]
        c = np.polynomial.polynomial.polyder(odd[2:], order)
        out[small] = np.polynomial.polynomial.polyval(ra[small], c)
    big = ~small
    x = ra[big]
    # numerator n(x) = a(x) - a(-x) with a(x) = (1 - p x)(1 + x)^p
    a0 = (1 - p * x) * (1 + x) ** p
    b0 = (1 + p * x) * (1 - x) ** p
    a1 = -p * (1 + x) ** p + p * (1 - p * x) * (1 + x) ** (p - 1)
    b1 = p * (1 - x) ** p - p * (1 + p * x) * (1 - x) ** (p - 1)
    n0, n1 = a0 - b0, a1 - b1
    if order == 1:
        out[big] = n1 / x**2 - 2.0 * n0 / x**3
    elif order == 2:
        a2 = -2 * p * p * (1 + x) ** (p - 1) + p * (p - 1) * (1 - p * x) * (1 + x) ** (p - 2)
        b2 = -2 * p * p * (1 - x) ** (p - 1) + p * (p - 1) * (1 + p * x) * (1 - x) ** (p - 2)
        n2 = a2 - b2
        out[big] = n2 / x**2 - 4.0 * n1 / x**3 + 6.0 * n0 / x**4
    else:
        raise ValueError("order must be 1 or 2")
    return _out(r, out.reshape(np.shape(r)))
