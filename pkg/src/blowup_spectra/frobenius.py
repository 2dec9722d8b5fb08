"""Frobenius series at the regular singular points of the mode equations.

The mode equation with eigenvalue parameter lam,

    -(1 - r^2) u'' - 2 (1 - r^2)/r u' + 2 lam r u' + W(r)/r^2 u + lam (lam + 1) u = 0,

has W = V for the primal problem and W = Vtilde for the dual one. Clearing
denominators gives polynomial coefficients, and a single recurrence engine
(:func:`series_coefficients`) produces the analytic branch at either endpoint.
The engine is also reused for the half-line Schrodinger problem in
:mod:`blowup_spectra.resonance`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.polynomial import Polynomial

from .errors import AccuracyError, DomainError, ResonanceError

Equation = Literal["primal", "dual"]
Point = Literal["zero", "one"]

RESONANCE_TOL = 1e-12
TAIL_TOL = 1e-12


def series_coefficients(p, q, r, s, n_terms):
    """Coefficients a_j of u = x^s * sum_j a_j x^j for x^2 p u'' + x q u' + r u = 0.

    ``p``, ``q``, ``r`` are (truncated) power series in x given as coefficient
    arrays; ``a_0 = 1``. Raises ResonanceError when the indicial polynomial
    vanishes at ``s + j`` for some ``j >= 1``.
    """
    p = np.asarray(p, dtype=complex)
    q = np.asarray(q, dtype=complex)
    r = np.asarray(r, dtype=complex)
    m = max(len(p), len(q), len(r), n_terms)
    P = np.zeros(m, complex)
    Qc = np.zeros(m, complex)
    R = np.zeros(m, complex)
    P[: len(p)] = p
    Qc[: len(q)] = q
    R[: len(r)] = r

    def F(k, t):
        return P[k] * t * (t - 1) + Qc[k] * t + R[k]

    scale = abs(P[0]) + abs(Qc[0]) + abs(R[0])
    a = np.zeros(n_terms, complex)
    a[0] = 1.0
    for j in range(1, n_terms):
        den = F(0, s + j)
        if abs(den) < RESONANCE_TOL * max(scale, 1.0) * max(1.0, abs(s + j)) ** 2:
            raise ResonanceError(f"indicial polynomial vanishes at s + {j}; exponents collide")
        k = np.arange(1, j + 1)
        acc = np.sum(F(k, s + j - k) * a[j - k])
        a[j] = -acc / den
    return a


def mode_polynomials(equation: Equation, lam):
    """Polynomial coefficients (P2, P1, P0) in r of the cleared mode equation."""
    lam = complex(lam)
    x = Polynomial([0, 1])
    one_minus = 1 - x**2
    if equation == "primal":
        w = (1 + x**2) ** 2
        pot = 2 * (1 - 6 * x**2 + x**4)
    elif equation == "dual":
        w = 1 + x**2
        pot = 6 - 2 * x**2
    else:
        raise ValueError(f"unknown equation {equation!r}")
    P2 = -one_minus * x**2 * w
    P1 = (-2 * one_minus * x + 2 * lam * x**3) * w
    P0 = pot + lam * (lam + 1) * x**2 * w
    return P2, P1, P0


def _local_form(equation: Equation, point: Point, lam):
    """Euler-form series (p, q, r) in the local variable at the expansion point."""
    P2, P1, P0 = mode_polynomials(equation, lam)
    if point == "zero":
        c2, c1, c0 = P2.coef, P1.coef, P0.coef
        if abs(c2[0]) + abs(c2[1]) > 0 or abs(c1[0]) > 0:
            raise AssertionError("unexpected coefficient structure at r = 0")
        return c2[2:], c1[1:], c0
    if point == "one":
        sub = Polynomial([1, -1])  # r = 1 - x
        A2 = P2(sub).coef
        A1 = -P1(sub).coef
        A0 = P0(sub).coef
        # P2 has a simple zero at x = 0: multiply the equation through by x.
        return A2[1:], A1, np.r_[0.0, A0]
    raise ValueError(f"unknown expansion point {point!r}")


def indices_at(equation: Equation, point: Point, lam=None):
    """Frobenius exponents (analytic branch first) at r = 0 or r = 1.

    At r = 1 the secondary exponent depends on lam; pass lam to get a number.
    """
    if point == "zero":
        return (1, -2) if equation == "primal" else (2, -3)
    if point == "one":
        if lam is None:
            return (0, "1 - lambda")
        return (0, 1 - complex(lam))
    raise ValueError(f"unknown expansion point {point!r}")


def indicial_roots(p0, q0, r0):
    """Roots of p0 s(s-1) + q0 s + r0, larger real part first."""
    roots = np.roots([p0, q0 - p0, r0])
    return tuple(sorted(roots, key=lambda z: -z.real))


@dataclass(frozen=True)
class SeriesSolution:
    """Truncated analytic Frobenius branch u = x^s sum_j a_j x^j.

    x = r at the expansion point zero and x = 1 - r at the point one.
    """

    equation: Equation
    expansion_point: Point
    lam: complex
    coefficients: np.ndarray
    order: int
    leading_index: int
    branch: str = "analytic"

    def power_coefficient(self, power):
        """Coefficient of x**power in the series (0 if absent)."""
        j = power - self.leading_index
        if 0 <= j < self.order:
            return complex(self.coefficients[j])
        return 0j

    def evaluate_local(self, x):
        """Value and x-derivative of the truncated series at local coordinate x."""
        a = self.coefficients
        s = self.leading_index
        poly = np.polynomial.polynomial
        x = np.asarray(x, dtype=float)
        base = poly.polyval(x, a)
        dbase = poly.polyval(x, poly.polyder(a))
        val = x**s * base
        dval = s * x ** (s - 1) * base + x**s * dbase if s else dbase
        return val, dval

    def evaluate(self, rho):
        """Value and r-derivative at rho."""
        if self.expansion_point == "zero":
            return self.evaluate_local(rho)
        u, du = self.evaluate_local(1.0 - np.asarray(rho, dtype=float))
        return u, -du

    def tail_estimate(self, delta):
        """Size of the last two retained terms relative to the leading term."""
        a = np.abs(self.coefficients)
        n = self.order
        return a[n - 1] * delta ** (n - 1) + a[n - 2] * delta ** (n - 2)


def expand_analytic(equation: Equation, point: Point, lam, N: int = 30) -> SeriesSolution:
    """Analytic Frobenius branch of the mode equation, normalized to leading coefficient 1."""
    if N < 5:
        raise DomainError("series order N must be at least 5")
    lam = complex(lam)
    p, q, r = _local_form(equation, point, lam)
    s = indices_at(equation, point)[0]
    a = series_coefficients(p, q, r, s, N)
    return SeriesSolution(equation, point, lam, a, N, s)


@dataclass(frozen=True)
class SeedValues:
    rho: float
    u: complex
    du: complex


def seed_values(series: SeriesSolution, delta: float) -> SeedValues:
    """Value and derivative of the series at delta (point zero) or 1 - delta (point one)."""
    if not (0.0 < delta <= 0.1):
        raise DomainError("delta must lie in (0, 0.1]")
    tail = series.tail_estimate(delta)
    if not tail <= TAIL_TOL:
        raise AccuracyError(
            f"series tail estimate {tail:.2e} exceeds {TAIL_TOL:.0e} at delta={delta}; "
            "raise the order or shrink delta"
        )
    rho = delta if series.expansion_point == "zero" else 1.0 - delta
    u, du = series.evaluate(rho)
    return SeedValues(rho, complex(u), complex(du))


def mode_residual(equation: Equation, lam, rho, u, du, d2u):
    """Residual of the mode equation in cleared polynomial form at points rho."""
    P2, P1, P0 = mode_polynomials(equation, lam)
    rho = np.asarray(rho, dtype=float)
    return P2(rho) * d2u + P1(rho) * du + P0(rho) * u
