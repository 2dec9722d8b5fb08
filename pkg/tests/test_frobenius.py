import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blowup_spectra import frobenius as F
from blowup_spectra import potentials as P
from blowup_spectra.errors import AccuracyError, DomainError, ResonanceError


def test_indices():
    assert F.indices_at("primal", "zero") == (1, -2)
    assert F.indices_at("dual", "zero") == (2, -3)
    assert F.indices_at("primal", "one") == (0, "1 - lambda")
    assert F.indices_at("primal", "one", 0.25) == (0, 0.75)


@pytest.mark.parametrize("equation", ["primal", "dual"])
def test_indices_match_indicial_roots(equation):
    p, q, r = F._local_form(equation, "zero", 0.3)
    roots = F.indicial_roots(p[0], q[0], r[0])
    assert np.allclose(roots, F.indices_at(equation, "zero"))
    assert F.expand_analytic(equation, "zero", 0.3).leading_index == max(roots).real


def test_gauge_series_at_zero():
    s = F.expand_analytic("primal", "zero", 1.0, N=10)
    # rho/(1 + rho^2) = rho - rho^3 + rho^5 - ...
    assert s.power_coefficient(1) == pytest.approx(1.0)
    assert s.power_coefficient(3) == pytest.approx(-1.0)
    assert s.power_coefficient(5) == pytest.approx(1.0)


@pytest.mark.parametrize("lam", [0.3, -0.54, 1.7 + 2j, -0.9 - 4j])
def test_first_coefficient_at_zero(lam):
    s = F.expand_analytic("primal", "zero", lam)
    assert s.power_coefficient(3) == pytest.approx((lam**2 + 3 * lam - 14) / 10, rel=1e-13)


@pytest.mark.parametrize("lam", [1.0, 0.5, -0.54, 2 + 3j])
def test_first_derivative_at_one(lam):
    s = F.expand_analytic("primal", "one", lam)
    _, du = s.evaluate(1.0)
    assert du == pytest.approx(-(lam * (lam + 1) - 2) / (2 * lam), rel=1e-12, abs=1e-14)


def test_gauge_seed_at_zero():
    seed = F.seed_values(F.expand_analytic("primal", "zero", 1.0, N=30), 0.05)
    assert seed.rho == 0.05
    assert abs(seed.u - P.gauge_scalar(0.05)) <= 1e-12
    assert abs(seed.du - P.gauge_scalar_d(0.05)) <= 1e-12


def test_gauge_seed_at_one():
    seed = F.seed_values(F.expand_analytic("primal", "one", 1.0, N=30), 0.05)
    assert seed.rho == pytest.approx(0.95)
    assert abs(seed.u - 2 * P.gauge_scalar(0.95)) <= 1e-12
    assert abs(seed.du - 2 * P.gauge_scalar_d(0.95)) <= 1e-12


def test_tail_rejection():
    with pytest.raises(DomainError):
        F.seed_values(F.expand_analytic("primal", "zero", 1.0, N=5), 0.5)
    # delta inside the admissible range but the truncation still too coarse
    with pytest.raises(AccuracyError):
        F.seed_values(F.expand_analytic("primal", "zero", 1.0, N=5), 0.1)


def test_order_too_small():
    with pytest.raises(DomainError):
        F.expand_analytic("primal", "zero", 1.0, N=4)


@pytest.mark.parametrize("lam", [0.0, -1.0, -2.0])
def test_resonant_lambda_at_one(lam):
    with pytest.raises(ResonanceError):
        F.expand_analytic("primal", "one", lam)


def _series_derivatives(s, rho):
    poly = np.polynomial.polynomial
    c = np.zeros(s.order + s.leading_index, complex)
    c[s.leading_index:] = s.coefficients
    if s.expansion_point == "zero":
        x, sign = rho, 1.0
    else:
        x, sign = 1.0 - rho, -1.0
    return (poly.polyval(x, c), sign * poly.polyval(x, poly.polyder(c)),
            poly.polyval(x, poly.polyder(c, 2)))


@settings(max_examples=20, deadline=None)
@given(st.floats(-1, 2), st.floats(-5, 5), st.sampled_from(["primal", "dual"]),
       st.sampled_from(["zero", "one"]))
def test_series_residual(re, im, equation, point):
    lam = complex(re, im)
    if point == "one" and min(abs(lam - k) for k in (0, -1)) < 1e-2:
        return
    s = F.expand_analytic(equation, point, lam, N=30)
    rho = np.linspace(1e-3, 0.05, 40) if point == "zero" else np.linspace(0.95, 1, 40)
    u, du, d2u = _series_derivatives(s, rho)
    res = F.mode_residual(equation, lam, rho, u, du, d2u)
    assert np.max(np.abs(res)) <= 1e-10


@pytest.mark.parametrize("equation, s0", [("primal", 1), ("dual", 2)])
def test_parity_at_zero(equation, s0):
    s = F.expand_analytic(equation, "zero", 0.7 - 1.3j, N=30)
    for power in range(s0, s0 + 30):
        if (power - s0) % 2:
            assert abs(s.power_coefficient(power)) <= 1e-14


def test_seed_consistent_with_evaluate():
    s = F.expand_analytic("dual", "one", -0.5 + 0.2j)
    seed = F.seed_values(s, 0.05)
    u, du = s.evaluate(0.95)
    assert seed.u == pytest.approx(complex(u)) and seed.du == pytest.approx(complex(du))
