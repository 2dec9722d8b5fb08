import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blowup_spectra import potentials as P
from blowup_spectra.errors import DomainError

# mpmath at 30 digits, frozen
Q_AT_1 = -3.78204786487477473851896918378
Q_AT_03 = -8.71291338159447377473235243392
Q_AT_1E4 = -9.9999998360000026730158196819
H1_AT_05 = 2.58777683573217891355047047713
H1_AT_1E3 = 333335.999993333338666660533339
U_EPS08_AT_05 = 0.103233087342521937376458460367
U_EPS08_AT_005 = 0.0096063436145675489112614917491


@pytest.mark.parametrize("rho, expected", [(0.0, 2.0), (1.0, -2.0), (0.5, -0.56)])
def test_V_values(rho, expected):
    assert P.eval_V(rho) == pytest.approx(expected, abs=1e-14)
    assert P.V_trig(rho) == pytest.approx(expected, abs=1e-14)


def test_V_trig_matches_rational():
    r = np.linspace(0, 1, 1000)
    assert np.max(np.abs(P.V_trig(r) - P.eval_V(r))) <= 1e-13


def test_V1_is_reduced_potential():
    r = np.linspace(0.01, 1, 500)
    assert np.allclose((P.eval_V(r) - 2) / r**2, P.eval_V1(r), rtol=1e-10, atol=1e-10)
    assert P.eval_V1(0.0) == -16.0


def test_Vtilde_is_decreasing():
    r = np.linspace(0, 1, 1000)
    v = P.eval_Vtilde(r)
    assert np.all(np.diff(v) < 0)
    assert v[0] == 6.0 and v[-1] == pytest.approx(2.0)


def test_vectorized_shape():
    r = np.linspace(0, 1, 7).reshape(7, 1)
    assert P.eval_V(r).shape == (7, 1)
    assert isinstance(P.eval_V(0.3), float)


@pytest.mark.parametrize("bad", [-0.1, 1.1, np.nan])
def test_rho_out_of_range(bad):
    with pytest.raises(DomainError):
        P.eval_V(bad)


def test_Q_frozen_values():
    assert P.eval_Q(1.0) == pytest.approx(Q_AT_1, rel=1e-13)
    assert P.eval_Q(0.3) == pytest.approx(Q_AT_03, rel=1e-12)
    assert P.eval_Q(1e-4) == pytest.approx(Q_AT_1E4, rel=1e-13)


def test_Q_limit_at_origin():
    assert P.eval_Q(1e-6) == pytest.approx(-10.0, abs=1e-9)


def test_Q_series_branch_is_continuous():
    c = P.Q_SERIES_CUTOFF
    lo, hi = P.eval_Q(c * (1 - 1e-12)), P.eval_Q(c * (1 + 1e-12))
    assert abs(lo - hi) <= 1e-10


def test_Q_is_short_range():
    x = np.linspace(30, 60, 50)
    assert np.max(np.abs(x**2 * P.eval_Q(x) + 6)) <= 1e-10


def test_U_forms_agree():
    x = np.linspace(0.05, 20, 400)
    assert np.allclose(P.eval_U(x), P.eval_U_hyperbolic(x), rtol=1e-12)
    assert np.allclose(P.eval_U(x) - 6 / x**2, P.eval_Q(x), rtol=1e-9, atol=1e-12)


def test_U_rejects_nonpositive():
    with pytest.raises(DomainError):
        P.eval_U(0.0)
    with pytest.raises(DomainError):
        P.eval_Q(-1.0)


def test_x2U_series_leading_terms():
    c = P.x2U_series()
    assert c[0] == pytest.approx(6.0)
    assert c[1] == pytest.approx(-10.0)


def test_gauge_values():
    assert P.gauge_scalar(0.5) == pytest.approx(0.4)
    g1, g2 = P.gauge_vector(1.0)
    assert (g1, g2) == (pytest.approx(0.5), pytest.approx(1.0))


def test_gauge_vector_factors():
    r = np.linspace(0, 1, 200)
    g1, g2 = P.gauge_vector(r)
    w1, w2 = P.gauge_vector_factors(r)
    assert np.allclose(g1, r**3 * w1) and np.allclose(g2, r * w2)


def test_ghat_is_twice_gauge_factor():
    r = np.linspace(0, 1, 300)
    _, w2 = P.gauge_vector_factors(r)
    assert np.allclose(P.ghat(r), 2 * w2, atol=1e-14)


def _fd(f, r, h=1e-5):
    return (f(r + h) - f(r - h)) / (2 * h), (f(r + h) - 2 * f(r) + f(r - h)) / h**2


def test_gauge_scalar_derivatives():
    r = np.linspace(0.1, 0.9, 50)
    d1, d2 = _fd(P.gauge_scalar, r)
    assert np.allclose(P.gauge_scalar_d(r), d1, atol=1e-8)
    assert np.allclose(P.gauge_scalar_d(r, 2), d2, atol=1e-4)


def _mode_residual_l1(u, du, d2u, r):
    # lam = 1, primal, multiplied through by rho^2
    q = 1 - r * r
    return r * r * (-q * d2u - 2 * q / r * du + 2 * r * du + 2 * u) + P.eval_V(r) * u


def test_h0_solves_mode_equation():
    r = np.linspace(0.05, 0.95, 200)
    res = _mode_residual_l1(P.h0(r), P.h0_d(r), P.h0_d(r, 2), r)
    assert np.max(np.abs(res)) <= 1e-12


def test_h1_solves_mode_equation():
    r = np.linspace(0.05, 0.95, 200)
    res = _mode_residual_l1(P.h1(r), P.h1_d(r), P.h1_d(r, 2), r)
    assert np.max(np.abs(res)) <= 1e-9


def test_h1_frozen_values():
    assert P.h1(0.5) == pytest.approx(H1_AT_05, rel=1e-13)
    assert P.h1(1e-3) == pytest.approx(H1_AT_1E3, rel=1e-12)


def test_wronskian_h0_h1():
    r = 0.5
    w = P.h0(r) * P.h1_d(r) - P.h0_d(r) * P.h1(r)
    assert w == pytest.approx(-16 / 3, rel=1e-12)


def test_h1_open_interval():
    with pytest.raises(DomainError):
        P.h1(0.0)
    with pytest.raises(DomainError):
        P.h1(1.0)


def test_u_eps_frozen_values():
    assert P.u_eps(0.5, 0.3) == pytest.approx(U_EPS08_AT_05, rel=1e-13)
    assert P.u_eps(0.05, 0.3) == pytest.approx(U_EPS08_AT_005, rel=1e-12)


def test_u_eps_branch_switch():
    c = P.U_EPS_SERIES_CUTOFF
    for eps in (0.1, 0.3, 0.7):
        assert abs(P.u_eps(c * (1 - 1e-12), eps) - P.u_eps(c * (1 + 1e-12), eps)) <= 1e-12
        for order in (1, 2):
            lo = P.u_eps_d(c * (1 - 1e-12), eps, order)
            hi = P.u_eps_d(c * (1 + 1e-12), eps, order)
            assert abs(lo - hi) <= 1e-9


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 0.95))
def test_u_eps_solves_free_equation(eps):
    # psi = (T - t)^(-lam) u(r/(T - t)) with lam = 1/2 - eps
    lam = 0.5 - eps
    r = np.linspace(0.05, 0.95, 50)
    u, du, d2u = P.u_eps(r, eps), P.u_eps_d(r, eps), P.u_eps_d(r, eps, 2)
    res = (-(1 - r * r) * d2u - 2 / r * du + 2 * (lam + 1) * r * du
           + lam * (lam + 1) * u + 2 / r**2 * u)
    assert np.max(np.abs(res)) <= 1e-10


def test_u_eps_rejects_bad_eps():
    for eps in (0.0, 1.0, -0.2):
        with pytest.raises(DomainError):
            P.u_eps(0.5, eps)


def test_obstruction_inhomogeneity_relation():
    r = np.linspace(0, 1, 100)
    g1, g2 = P.gauge_vector(r)
    assert np.allclose(P.obstruction_inhomogeneity(r), r * (5 + r * r) / (1 + r * r) ** 2)


def test_f0_profile():
    assert P.f0_profile(1.0) == pytest.approx(np.pi / 2)
