import csv
import dataclasses

import numpy as np
import pytest
from scipy.linalg import expm

from blowup_spectra import evolution as E
from blowup_spectra import gates as G
from blowup_spectra import ode
from blowup_spectra import operator as O
from blowup_spectra.errors import ConfigError, DomainError, InstabilityError

# mpmath quad at 30 digits of int_0^1 (1 + r^2) ghat(r)^2 dr, frozen
HIGHER_ENERGY_PROFILE = 22.1371669411540695730818952248


@pytest.fixture(scope="module")
def s0(ops96):
    return O.spectrum(ops96).reliable_eigenvalues()[1].real


def test_unperturbed_data_give_zero_state(ops96):
    x = E.initial_data(lambda r: E.psi_T(r)[0], lambda r: E.psi_T(r)[1],
                       lambda r: E.psi_T(r)[2], ops96.grid)
    assert x.tau == 0.0
    assert np.max(np.abs(x.vector)) <= 1e-14


def test_gauge_datum_is_gauge_mode(ops96):
    x = E.gauge_datum(ops96.grid)
    assert np.allclose(x.vector, -2 * O.gauge_mode(ops96), rtol=1e-12)


def test_initial_data_must_vanish_at_origin(ops96):
    with pytest.raises(DomainError):
        E.initial_data(lambda r: 1 + r, lambda r: np.ones_like(r), lambda r: r, ops96.grid)


def test_polynomial_datum_refinement(ops96):
    g48 = O.build_grid(48)
    a = O.build_operators(g48).norm(G.canonical_projected_datum(g48).vector)
    b = ops96.norm(G.canonical_projected_datum(ops96.grid).vector)
    assert np.isfinite(a) and abs(a - b) <= 1e-8 * b


def test_state_vector_validation():
    with pytest.raises(ValueError):
        E.StateVector(0.0, np.ones(3), np.ones(4))
    with pytest.raises(ValueError):
        E.StateVector(0.0, np.array([np.nan]), np.ones(1))


def test_config_validation(ops96):
    with pytest.raises(ConfigError):
        E.EvolutionConfig(-1.0)
    with pytest.raises(ConfigError):
        E.EvolutionConfig(1.0, integrator="euler")
    cfg = E.EvolutionConfig(1.0, dt=1.0)
    with pytest.raises(ConfigError):
        cfg.schedule(ops96.grid)


def test_schedule_respects_cfl(ops96):
    cfg = E.EvolutionConfig(2.0)
    dt, per, samples = cfg.schedule(ops96.grid)
    assert dt <= cfg.max_dt(ops96.grid) * (1 + 1e-12)
    assert dt * per * samples == pytest.approx(2.0)


def test_gauge_growth(ops96):
    tr = E.evolve(E.gauge_datum(ops96.grid), ops96, E.EvolutionConfig(3.0))
    assert np.max(np.abs(tr.norms / tr.norms[0] / np.exp(tr.tau) - 1)) <= 0.01
    assert E.fit_rate(tr.tau, tr.norms, (0.0, 3.0)).rate == pytest.approx(1.0, abs=0.01)


def test_free_decay_bound(ops96):
    rng = np.random.default_rng(1)
    for _ in range(10):
        tr = E.evolve(E.random_state(ops96.grid, rng, decay=0.6), ops96,
                      E.EvolutionConfig(5.0, sample_interval=0.1), generator="L0")
        assert np.all(tr.norms <= tr.norms[0] * np.exp(-tr.tau / 2) * (1 + 1e-6))


def test_projected_rate(ops96, riesz96, s0):
    x = E.project_out_gauge(G.canonical_projected_datum(ops96.grid), riesz96)
    tr = E.evolve(x, ops96, E.EvolutionConfig(10.0))
    fit = E.fit_rate(tr.tau, tr.norms, (2.0, 10.0))
    assert abs(fit.rate - s0) <= 0.02
    assert abs(fit.rate - (-0.5425)) <= 0.02


def test_projection_of_gauge_datum(ops96, riesz96):
    x = E.project_out_gauge(E.gauge_datum(ops96.grid), riesz96)
    assert ops96.norm(x.vector) <= 1e-8 * ops96.norm(E.gauge_datum(ops96.grid).vector)


def test_projection_idempotent(ops96, riesz96):
    x = E.project_out_gauge(E.random_state(ops96.grid, np.random.default_rng(2)), riesz96)
    y = E.project_out_gauge(x, riesz96)
    assert ops96.norm(y.vector - x.vector) <= 1e-10 * ops96.norm(x.vector)


def test_projection_grid_mismatch(riesz96):
    x = E.random_state(O.build_grid(32), np.random.default_rng(0))
    with pytest.raises(DomainError):
        E.project_out_gauge(x, riesz96)


def test_projection_commutes_with_evolution(ops96, riesz96):
    x = E.random_state(ops96.grid, np.random.default_rng(4), decay=0.6)
    cfg = E.EvolutionConfig(3.0, sample_interval=0.5)
    a = E.evolve(E.project_out_gauge(x, riesz96), ops96, cfg)
    b = E.evolve(x, ops96, cfg)
    for k in range(len(a.tau)):
        pb = E.project_out_gauge(b.state(k), riesz96).vector
        assert ops96.norm(a.states[k] - pb) <= 1e-6 * ops96.norm(b.states[k])


def test_semigroup_property(ops96):
    x = E.random_state(ops96.grid, np.random.default_rng(5), decay=0.6)
    dt = E.EvolutionConfig(1.0).max_dt(ops96.grid) * 0.9
    one = E.evolve(x, ops96, E.EvolutionConfig(1.0, dt=dt, sample_interval=1.0))
    two = E.evolve(one.state(-1), ops96, E.EvolutionConfig(1.0, dt=one.dt, sample_interval=1.0))
    ref = E.evolve(x, ops96, E.EvolutionConfig(2.0, dt=one.dt, sample_interval=1.0))
    assert ops96.norm(two.states[-1] - ref.states[-1]) <= 1e-8 * ops96.norm(ref.states[-1])
    assert two.tau[-1] == pytest.approx(2.0)


def test_rk4_fourth_order_on_gauge_trajectory():
    ops = O.build_operators(O.build_grid(16))
    x = E.gauge_datum(ops.grid)
    exact = expm(ops.L) @ x.vector
    errs = []
    for dt in (0.02, 0.01, 0.005):
        cfg = E.EvolutionConfig(1.0, dt=dt, cfl=100.0, sample_interval=1.0)
        errs.append(ops.norm(E.evolve(x, ops, cfg).states[-1] - exact))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios > 12) & (ratios < 20))


def test_rk4_step_matrix_matches_rk4_step():
    rng = np.random.default_rng(6)
    A = rng.standard_normal((6, 6))
    y = rng.standard_normal(6)
    step = ode.rk4_step(lambda t, v: A @ v, 0.0, y, 0.1)
    assert np.allclose(E.rk4_step_matrix(A, 0.1) @ y, step, rtol=1e-14, atol=1e-14)


def test_fit_rate_synthetic():
    tau = np.linspace(0, 10, 201)
    fit = E.fit_rate(tau, np.exp(0.7 * tau), (2.0, 10.0))
    assert fit.rate == pytest.approx(0.7, abs=1e-10)
    assert fit.residual <= 1e-10


def test_fit_rate_degenerate_window():
    tau = np.linspace(0, 10, 11)
    with pytest.raises(DomainError):
        E.fit_rate(tau, np.ones_like(tau), (2.0, 3.0))
    with pytest.raises(DomainError):
        E.fit_rate(tau, np.ones_like(tau), (5.0, 20.0))
    with pytest.raises(DomainError):
        E.fit_rate(tau, np.zeros_like(tau), (2.0, 10.0))


def test_coarse_growth_bound(ops96):
    C = O.lprime_norm(ops96)
    rng = np.random.default_rng(7)
    for _ in range(50):
        tr = E.evolve(E.random_state(ops96.grid, rng, decay=0.6), ops96,
                      E.EvolutionConfig(2.0, sample_interval=0.1))
        assert np.all(tr.norms <= tr.norms[0] * np.exp((-0.5 + C) * tr.tau) * (1 + 1e-6))


def test_stable_subspace_bound(ops96, riesz96, s0):
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(50):
        x = E.project_out_gauge(E.random_state(ops96.grid, rng, decay=0.6), riesz96)
        tr = E.evolve(x, ops96, E.EvolutionConfig(10.0, sample_interval=0.1))
        worst = max(worst, np.max(tr.norms / (tr.norms[0] * np.exp((s0 + 0.05) * tr.tau))))
    assert worst <= 10


def test_instability_detector(ops96):
    bad = dataclasses.replace(ops96, L=ops96.L + 10 * np.eye(2 * ops96.n))
    with pytest.raises(InstabilityError) as exc:
        E.evolve(E.gauge_datum(ops96.grid), bad, E.EvolutionConfig(2.0))
    assert exc.value.growth > np.exp(5 * (exc.value.tau))


def test_trajectory_lookup(ops96):
    tr = E.evolve(E.gauge_datum(ops96.grid), ops96, E.EvolutionConfig(0.5, sample_interval=0.1))
    assert tr.at(0.2).tau == pytest.approx(0.2)
    with pytest.raises(DomainError):
        tr.at(0.25)


def test_csv_export(ops96, tmp_path):
    tr = E.evolve(E.gauge_datum(ops96.grid), ops96, E.EvolutionConfig(0.5, sample_interval=0.1))
    path = tmp_path / "traj.csv"
    tr.to_csv(path, projected_norm=np.zeros_like(tr.norms))
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["tau", "norm", "projected_norm"]
    assert len(rows) == len(tr.tau) + 1
    assert float(rows[-1][1]) == pytest.approx(tr.norms[-1])


def test_free_exact_solution(ops96):
    rep = E.validate_free_exact(0.3, ops96)
    assert rep.max_error <= 1e-4
    assert rep.tau_span == pytest.approx(1.0)


def test_free_exact_eps_range(ops96):
    for eps in (0.05, 0.6):
        with pytest.raises(DomainError):
            E.validate_free_exact(eps, ops96)


def test_local_energy_exponent():
    assert E.local_energy_scaling(0.3) == pytest.approx(0.6, abs=0.03)


def test_blowup_norm_rate():
    assert E.blowup_norm_rate() == pytest.approx(-1.0, abs=0.02)


def test_higher_energy_profile_two_routes():
    assert E.higher_energy_profile_integral() == pytest.approx(HIGHER_ENERGY_PROFILE, rel=1e-12)
    for s in (0.5, 0.1, 1e-3):
        assert s * E.higher_energy_blowup(1.0 - s) == pytest.approx(HIGHER_ENERGY_PROFILE, rel=1e-10)
