"""Acceptance gates: each returns a GateResult with its measured values and runtime."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import evolution as E
from . import operator as O
from . import resonance as R
from . import shooting as S

LEADING_STABLE = -0.542466


@dataclass
class GateResult:
    number: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d} {self.name} ({self.seconds:.1f} s)"


def _timed(number, name, budget=None):
    def wrap(fn):
        def run(*args, **kw):
            t0 = time.perf_counter()
            passed, detail = fn(*args, **kw)
            dt = time.perf_counter() - t0
            if budget is not None:
                detail["runtime_budget_s"] = budget
                passed = passed and dt < budget
            return GateResult(number, name, bool(passed), detail, dt)

        run.number = number
        run.__doc__ = fn.__doc__
        return run

    return wrap


class _Ops:
    """Operator discretizations shared between gates."""

    def __init__(self):
        self._ops = {}
        self._riesz = {}

    def ops(self, n):
        if n not in self._ops:
            self._ops[n] = O.build_operators(O.build_grid(n))
        return self._ops[n]

    def riesz(self, n):
        if n not in self._riesz:
            self._riesz[n] = O.riesz_projection(self.ops(n))
        return self._riesz[n]


@_timed(1, "gauge eigenvalue by shooting", budget=1.0)
def gate_gauge(ctx=None):
    c = S.find_eigenvalue("primal", 0.9)
    err = abs(c.lam - 1)
    return c.converged and err <= 1e-8, {"lambda": c.lam, "error": err}


@_timed(2, "leading stable mode, three methods", budget=30.0)
def gate_three_ways(ctx=None):
    tols = (1e-8, 1e-9, 1e-10)
    seqs = {"primal": [], "dual": [], "resonance": []}
    for tol in tols:
        cfg = S.ShootConfig(ode_rtol=tol, ode_atol=tol * 1e-2)
        seqs["primal"].append(S.find_eigenvalue("primal", -0.5, cfg).lam)
        seqs["dual"].append(S.find_eigenvalue("dual", -0.5, cfg).lam)
        jc = R.JostConfig(ode_rtol=tol, ode_atol=tol * 1e-2)
        seqs["resonance"].append(R.find_resonance(R.lambda_mu_map(-0.5), jc).lambda_equivalent)
    final = {k: v[-1] for k, v in seqs.items()}
    extrap = {k: S.richardson(v, 10.0, 1) for k, v in seqs.items()}
    vals = list(final.values())
    pairwise = max(abs(a - b) for a in vals for b in vals)
    self_conv = max(abs(final[k] - extrap[k]) for k in final)
    anchor = max(abs(v - LEADING_STABLE) for v in vals)
    ok = pairwise <= 1e-4 and self_conv <= 1e-5 and anchor <= 1e-5
    return ok, {
        "values": final,
        "richardson": extrap,
        "pairwise": pairwise,
        "self_convergence": self_conv,
        "distance_to_quoted": anchor,
    }


@_timed(3, "mode-count certification", budget=120.0)
def gate_winding(ctx=None):
    rects = {(0.5, 1.5, -2.0, 2.0): 1, (0.5, 1.5, 2.0, 10.0): 0, (-0.45, 0.45, -10.0, 10.0): 0}
    got = {}
    for rect in rects:
        got[rect] = S.winding_number(lambda z: S.mismatch("primal", z), rect)[0]
    ok = all(got[r] == w for r, w in rects.items())
    return ok, {"windings": {str(r): got[r] for r in rects}}


@_timed(4, "discrete spectrum", budget=60.0)
def gate_spectrum(ctx=None):
    ctx = ctx or _Ops()
    out = {}
    ok = True
    for n, tol in ((96, 5e-3), (192, 1e-4)):
        sp = O.spectrum(ctx.ops(n))
        rel = sp.reliable_eigenvalues()
        first, second = rel[0], rel[1]
        others = [complex(z) for z in rel[2:] if z.real > -0.45]
        out[n] = {"first": first, "second": second, "others_right_of_-0.45": others}
        ok &= abs(first - 1) <= 1e-6 and abs(second - LEADING_STABLE) <= tol and not others
    out["s0"] = out[192]["second"]
    return ok, out


@_timed(5, "Riesz projection onto the gauge mode")
def gate_riesz(ctx=None):
    ctx = ctx or _Ops()
    ops = ctx.ops(96)
    P = ctx.riesz(96)
    g = O.gauge_mode(ops)
    pg = float(ops.norm(P.P @ g - g) / ops.norm(g))
    comm = ops.op_norm(P.P @ ops.L - ops.L @ P.P)
    ok = P.idempotency <= 1e-8 and P.rank == 1 and pg <= 1e-8 and comm <= 1e-7
    return ok, {"idempotency": P.idempotency, "rank": P.rank, "Pg_minus_g": pg, "commutator": comm}


@_timed(6, "dissipativity of the free generator")
def gate_dissipativity(ctx=None):
    ctx = ctx or _Ops()
    rep = O.dissipativity_check(ctx.ops(96), trials=1000, seed=0)
    return rep.violations == 0, {"violations": rep.violations, "worst_margin": rep.worst_margin}


@_timed(7, "resolvent bounds")
def gate_resolvent(ctx=None):
    ctx = ctx or _Ops()
    ops = ctx.ops(96)
    samples = [complex(re, im) for re, ims in ((0.0, 7), (0.5, 7), (1.0, 6))
               for im in np.linspace(-20, 20, ims)]
    excess = max(O.resolvent_norm(ops, z, "L0") - 1 / (z.real + 0.5) for z in samples)
    ks = np.array([5, 10, 20, 50])
    far = np.array([O.resolvent_norm(ops, -0.4 + 1j * k, "L") for k in ks])
    slope = float(np.polyfit(np.log(ks), np.log(far), 1)[0])
    ok = excess <= 1e-6 and slope <= 0.05
    return ok, {"max_excess_L0": excess, "far_norms_L": far, "loglog_slope": slope}


def canonical_projected_datum(grid):
    """Position perturbation f = psi^T + r^3 (the lowest admissible polynomial)."""

    def f(r):
        return 2 * np.arctan(r) + r**3

    def df(r):
        return 2 / (1 + r * r) + 3 * r * r

    def g(r):
        return 2 * r / (1 + r * r)

    return E.initial_data(f, df, g, grid)


@_timed(8, "semigroup rates", budget=120.0)
def gate_rates(ctx=None, s0=None):
    ctx = ctx or _Ops()
    ops = ctx.ops(96)
    if s0 is None:
        s0 = O.spectrum(ops).reliable_eigenvalues()[1].real
    tr = E.evolve(E.gauge_datum(ops.grid), ops, E.EvolutionConfig(3.0))
    gauge_dev = float(np.max(np.abs(tr.norms / tr.norms[0] / np.exp(tr.tau) - 1)))
    rng = np.random.default_rng(0)
    worst = -np.inf
    for _ in range(50):
        x = E.random_state(ops.grid, rng, decay=0.6)
        t = E.evolve(x, ops, E.EvolutionConfig(10.0, sample_interval=0.1), generator="L0")
        worst = max(worst, float(np.max(t.norms / (t.norms[0] * np.exp(-t.tau / 2)))))
    x = E.project_out_gauge(canonical_projected_datum(ops.grid), ctx.riesz(96))
    t = E.evolve(x, ops, E.EvolutionConfig(10.0))
    fit = E.fit_rate(t.tau, t.norms, (2.0, 10.0))
    ok = gauge_dev <= 0.01 and worst <= 1 + 1e-6 and abs(fit.rate - s0) <= 0.02
    return ok, {
        "gauge_max_rel_dev": gauge_dev,
        "free_worst_ratio": worst,
        "projected_rate": fit.rate,
        "s0": s0,
    }


@_timed(9, "exact free solution and energy exponents")
def gate_diagnostics(ctx=None):
    ctx = ctx or _Ops()
    err = E.validate_free_exact(0.3, ctx.ops(96)).max_error
    le = E.local_energy_scaling(0.3)
    bu = E.blowup_norm_rate()
    ok = err <= 1e-4 and abs(le - 0.6) <= 0.03 and abs(bu + 1) <= 0.02
    return ok, {"free_exact_error": err, "local_energy_exponent": le, "blowup_exponent": bu}


@_timed(10, "obstruction integral")
def gate_obstruction(ctx=None):
    v = O.obstruction_integral()
    return v >= 0.05, {"value": v}


GATES = [
    gate_gauge,
    gate_three_ways,
    gate_winding,
    gate_spectrum,
    gate_riesz,
    gate_dissipativity,
    gate_resolvent,
    gate_rates,
    gate_diagnostics,
    gate_obstruction,
]


def run_all(only=None):
    ctx = _Ops()
    results = []
    s0 = None
    for gate in GATES:
        if only and gate.number not in only:
            continue
        if gate is gate_rates:
            res = gate(ctx, s0=s0)
        else:
            res = gate(ctx)
        if gate is gate_spectrum:
            s0 = res.detail["s0"].real
        results.append(res)
    return results
