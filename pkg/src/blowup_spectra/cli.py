"""Command-line interface.

Every subcommand prints a JSON report (or writes it with --out) and stores it in
the result cache. Exit status: 0 success, 1 failed acceptance gate, 2 bad
configuration.
"""

from __future__ import annotations

import functools
import logging
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import click
import numpy as np

from . import defaults as D
from . import evolution as E
from . import gates as G
from . import operator as O
from . import resonance as R
from . import shooting as S
from .cache import Cache
from .errors import ConfigError, ContourError, DomainError, ResonanceError
from .report import Report

EXIT_GATE = 1
EXIT_CONFIG = 2


@dataclass
class RunConfig:
    command: str
    params: dict
    n: int | None = None
    output: str | None = None
    cache_dir: str | None = None
    use_cache: bool = True
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n is not None and not (D.GRID_MIN <= self.n <= D.GRID_MAX):
            raise ConfigError(f"--n must lie in [{D.GRID_MIN}, {D.GRID_MAX}], got {self.n}")

    def key_inputs(self):
        out = dict(self.params)
        if self.n is not None:
            out["n"] = self.n
        return out


def _emit(report: Report, output):
    text = report.to_json()
    if output:
        Path(output).write_text(text + "\n")
    else:
        click.echo(text)


def _run(cfg: RunConfig, compute):
    """Serve from the cache or compute, store and emit a report."""
    cache = Cache(cfg.cache_dir)
    inputs = cfg.key_inputs()
    if cfg.use_cache:
        hit = cache.lookup(cfg.command, inputs)
        if hit is not None:
            _emit(hit, cfg.output)
            return hit
    t0 = time.perf_counter()
    results = compute()
    report = Report(cfg.command, inputs, results, {"total_ms": 1e3 * (time.perf_counter() - t0)})
    report = report.normalized()
    cache.put(report)
    _emit(report, cfg.output)
    return report


def _guard(fn):
    """Turn configuration and domain errors into exit status 2 with a readable message."""

    @functools.wraps(fn)
    def wrapper(*args, **kw):
        try:
            return fn(*args, **kw)
        except (ConfigError, DomainError, ResonanceError, ContourError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)

    return wrapper


common = [
    click.option("--out", "output", type=click.Path(dir_okay=False), help="Write the report here."),
    click.option("--cache-dir", type=click.Path(file_okay=False), help="Cache directory override."),
    click.option("--no-cache", is_flag=True, help="Recompute even if a cached report exists."),
]


def with_common(fn):
    for opt in reversed(common):
        fn = opt(fn)
    return fn


def _shoot_cfg(rtol, atol):
    return S.ShootConfig(ode_rtol=rtol, ode_atol=atol)


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
@click.version_option(package_name="artifact")
def main(verbose):
    """Spectral and semigroup analysis of the self-similar wave-map blow-up."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING)


@main.command()
@click.option("--eq", "equation", type=click.Choice(["primal", "dual"]), default="primal")
@click.option("--rect", nargs=4, type=float, required=True, help="re_min re_max im_min im_max")
@click.option("--grid", nargs=2, type=int, default=(5, 5), help="Seed grid for candidates.")
@click.option("--rtol", type=float, default=D.ODE_RTOL)
@click.option("--atol", type=float, default=D.ODE_ATOL)
@with_common
@_guard
def scan(equation, rect, grid, rtol, atol, output, cache_dir, no_cache):
    """Winding count and refined eigenvalues in a lambda-rectangle."""
    params = {"eq": equation, "rect": list(rect), "grid": list(grid), "rtol": rtol, "atol": atol}
    cfg = RunConfig("scan", params, output=output, cache_dir=cache_dir, use_cache=not no_cache)
    sc = _shoot_cfg(rtol, atol)

    def compute():
        res = S.count_zeros(equation, rect, sc, grid=tuple(grid))
        return {
            "winding": res.winding,
            "candidates": [asdict(c) for c in res.candidates],
            "boundary_samples": res.boundary_samples,
            "min_abs_mismatch": res.min_abs_mismatch,
        }

    _run(cfg, compute)


@main.command()
@click.option("--eq", "equation", type=click.Choice(["primal", "dual"]), default="primal")
@click.option("--seed", type=complex, required=True)
@click.option("--rtol", type=float, default=D.ODE_RTOL)
@click.option("--atol", type=float, default=D.ODE_ATOL)
@with_common
@_guard
def refine(equation, seed, rtol, atol, output, cache_dir, no_cache):
    """Refine an eigenvalue from a seed by the secant method."""
    params = {"eq": equation, "seed": seed, "rtol": rtol, "atol": atol}
    cfg = RunConfig("refine", params, output=output, cache_dir=cache_dir, use_cache=not no_cache)
    sc = _shoot_cfg(rtol, atol)
    _run(cfg, lambda: {"candidate": asdict(S.find_eigenvalue(equation, seed, sc))})


@main.command("dual-check")
@click.option("--seed", type=complex, default=-0.5, show_default=True)
@with_common
@_guard
def dual_check(seed, output, cache_dir, no_cache):
    """Map a primal eigenfunction to the dual side and check the dual equation."""
    cfg = RunConfig("dual-check", {"seed": seed}, output=output, cache_dir=cache_dir,
                    use_cache=not no_cache)

    def compute():
        primal = S.find_eigenvalue("primal", seed)
        dual = S.find_eigenvalue("dual", seed)
        chk = S.dual_check(primal.lam)
        return {
            "primal": primal.lam,
            "dual": dual.lam,
            "difference": abs(primal.lam - dual.lam),
            "dual_residual": chk.residual,
            "dual_value_at_1": chk.boundary_value,
        }

    _run(cfg, compute)


@main.command()
@click.option("--rect", nargs=4, type=float, default=(-2.0, 2.0, -2.95, -0.05), show_default=True,
              help="mu-rectangle re_min re_max im_min im_max")
@with_common
@_guard
def resonance(rect, output, cache_dir, no_cache):
    """Wronskian zeros of the half-line problem, mapped back to lambda."""
    cfg = RunConfig("resonance", {"rect": list(rect)}, output=output, cache_dir=cache_dir,
                    use_cache=not no_cache)

    def compute():
        sc = R.scan_resonances(rect)
        rows = []
        for c in sc.candidates:
            rows.append({
                "mu": c.mu,
                "lambda": c.lambda_equivalent,
                "wronskian": c.wronskian,
                "dual_mismatch_at_lambda": abs(S.mismatch("dual", c.lambda_equivalent)),
            })
        return {"winding": sc.winding, "resonances": rows, "boundary_samples": sc.boundary_samples}

    _run(cfg, compute)


@main.command()
@click.option("--n", type=int, default=96, show_default=True)
@click.option("--count", type=int, default=6, show_default=True)
@with_common
@_guard
def spectrum(n, count, output, cache_dir, no_cache):
    """Rightmost eigenvalues of the discretized generator with reliability flags."""
    cfg = RunConfig("spectrum", {"count": count}, n=n, output=output, cache_dir=cache_dir,
                    use_cache=not no_cache)

    def compute():
        sp = O.spectrum(O.build_operators(O.build_grid(n)))
        k = slice(0, count)
        return {
            "eigenvalues": sp.eigenvalues[k],
            "reliable": sp.reliable[k],
            "drift": sp.drift[k],
            "residuals": sp.residuals[k],
        }

    _run(cfg, compute)


@main.command()
@click.option("--n", type=int, default=96, show_default=True)
@with_common
@_guard
def project(n, output, cache_dir, no_cache):
    """Riesz projection onto the gauge eigenvalue and its diagnostics."""
    cfg = RunConfig("project", {}, n=n, output=output, cache_dir=cache_dir, use_cache=not no_cache)

    def compute():
        ops = O.build_operators(O.build_grid(n))
        P = O.riesz_projection(ops)
        g = O.gauge_mode(ops)
        return {
            "idempotency": P.idempotency,
            "rank": P.rank,
            "leading_singular_values": P.singular_values[:3],
            "Pg_minus_g": float(ops.norm(P.P @ g - g) / ops.norm(g)),
            "commutator": ops.op_norm(P.P @ ops.L - ops.L @ P.P),
        }

    _run(cfg, compute)


@main.command()
@click.option("--n", type=int, default=96, show_default=True)
@click.option("--datum", type=click.Choice(["gauge", "polynomial", "random"]), default="polynomial",
              show_default=True)
@click.option("--generator", type=click.Choice(["L", "L0"]), default="L", show_default=True)
@click.option("--t-final", type=float, default=10.0, show_default=True)
@click.option("--project/--no-project", "do_project", default=True, show_default=True)
@click.option("--window", nargs=2, type=float, default=D.RATE_WINDOW, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True, help="RNG seed for --datum random.")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), help="Write the trajectory here.")
@with_common
@_guard
def evolve(n, datum, generator, t_final, do_project, window, seed, csv_path, output, cache_dir,
           no_cache):
    """Evolve initial data and fit the decay rate."""
    params = {"datum": datum, "generator": generator, "t_final": t_final, "project": do_project,
              "window": list(window), "seed": seed}
    cfg = RunConfig("evolve", params, n=n, output=output, cache_dir=cache_dir,
                    use_cache=not no_cache and csv_path is None)

    def compute():
        ops = O.build_operators(O.build_grid(n))
        if datum == "gauge":
            x = E.gauge_datum(ops.grid)
        elif datum == "polynomial":
            x = G.canonical_projected_datum(ops.grid)
        else:
            x = E.random_state(ops.grid, np.random.default_rng(seed))
        P = O.riesz_projection(ops) if do_project else None
        if P is not None:
            x = E.project_out_gauge(x, P)
        tr = E.evolve(x, ops, E.EvolutionConfig(t_final), generator=generator)
        if csv_path:
            proj = None
            if P is not None:
                proj = ops.norm((tr.states - tr.states @ P.P.T).T)
            tr.to_csv(csv_path, projected_norm=proj)
        fit = E.fit_rate(tr.tau, tr.norms, tuple(window))
        return {"rate": fit.rate, "fit_residual": fit.residual, "dt": tr.dt,
                "final_norm_ratio": float(tr.norms[-1] / tr.norms[0])}

    _run(cfg, compute)


@main.command()
@click.option("--only", type=int, multiple=True, help="Run only these gate numbers.")
@with_common
@_guard
def check(only, output, cache_dir, no_cache):
    """Run the acceptance gates; exit 1 if any fails."""
    t0 = time.perf_counter()
    results = G.run_all(set(only) if only else None)
    for r in results:
        click.echo(r.line(), err=True)
    payload = {"gates": [asdict(r) for r in results], "all_passed": all(r.passed for r in results)}
    report = Report("check", {"only": sorted(only)}, payload,
                    {"total_ms": 1e3 * (time.perf_counter() - t0)}).normalized()
    Cache(cache_dir).put(report)
    _emit(report, output)
    if not payload["all_passed"]:
        sys.exit(EXIT_GATE)


@main.command()
@click.option("--cache-dir", type=click.Path(file_okay=False), help="Cache directory override.")
@click.option("--out", "output", type=click.Path(dir_okay=False), help="Write the summary here.")
def report(cache_dir, output):
    """Aggregate every cached report of this tool version into one summary."""
    entries = Cache(cache_dir).entries()
    summary = Report(
        "report",
        {"cache_dir": str(Cache(cache_dir).dir)},
        {"entries": [{"command": e.command, "inputs": e.inputs, "results": e.results}
                     for e in entries]},
    ).normalized()
    _emit(summary, output)


if __name__ == "__main__":
    main()
