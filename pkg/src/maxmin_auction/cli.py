"""Command-line front door.

Every command is a pure function of its flags (plus any input files): output
is machine-readable JSON on stdout (CSV files for ``curves``), floats are
printed with 12 significant digits, and repeated runs are byte-identical.

Exit codes: 0 success; 1 a verification check failed; 2 invalid input or
domain error; 3 an iterative routine failed to converge; 4 file I/O error.
The environment variable ``MAXMIN_SEED`` supplies the seed when ``--seed``
is absent.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import adversary as adv
from . import extensions as ext
from . import functional as fn
from . import mechanism as mech
from . import upper_bound as ub
from .constants import (
    ModelParams,
    SolvedConstants,
    reserve_cdf,
    reserve_pdf,
    signal_cdf,
    solve_a,
)
from .distributions import PiecewiseCdf, read_cdf_csv, write_cdf_csv
from .errors import (
    ConvergenceError,
    DegenerateError,
    DomainError,
    MeanMismatchError,
    MonotonicityError,
)
from .mechanism import uniform_pairs
from .quadrature import adaptive_simpson

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_DOMAIN = 2
EXIT_CONVERGENCE = 3
EXIT_IO = 4


@dataclass(frozen=True)
class RunConfig:
    """Parsed invocation: one command, one of mu/delta, sizes, seed, paths."""

    command: str
    mu: float | None = None
    delta: float | None = None
    grid: int = 1000
    grid_k: int = 500
    grid_n: int = 50
    n_samples: int = 1_000_000
    seed: int = 0
    out: str | None = None
    prior: str | None = None
    signal_csv: str | None = None
    which: str = "reserve"
    reserve: str = "optimal"
    dump_mechanism: str | None = None
    tol_root: float = 1e-12
    tol_quad: float = 1e-9


# --------------------------------------------------------------------- #
# JSON with fixed float formatting
# --------------------------------------------------------------------- #


def _format_float(v: float) -> str:
    if math.isnan(v):
        return "null"
    if math.isinf(v):
        raise ValueError("cannot serialise infinity")
    return format(v, ".12g")


def dump_json(obj, indent: int = 0) -> str:
    """Serialise to JSON with all floats at 12 significant digits."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f'{pad}  "{k}": {dump_json(v, indent + 1)}' for k, v in obj.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[" + ", ".join(dump_json(v, indent) for v in obj) + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    raise TypeError(f"cannot serialise {type(obj)}")


def _emit(payload: dict) -> None:
    sys.stdout.write(dump_json(payload) + "\n")


def _constants(config: RunConfig) -> SolvedConstants:
    if config.mu is None:
        raise DomainError("this command requires --mu")
    return solve_a(
        ModelParams(mu=config.mu, tol_root=config.tol_root, tol_quad=config.tol_quad)
    )


# --------------------------------------------------------------------- #
# commands
# --------------------------------------------------------------------- #


def cmd_solve(config: RunConfig) -> int:
    c = _constants(config)
    _emit(
        {
            "schema": SCHEMA_VERSION,
            "command": "solve",
            "mu": c.mu,
            "a": c.a,
            "lambda": c.lam,
            "revenue_guarantee": c.revenue_guarantee,
            "h_at_a": c.h_at_a,
            "root_residual": abs(c.a * (1.0 - math.log(c.a)) - c.mu),
        }
    )
    return EXIT_OK


def cmd_dominated(config: RunConfig) -> int:
    c = _constants(config)
    value = mech.dominated_equilibrium_revenue(c)
    _emit(
        {
            "schema": SCHEMA_VERSION,
            "command": "dominated",
            "mu": c.mu,
            "value": value,
            "revenue_guarantee": c.revenue_guarantee,
            "below_guarantee": value < c.revenue_guarantee,
        }
    )
    return EXIT_OK


def cmd_simulate(config: RunConfig) -> int:
    c = _constants(config)
    if config.signal_csv is not None:
        signal = read_cdf_csv(config.signal_csv)
    else:
        signal = PiecewiseCdf.signal(c)
    report = mech.mc_revenue(c, signal, config.n_samples, config.seed)
    payload = {"schema": SCHEMA_VERSION, "command": "simulate"}
    payload.update(report.to_json_dict())
    _emit(payload)
    return EXIT_OK


def cmd_second_moment(config: RunConfig) -> int:
    if config.delta is None:
        raise DomainError("second-moment requires --delta")
    sol = ext.second_moment_solution(ext.SecondMomentParams(delta=config.delta))
    _emit(
        {
            "schema": SCHEMA_VERSION,
            "command": "second-moment",
            "delta": config.delta,
            "a": sol.a,
            "guarantee": sol.guarantee,
            "reserve_kind": sol.reserve.kind,
            "signal_atom_at_one": sol.a,
        }
    )
    return EXIT_OK


def cmd_mps_check(config: RunConfig) -> int:
    if config.prior is None:
        raise DomainError("mps-check requires --prior CSV")
    c = _constants(config)
    prior = read_cdf_csv(config.prior)
    report = ext.mps_check(prior, c, grid=config.grid)
    _emit(
        {
            "schema": SCHEMA_VERSION,
            "command": "mps-check",
            "mu": c.mu,
            "passed": report.passed,
            "max_violation": report.max_violation,
            "worst_x": report.worst_x,
            "gap_at_one": report.gap_at_one,
            "grid_size": report.grid_size,
        }
    )
    return EXIT_OK


def _reserve_distribution(config: RunConfig, c: SolvedConstants) -> PiecewiseCdf:
    if config.reserve == "optimal":
        return PiecewiseCdf.reserve(c)
    if config.reserve == "uniform":
        return PiecewiseCdf.uniform()
    if config.reserve == "zero-atom":
        return adv.reserve_with_zero_atom(c)
    if config.reserve == "linear-ramp":
        return adv.reserve_with_linear_ramp(c)
    raise DomainError(f"unknown reserve choice: {config.reserve}")


def cmd_adversary(config: RunConfig) -> int:
    if config.delta is not None:
        result = adv.minimize_revenue(
            PiecewiseCdf.uniform(),
            None,
            config.grid_k,
            constraint="second-moment",
            target=config.delta,
        )
        payload = {
            "schema": SCHEMA_VERSION,
            "command": "adversary",
            "delta": config.delta,
            "constraint": "second-moment",
        }
    else:
        c = _constants(config)
        h_dist = _reserve_distribution(config, c)
        result = adv.minimize_revenue(h_dist, ModelParams(mu=c.mu), config.grid_k)
        payload = {
            "schema": SCHEMA_VERSION,
            "command": "adversary",
            "mu": c.mu,
            "reserve": config.reserve,
            "constraint": "mean",
            "revenue_guarantee": c.revenue_guarantee,
        }
    payload.update(
        {
            "value": result.value,
            "lambda_hat": result.lambda_hat,
            "constraint_residual": result.constraint_residual,
            "projection_delta": result.projection_delta,
            "grid_size": config.grid_k,
        }
    )
    if config.out is not None:
        write_cdf_csv(config.out, result.grid.x, result.grid.values)
    _emit(payload)
    return EXIT_OK


def cmd_upper_bound(config: RunConfig) -> int:
    c = _constants(config)
    optimum, mechanism = ub.lp_max_revenue(c, config.grid_n)
    bound = ub.analytic_bound(c)
    if config.dump_mechanism is not None:
        with open(config.dump_mechanism, "w") as fh:
            fh.write(dump_json(mechanism.to_json_dict()) + "\n")
    _emit(
        {
            "schema": SCHEMA_VERSION,
            "command": "upper-bound",
            "mu": c.mu,
            "n": config.grid_n,
            "lp_optimum": optimum,
            "analytic_bound": bound,
            "gap": optimum - bound,
        }
    )
    return EXIT_OK


def cmd_curves(config: RunConfig) -> int:
    c = _constants(config)
    if config.out is None:
        raise DomainError("curves requires --out PATH")
    if config.which == "reserve":
        x = np.linspace(0.0, 1.0, config.grid)
        write_cdf_csv(config.out, x, reserve_cdf(c, x))
    elif config.which == "signal":
        x = np.linspace(0.0, 1.0, config.grid)
        masses = np.zeros_like(x)
        masses[-1] = c.a
        write_cdf_csv(config.out, x, signal_cdf(c, x), masses)
    elif config.which == "adversary":
        result = adv.minimize_revenue(
            PiecewiseCdf.reserve(c), ModelParams(mu=c.mu), config.grid
        )
        write_cdf_csv(config.out, result.grid.x, result.grid.values)
    else:
        raise DomainError(f"unknown curve: {config.which}")
    _emit(
        {
            "schema": SCHEMA_VERSION,
            "command": "curves",
            "which": config.which,
            "mu": c.mu,
            "rows": config.grid,
            "out": config.out,
        }
    )
    return EXIT_OK


# --------------------------------------------------------------------- #
# verify: the full invariant suite
# --------------------------------------------------------------------- #


def _payment_identity_worst_gap(c: SolvedConstants, seed: int, n_pairs: int) -> float:
    """Closed-form winner payment vs. the expected-reserve-payment oracle."""
    pairs = uniform_pairs(seed, 0, n_pairs)
    worst = 0.0
    for s1, s2 in pairs:
        hi, lo = (s1, s2) if s1 >= s2 else (s2, s1)
        closed = hi * reserve_cdf(c, hi) - adaptive_simpson(
            lambda t: reserve_cdf(c, t), lo, hi, c.tol_quad
        )
        # E[max(lo, r) 1{r <= hi}] = lo H(lo) + integral of r H'(r) over [lo, hi]
        oracle = lo * reserve_cdf(c, lo) + adaptive_simpson(
            lambda t: t * reserve_pdf(c, t), lo, hi, c.tol_quad
        )
        worst = max(worst, abs(closed - oracle))
    return worst


def run_verification(config: RunConfig) -> dict:
    """Execute every cross-check and return a JSON-ready report."""
    c = _constants(config)
    g_bar = PiecewiseCdf.signal(c)
    h_bar = PiecewiseCdf.reserve(c)
    checks: list[dict] = []

    def record(name: str, passed: bool, **detail) -> None:
        checks.append({"name": name, "passed": bool(passed), **detail})

    residual = abs(c.a * (1.0 - math.log(c.a)) - c.mu)
    record("root_residual", residual <= c.tol_root, value=residual)

    xs = np.linspace(0.01, 1.0, 100)
    xs = xs[np.abs(xs - c.a) > 1e-9]
    ode_worst = max(fn.check_ode(c, float(x)) for x in xs)
    record("ode_residual", ode_worst <= 1e-8, value=ode_worst)

    eps = 1e-6
    interior = xs[(xs > 0.02) & (xs < 1.0 - eps) & (np.abs(xs - c.a) > 0.01)]
    fd = (reserve_cdf(c, interior + eps) - reserve_cdf(c, interior - eps)) / (2 * eps)
    fd_worst = float(np.max(np.abs(fd - reserve_pdf(c, interior))))
    record("density_vs_finite_difference", fd_worst <= 1e-6, value=fd_worst)

    saddle = adv.verify_pointwise_saddle(c, config.grid_k)
    record(
        "pointwise_saddle",
        saddle.max_deviation < 1e-6,
        value=saddle.max_deviation,
    )

    quad = fn.revenue_functional(g_bar, h_bar)
    quad_gap = abs(quad.value - c.revenue_guarantee)
    record("functional_vs_closed_form", quad_gap <= 1e-6, value=quad_gap)

    report = mech.mc_revenue(c, g_bar, config.n_samples, config.seed)
    mc_gap = abs(report.value - quad.value)
    record(
        "mc_vs_quadrature",
        mc_gap <= 3.0 * report.std_error,
        value=mc_gap,
        std_error=report.std_error,
    )

    result = adv.minimize_revenue(h_bar, ModelParams(mu=c.mu), config.grid_k)
    adv_gap = abs(result.value - c.revenue_guarantee)
    window = (result.grid.x >= c.a + 0.02) & (result.grid.x <= 0.98)
    sup_dist = float(
        np.max(
            np.abs(
                result.grid.values[window] - signal_cdf(c, result.grid.x[window])
            )
        )
    )
    record(
        "adversary_minimum",
        adv_gap <= 2e-3 and sup_dist <= 0.01,
        value_gap=adv_gap,
        sup_distance=sup_dist,
        lambda_hat=result.lambda_hat,
    )

    optimum, _ = ub.lp_max_revenue(c, config.grid_n)
    bound = ub.analytic_bound(c)
    # discretization inflates the cap by O(1/n); 0.02 is the budget at n = 50
    lp_tol = max(0.02, 1.2 / config.grid_n)
    record(
        "lp_upper_bound",
        abs(optimum - bound) <= lp_tol,
        lp_optimum=optimum,
        analytic_bound=bound,
        tolerance=lp_tol,
    )

    for name, h_star in (
        ("p1p2_zero_atom", adv.reserve_with_zero_atom(c)),
        ("p1p2_linear_ramp", adv.reserve_with_linear_ramp(c)),
    ):
        verdict = adv.check_p1_p2(h_star, c)
        record(
            name,
            verdict.passed,
            p1_worst_gap=verdict.p1_worst_gap,
            p2_worst_value=verdict.p2_worst_value,
        )

    dom = mech.dominated_equilibrium_revenue(c)
    record(
        "dominated_below_guarantee",
        dom < c.revenue_guarantee,
        value=dom,
        revenue_guarantee=c.revenue_guarantee,
    )

    pay_worst = _payment_identity_worst_gap(c, config.seed, 100)
    record("payment_identity", pay_worst <= 1e-6, value=pay_worst)

    return {
        "schema": SCHEMA_VERSION,
        "command": "verify",
        "mu": c.mu,
        "seed": config.seed,
        "n_samples": config.n_samples,
        "checks": checks,
        "all_passed": all(ch["passed"] for ch in checks),
    }


def cmd_verify(config: RunConfig) -> int:
    report = run_verification(config)
    _emit(report)
    return EXIT_OK if report["all_passed"] else EXIT_CHECK_FAILED


# --------------------------------------------------------------------- #
# argument parsing
# --------------------------------------------------------------------- #


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maxmin-auction",
        description="Numerics for the worst-case-optimal auction with a random reserve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, mu: bool = True) -> None:
        if mu:
            p.add_argument("--mu", type=float, help="mean of the signal distribution")
        p.add_argument("--seed", type=int, default=None, help="RNG seed (fallback: MAXMIN_SEED)")
        p.add_argument("--tol-root", type=float, default=1e-12)
        p.add_argument("--tol-quad", type=float, default=1e-9)

    p = sub.add_parser("solve", help="solve the reserve parameter and constants")
    add_common(p)

    p = sub.add_parser("verify", help="run the full invariant suite")
    add_common(p)
    p.add_argument("--samples", type=int, default=100_000, dest="n_samples")
    p.add_argument("--grid-k", type=int, default=500)
    p.add_argument("--grid-n", type=int, default=50)

    p = sub.add_parser("curves", help="emit CDF curves as CSV")
    add_common(p)
    p.add_argument("--grid", type=int, default=1000)
    p.add_argument("--which", choices=("reserve", "signal", "adversary"), default="reserve")
    p.add_argument("--out", type=str, required=True)

    p = sub.add_parser("simulate", help="Monte Carlo revenue under a signal CDF")
    add_common(p)
    p.add_argument("--samples", type=int, default=1_000_000, dest="n_samples")
    p.add_argument("--signal-csv", type=str, default=None)

    p = sub.add_parser("adversary", help="minimize revenue over signal CDFs")
    add_common(p)
    p.add_argument("--delta", type=float, default=None, help="known second moment (uniform reserve)")
    p.add_argument("--grid-k", type=int, default=500)
    p.add_argument(
        "--reserve",
        choices=("optimal", "uniform", "zero-atom", "linear-ramp"),
        default="optimal",
    )
    p.add_argument("--out", type=str, default=None, help="write the minimizer CSV here")

    p = sub.add_parser("upper-bound", help="LP revenue cap on the quantile grid")
    add_common(p)
    p.add_argument("--grid-n", type=int, default=50)
    p.add_argument("--dump-mechanism", type=str, default=None)

    p = sub.add_parser("mps-check", help="mean-preserving-spread admissibility of a prior")
    add_common(p)
    p.add_argument("--prior", type=str, required=True)
    p.add_argument("--grid", type=int, default=4001)

    p = sub.add_parser("second-moment", help="saddle point under a known second moment")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("dominated", help="revenue of the dominated no-signal equilibrium")
    add_common(p)
    return parser


_HANDLERS = {
    "solve": cmd_solve,
    "verify": cmd_verify,
    "curves": cmd_curves,
    "simulate": cmd_simulate,
    "adversary": cmd_adversary,
    "upper-bound": cmd_upper_bound,
    "mps-check": cmd_mps_check,
    "second-moment": cmd_second_moment,
    "dominated": cmd_dominated,
}


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    seed = getattr(args, "seed", None)
    if seed is None:
        seed = int(os.environ.get("MAXMIN_SEED", "0"))
    mu = getattr(args, "mu", None)
    delta = getattr(args, "delta", None)
    if mu is not None and delta is not None:
        raise DomainError("give exactly one of --mu and --delta")
    return RunConfig(
        command=args.command,
        mu=mu,
        delta=delta,
        grid=getattr(args, "grid", 1000),
        grid_k=getattr(args, "grid_k", 500),
        grid_n=getattr(args, "grid_n", 50),
        n_samples=getattr(args, "n_samples", 1_000_000),
        seed=seed,
        out=getattr(args, "out", None),
        prior=getattr(args, "prior", None),
        signal_csv=getattr(args, "signal_csv", None),
        which=getattr(args, "which", "reserve"),
        reserve=getattr(args, "reserve", "optimal"),
        dump_mechanism=getattr(args, "dump_mechanism", None),
        tol_root=getattr(args, "tol_root", 1e-12),
        tol_quad=getattr(args, "tol_quad", 1e-9),
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config_from_args(args)
        return _HANDLERS[args.command](config)
    except (DomainError, MeanMismatchError, MonotonicityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ConvergenceError, DegenerateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
