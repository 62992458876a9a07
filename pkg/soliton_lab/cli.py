"""
Command-Line Front End
======================

    python -m soliton_lab verify --model cigar --identities lemma1 --points 50 --seed 7
    python -m soliton_lab decay --model bryant --quantity R --rmin 100 --rmax 10000 --n 32
    python -m soliton_lab decay --table-exponents --a 1 --b 1,1.5,2
    python -m soliton_lab bryant --rmax 1e4 --tol 1e-10 --out profile.csv
    python -m soliton_lab report --input run.json --csv run.csv

Exit codes: 0 all checks pass, 1 check failures, 2 usage or config errors.
Logs go to stderr; stdout carries only CSV tables.
"""

import argparse
import logging
import sys
from typing import Callable, Dict, List, Optional

from .backend.bryant import bryant_model
from .backend.decay_analysis import TheoremParams, exponent_table, measure_decay
from .backend.lab_config import RunConfig, build_run_config, effective_workers, load_config_file
from .backend.lab_exceptions import ConfigError, IntegrationFailureError, PreconditionError
from .backend.profile_cache import ProfileCache, cached_bryant_profile
from .backend.report_io import (
    build_envelope,
    format_real,
    read_json,
    render_csv,
    write_csv,
    write_json,
    write_profile_csv,
)
from .backend.soliton_models import (
    SolitonModel,
    cigar_cross_line_model,
    cigar_model,
    euclidean_model,
    flat_spheres_model,
)
from .backend.surface_calculus import DerivativeReading
from .backend.verification import IdentitySuite, run_suite, summarize

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

DEFAULT_PROFILE_RADIUS = 1e4


# ============================================================================
# Argument parsing
# ============================================================================

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="Plain-text 'key = value' config file; flags override it")
    parser.add_argument("--threads", help="Worker threads (0 = auto)")
    parser.add_argument("--cache-dir", help="Directory of the Bryant profile cache")
    parser.add_argument("--no-cache", dest="cache_enabled", action="store_const", const="false",
                        help="Integrate Bryant profiles without the cache")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR (default WARNING)")
    parser.add_argument("--json", help="Write the JSON report here")
    parser.add_argument("--csv", help="Write the CSV report here")


def build_parser() -> argparse.ArgumentParser:
    """All flags are read as strings; lab_config converts and validates them."""
    parser = argparse.ArgumentParser(
        prog="soliton_lab",
        description="Numerical checks of level-set identities on steady gradient Ricci solitons",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="Run identity residual suites")
    _add_common(verify)
    verify.add_argument("--model", help="cigar, cigarxr, euclidean, euclidean2, flat_spheres or bryant")
    verify.add_argument("--identities", help="Comma-separated identity ids (default: all)")
    verify.add_argument("--points", help="Number of sampled points per model")
    verify.add_argument("--seed", help="Sampler seed")
    verify.add_argument("--region", help="Sampler region 'lo,hi' (model default when omitted)")
    verify.add_argument("--sigmas", help="Comma-separated σ values")
    verify.add_argument("--step", help="Finite-difference step (curvature-scaled default)")
    verify.add_argument("--tolerance", help="Relative tolerance for every identity")
    verify.add_argument("--reading", help="Surface derivatives: intrinsic or ambient")
    verify.add_argument("--rmax", help="Bryant profile radius")
    verify.add_argument("--tol", help="Bryant integration tolerance")

    decay = sub.add_parser("decay", help="Fit decay exponents and tabulate the exponent calculus")
    _add_common(decay)
    decay.add_argument("--model", help="Model for the fit")
    decay.add_argument("--quantity", help="R, L22_mag, grad_lambda_norm, hess_lambda_norm, U_sigma, H, grad_norm_sq")
    decay.add_argument("--rmin", help="Smallest radius")
    decay.add_argument("--rmax", help="Largest radius")
    decay.add_argument("--n", help="Number of radii")
    decay.add_argument("--sigma", help="σ for U_sigma")
    decay.add_argument("--table-exponents", dest="table_exponents", action="store_const", const="true",
                       help="Tabulate σ, e1, e2 and term orders over the (a, b) grid instead of fitting")
    decay.add_argument("--a", help="Comma-separated a values")
    decay.add_argument("--b", help="Comma-separated b values")
    decay.add_argument("--tol", help="Bryant integration tolerance")

    bryant = sub.add_parser("bryant", help="Integrate the Bryant profile")
    _add_common(bryant)
    bryant.add_argument("--rmax", help="Outer radius")
    bryant.add_argument("--tol", help="Integration tolerance")
    bryant.add_argument("--out", help="Profile CSV path")

    report = sub.add_parser("report", help="Re-render a JSON report as CSV")
    _add_common(report)
    report.add_argument("--input", help="JSON report to read")

    return parser


# ============================================================================
# Models
# ============================================================================

def make_model(config: RunConfig, cache: Optional[ProfileCache] = None) -> SolitonModel:
    name = config.model
    if name == "cigar":
        return cigar_model()
    if name == "cigarxr":
        return cigar_cross_line_model()
    if name == "euclidean":
        return euclidean_model(3)
    if name == "euclidean2":
        return euclidean_model(2)
    if name == "flat_spheres":
        return flat_spheres_model()
    r_max = max(config.rmax or DEFAULT_PROFILE_RADIUS, DEFAULT_PROFILE_RADIUS)
    return bryant_model(cached_bryant_profile(r_max, config.tol, cache))


def _cache(config: RunConfig) -> ProfileCache:
    return ProfileCache(config.cache_dir, enabled=config.cache_enabled)


def _emit(envelope, config: RunConfig) -> None:
    if config.json:
        write_json(envelope, config.json)
    if config.csv:
        write_csv(envelope, config.csv)
    if not config.json and not config.csv:
        render_csv(envelope, sys.stdout)


# ============================================================================
# Commands
# ============================================================================

def cmd_verify(config: RunConfig) -> int:
    model = make_model(config, _cache(config))
    identities = list(config.identities)
    suite = IdentitySuite(
        identities=identities,
        points=config.points,
        seed=config.seed,
        region=config.region,
        sigmas=config.sigmas,
        step=config.step,
        reading=DerivativeReading(config.reading),
        tolerances={i: config.tolerance for i in identities} if config.tolerance else {},
        workers=effective_workers(config),
    )
    reports = run_suite([model], suite)
    _emit(build_envelope("verify", config.echo(), reports), config)
    summary = summarize(reports)
    for identity, counts in sorted(summary.counts.items()):
        logger.info(f"{identity}: {counts}")
    return EXIT_OK if summary.all_passed else EXIT_CHECK_FAILED


def cmd_decay(config: RunConfig) -> int:
    if config.table_exponents:
        rows = exponent_table(config.a, config.b)
        _emit(build_envelope("decay", config.echo(), exponents=rows), config)
        return EXIT_OK

    model = make_model(config, _cache(config))
    r_range = None
    if config.rmin is not None and config.rmax is not None:
        r_range = (config.rmin, config.rmax)
    params = TheoremParams(config.a[0], config.b[0])
    fit = measure_decay(model, config.quantity, r_range, config.n, config.sigma, params)
    _emit(build_envelope("decay", config.echo(), fits=[fit]), config)
    if fit.consistent is False:
        logger.error(f"Fitted exponent {fit.exponent:.4f} exceeds the bound {fit.predicted_exponent:.4f}")
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_bryant(config: RunConfig) -> int:
    r_max = config.rmax or DEFAULT_PROFILE_RADIUS
    profile = cached_bryant_profile(r_max, config.tol, _cache(config))
    if config.out:
        write_profile_csv(profile, config.out)
    R_end = profile.scalar_curvature_at(profile.r_max)
    summary = [
        ("r_max", profile.r_max),
        ("steps", profile.r.size),
        ("hamilton_constant", profile.hamilton_constant),
        ("hamilton_drift", profile.hamilton_drift()),
        ("ode_residual", profile.ode_residual()),
        ("interpolation_residual", profile.interpolation_residual()),
        ("R_at_r_max", R_end),
        ("r_times_R_at_r_max", profile.r_max * R_end),
    ]
    sys.stdout.write("key,value\n")
    for key, value in summary:
        sys.stdout.write(f"{key},{format_real(value)}\n")
    return EXIT_OK


def cmd_report(config: RunConfig) -> int:
    if not config.input:
        raise ConfigError("report needs --input with a JSON report")
    envelope = read_json(config.input)
    if config.csv:
        write_csv(envelope, config.csv)
    if config.json:
        write_json(envelope, config.json)
    if not config.csv and not config.json:
        render_csv(envelope, sys.stdout)
    return EXIT_OK


COMMAND_HANDLERS: Dict[str, Callable[[RunConfig], int]] = {
    "verify": cmd_verify,
    "decay": cmd_decay,
    "bryant": cmd_bryant,
    "report": cmd_report,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config") and v is not None}

    try:
        file_values = load_config_file(args.config) if args.config else {}
        config = build_run_config(args.command, file_values, flags)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    logging.basicConfig(
        level=getattr(logging, config.log_level),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        return COMMAND_HANDLERS[config.command](config)
    except (ConfigError, PreconditionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except IntegrationFailureError as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CHECK_FAILED
