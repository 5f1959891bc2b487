"""Command-line interface.

Subcommands map one-to-one to how the library's claims are exercised:

    run       single (lambda, S) point from a config file
    sweep     lambda- or S-sweep with optional scaling fits
    validate  oracle cross-checks and invariant suite on built-in families
    explain   print the diagram expansion (jump paths) for a given dim/order

Exit codes: 0 success, 2 config error, 3 numeric failure, 4 validation
failure in `validate`.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .config import load_config
from .errors import (
    AdiabaticJumpsError,
    ConfigurationError,
    NumericalError,
    PipelineError,
)
from .expansion import diagram_paths
from .runner import emit, run_single, run_sweep

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_VALIDATE = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adiabatic-jumps",
        description=("Jump expansion of slowly driven quantum evolution: "
                     "moving-frame amplitudes, exact oracles, scaling studies."))
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def _common(p):
        p.add_argument("--config", required=True, help="TOML run config")
        p.add_argument("--out", default=None,
                       help="output directory (default: output.directory)")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads for sweeps (default: all cores)")
        p.add_argument("--format", default=None,
                       help="comma-separated subset of csv,json")
        p.add_argument("--strict", action="store_true",
                       help="strict config schema (default; kept for stability)")

    p_run = sub.add_parser("run", help="run a single (lambda, S) point")
    _common(p_run)

    p_sweep = sub.add_parser("sweep", help="run a lambda or S sweep")
    _common(p_sweep)

    p_val = sub.add_parser("validate",
                           help="oracle cross-checks on built-in families")
    p_val.add_argument("--lam", type=float, default=50.0)
    p_val.add_argument("--slices", type=int, default=100_000)
    p_val.add_argument("--rtol", type=float, default=1e-10)
    p_val.add_argument("--tolerance", type=float, default=1e-6,
                       help="max allowed cross-oracle state difference")
    p_val.add_argument("--seed", type=int, default=0)

    p_exp = sub.add_parser("explain",
                           help="print the diagram expansion as text")
    p_exp.add_argument("--dim", type=int, default=2)
    p_exp.add_argument("--order", type=int, default=2)
    p_exp.add_argument("--start", type=int, default=0,
                       help="initial level index")
    return parser


def _formats(args, config):
    if args.format is None:
        return config.formats
    fmts = tuple(f for f in args.format.split(",") if f)
    for f in fmts:
        if f not in ("csv", "json"):
            raise ConfigurationError(f"--format: unknown format '{f}'")
    return fmts


def _cmd_run(args) -> int:
    config = load_config(args.config, strict=True)
    result = run_single(config)
    files = emit(result, config, args.out or config.out_dir,
                 _formats(args, config))
    print(f"run: lambda={result.lam:g} S={result.duration:g} "
          f"K={result.order} nodes={result.grid_nodes}")
    print(f"  cross-oracle |dpsi| = {result.cross_oracle_diff:.3e}, "
          f"max residual = {result.residuals.max():.3e}, "
          f"bound margin min = {result.bound_margins.min():.3e}")
    for path in files:
        print(f"  wrote {path}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    config = load_config(args.config, strict=True)
    sweep = run_sweep(config, threads=args.threads)
    files = emit(sweep, config, args.out or config.out_dir,
                 _formats(args, config))
    print(f"sweep: axis={sweep.axis or 'none'} points={len(sweep.results)} "
          f"errors={len(sweep.errors)}")
    for name, report in sorted(sweep.fits.items()):
        if report is not None and report.fit is not None:
            print(f"  fit[{name}]: exponent={report.fit.exponent:+.3f} "
                  f"R^2={report.fit.r_squared:.4f}")
    for key, msg in sorted(sweep.errors.items()):
        print(f"  point lambda={key[0]:g} S={key[1]:g} failed: {msg}")
    for path in files:
        print(f"  wrote {path}")
    return EXIT_NUMERIC if sweep.errors else EXIT_OK


def _cmd_validate(args) -> int:
    # deferred import keeps CLI startup light
    from .validate import run_validation

    checks = run_validation(lam=args.lam, slices=args.slices, rtol=args.rtol,
                            tolerance=args.tolerance, seed=args.seed)
    failed = 0
    for check in checks:
        status = "PASS" if check.ok else "FAIL"
        print(f"[{status}] {check.name}: {check.detail}")
        failed += 0 if check.ok else 1
    print(f"validate: {len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VALIDATE


def _cmd_explain(args) -> int:
    dim, order, start = args.dim, args.order, args.start
    if dim < 2:
        raise ConfigurationError("--dim must be >= 2")
    if order < 0:
        raise ConfigurationError("--order must be >= 0")
    if not 0 <= start < dim:
        raise ConfigurationError("--start must lie in [0, dim)")
    print(f"diagram expansion: dim={dim}, initial level {start}, "
          f"orders 0..{order}")
    print("each path is a sequence of level segments punctuated by jumps;")
    print("a segment on level n accumulates the phase exp(-i lambda * int eps_n ds),")
    print("a jump n -> m at time s contributes the coupling g_mn(s), and the")
    print("jump times are integrated over in order.")
    for k in range(order + 1):
        paths = diagram_paths(dim, k, start)
        label = "path" if len(paths) == 1 else "paths"
        print(f"order {k}: {len(paths)} {label}")
        for p in paths:
            if k == 0:
                print(f"  [{p}]  (no jumps: pure dynamical phase)")
            else:
                print(f"  [{p}]")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {"run": _cmd_run, "sweep": _cmd_sweep,
                "validate": _cmd_validate, "explain": _cmd_explain}
    try:
        return handlers[args.command](args)
    except PipelineError as exc:
        print(f"error at {exc}", file=sys.stderr)
        inner = exc.cause
        return EXIT_CONFIG if isinstance(inner, ConfigurationError) \
            else EXIT_NUMERIC
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except AdiabaticJumpsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
