"""Command-line entry point.

Subcommands:
  validate   kernel verdicts: normalization, p(0), irreducibility, S flag
  check      full identity suite with per-item pass/fail and max defects
  compute    diffusion matrix with a convergence table over a nested schedule

Reports are JSON with a schema_version field, matrices stored row-major and
all tolerances echoed.  By default the report contains no wall-clock data,
so repeated runs with the same configuration produce byte-identical files;
pass --timings to embed timings (which breaks that reproducibility).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .diffusion import compute_diffusion
from .errors import ConfigError, KernelError, SolverError
from .identities import run_identity_suite
from .kernel import check_irreducibility, load_kernel
from .localfn import Density

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_KERNEL = 3
EXIT_IDENTITY = 4
EXIT_SOLVER = 5

EPILOG = """\
exit codes:
  0  all assertions passed
  2  configuration could not be parsed (bad flags, schedule, rho, file)
  3  kernel invalid or failed validation verdicts
  4  an identity check exceeded its tolerance
  5  numerical solver failure (singular Dirichlet matrix or singular Q)
"""


def parse_schedule(text: str) -> list[tuple[int, int]]:
    """Parse "r:k,r:k,..." into a schedule list."""
    out = []
    try:
        for part in text.split(","):
            r, k = part.strip().split(":")
            out.append((int(r), int(k)))
    except ValueError as exc:
        raise ConfigError(f"bad schedule {text!r}: expected r:k,r:k,...") from exc
    if not out:
        raise ConfigError("empty schedule")
    return out


def parse_rho(text: str, rational: bool):
    try:
        value = Fraction(text) if rational else float(Fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad rho {text!r}") from exc
    if not (0 < value < 1):
        raise ConfigError(f"rho must be in (0,1), got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="asepdiff",
        description=__doc__,
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_rho: bool):
        p.add_argument("--config", required=True, metavar="PATH",
                       help="kernel specification file (JSON)")
        if needs_rho:
            p.add_argument("--rho", required=True, help="particle density in (0,1)")
            p.add_argument("--schedule", default="1:2,2:3,3:3",
                           help='nested basis schedule "r:k,r:k,..." (default 1:2,2:3,3:3)')
            p.add_argument("--rational", action="store_true",
                           help="exact-rational mode for the algebraic checks")
            p.add_argument("--tol-svd", type=float, default=1e-10, metavar="X",
                           help="relative spectral cutoff for pseudo-inverses (default 1e-10)")
            p.add_argument("--tol-id", type=float, default=None, metavar="X",
                           help="override the per-item identity tolerances")
            p.add_argument("--seed", type=int, default=2024,
                           help="seed for the deterministic identity sweeps")
        p.add_argument("--out", metavar="PATH", help="write the JSON report here")
        p.add_argument("--timings", action="store_true",
                       help="embed wall-clock timings (report no longer byte-reproducible)")

    common(sub.add_parser("validate", help="validate a kernel file"), needs_rho=False)
    common(sub.add_parser("check", help="run the identity suite"), needs_rho=True)
    common(sub.add_parser("compute", help="compute Q and D over a schedule"), needs_rho=True)
    return parser


def _emit(report: dict, out_path: str | None) -> None:
    text = json.dumps(report, indent=2) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_validate(args) -> int:
    kernel = load_kernel(args.config)
    verdict = check_irreducibility(kernel)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "validate",
        "kernel": kernel.to_json_dict(),
        "normalized": True,
        "range": kernel.range(),
        "symmetric": kernel.is_symmetric(),
        "S": [[float(v) for v in row] for row in kernel.s_matrix],
        "irreducible": verdict.generates_lattice,
        "lattice_index": verdict.lattice_index,
        "s_invertible": verdict.s_invertible,
        "witness": verdict.witness,
    }
    _emit(report, args.out)
    if not verdict.generates_lattice:
        print(f"validate: FAIL ({verdict.witness})", file=sys.stderr)
        return EXIT_KERNEL
    print("validate: PASS", file=sys.stderr)
    return EXIT_OK


def cmd_check(args) -> int:
    kernel = load_kernel(args.config, exact=args.rational)
    rho = parse_rho(args.rho, args.rational)
    schedule = parse_schedule(args.schedule)
    radius, kmax = schedule[-1]
    overrides = None
    if args.tol_id is not None:
        from .identities import DEFAULT_TOLERANCES

        overrides = {name: args.tol_id for name in DEFAULT_TOLERANCES}
    items = run_identity_suite(
        kernel,
        Density(rho),
        radius=radius,
        kmax=kmax,
        rational=args.rational,
        seed=args.seed,
        tolerances=overrides,
    )
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "check",
        "kernel": kernel.to_json_dict(),
        "rho": float(rho),
        "rational": args.rational,
        "basis": {"radius": radius, "kmax": kmax},
        "seed": args.seed,
        "items": [item.to_json_dict() for item in items],
        "all_passed": all(item.passed for item in items),
    }
    _emit(report, args.out)
    for item in items:
        status = "pass" if item.passed else "FAIL"
        print(f"{status:4s}  {item.name:24s} defect {item.max_defect:.3e} "
              f"(tol {item.tolerance:.1e})", file=sys.stderr)
    if not report["all_passed"]:
        return EXIT_IDENTITY
    return EXIT_OK


def cmd_compute(args) -> int:
    kernel = load_kernel(args.config, exact=args.rational)
    rho = parse_rho(args.rho, args.rational)
    schedule = parse_schedule(args.schedule)
    result = compute_diffusion(kernel, Density(rho), schedule, svd_cutoff=args.tol_svd)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "compute",
        "rational": args.rational,
        "tolerances": {"svd_cutoff": args.tol_svd, "identity": args.tol_id},
        "schedule": [[r, k] for r, k in schedule],
    }
    report.update(result.to_json_dict(include_timings=args.timings))
    _emit(report, args.out)
    print(result.table(), file=sys.stderr)
    final = result.final
    print(
        f"D = {[[round(float(v), 10) for v in row] for row in final.D]} "
        f"(symmetry defect {final.symmetry_defect_D:.3e}, "
        f"max residual {final.max_residual():.3e})",
        file=sys.stderr,
    )
    if not final.consistency_ok:
        print("compute: estimator consistency flag raised", file=sys.stderr)
        return EXIT_IDENTITY
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on bad flags, which matches EXIT_CONFIG
        return int(exc.code) if exc.code else 0
    try:
        if args.command == "validate":
            return cmd_validate(args)
        if args.command == "check":
            return cmd_check(args)
        return cmd_compute(args)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KernelError as exc:
        print(f"kernel error: {exc}", file=sys.stderr)
        return EXIT_KERNEL
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
