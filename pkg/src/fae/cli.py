"""Command-line entry point: ``fae estimate|bench|verify|bounds``."""

from __future__ import annotations

import argparse
import json
import sys

from . import bench, bounds, verify
from .errors import DegenerateNuError, DomainError
from .estimator import ROUNDED_THETA_MAX, SAFE_THETA_MAX, EstimatorConfig, run_fae
from .oracle import ProblemSpec, substream

EXIT_OK, EXIT_DOMAIN, EXIT_IO, EXIT_VERIFY = 0, 1, 2, 3


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


class _Parser(argparse.ArgumentParser):
    """Usage errors are configuration errors: exit 1, keeping 2 for I/O."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_DOMAIN, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fae", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="run the estimator once")
    p.add_argument("--amplitude", type=float, required=True)
    p.add_argument("--delta-c", type=float, default=0.01)
    p.add_argument("--ell", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", action="store_true", help="include the per-iteration trace")
    p.add_argument("--paper-initial-bound", action="store_true",
                   help=f"start from theta_max={ROUNDED_THETA_MAX} instead of {SAFE_THETA_MAX}")
    p.add_argument("--backend", choices=["cython", "python"])

    p = sub.add_parser("bench", help="Monte Carlo sweep over amplitudes and ell")
    p.add_argument("--amplitudes", type=_floats, default=[0.1, 0.2, 0.3, 0.4])
    p.add_argument("--ell-min", type=int, default=3)
    p.add_argument("--ell-max", type=int, default=14)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--delta-c", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--percentile", type=float, default=0.95)
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--json", dest="json_path")
    p.add_argument("--svg", dest="svg_path")
    p.add_argument("--trace", action="store_true", help="include per-trial records in the JSON")
    p.add_argument("--paper-initial-bound", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--backend", choices=["cython", "python"])

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", choices=sorted(verify.SUITES), required=True)

    p = sub.add_parser("bounds", help="query-count bounds for a target error")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--json", action="store_true", help="print JSON instead of a table")
    return parser


def cmd_estimate(args) -> int:
    cfg = EstimatorConfig(
        delta_c=args.delta_c, ell=args.ell,
        initial_theta_max=ROUNDED_THETA_MAX if args.paper_initial_bound else SAFE_THETA_MAX,
    )
    spec = ProblemSpec(args.amplitude, seed=args.seed)
    result = run_fae(cfg, spec, substream(args.seed), backend=args.backend)
    print(json.dumps(result.to_dict(trace=args.trace), indent=2))
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = bench.BenchConfig(
        amplitudes=tuple(args.amplitudes), ell_min=args.ell_min, ell_max=args.ell_max,
        trials=args.trials, delta_c=args.delta_c, master_seed=args.seed,
        percentile=args.percentile, backend=args.backend, keep_trials=args.trace,
        initial_theta_max=ROUNDED_THETA_MAX if args.paper_initial_bound else SAFE_THETA_MAX,
    )
    tset = bench.run_bench(cfg, workers=args.workers)
    fits = bench.fit_all(tset)
    bench.export(tset, fits, "csv", args.out)
    if args.json_path:
        bench.export(tset, fits, "json", args.json_path)
    if args.svg_path:
        bench.export(tset, fits, "svg", args.svg_path)
    for a, f in fits.items():
        print(f"amplitude={a:g}  b={f.intercept_b:.4f}  free_slope={f.free_slope:.4f}  "
              f"rms={f.residual_rms:.4f}")
    return EXIT_OK


def cmd_verify(args) -> int:
    result = verify.SUITES[args.suite]()
    print(result.report())
    return EXIT_OK if result.ok else EXIT_VERIFY


def cmd_bounds(args) -> int:
    rep = bounds.bound_report(args.epsilon, args.delta)
    if args.json:
        print(json.dumps(rep.to_dict(), indent=2))
        return EXIT_OK
    rows = [
        ("epsilon", f"{rep.epsilon:.6g}"),
        ("delta", f"{rep.delta:.6g}"),
        ("ell", f"{rep.ell}"),
        ("delta_c = delta/(2 ell)", f"{rep.delta_c:.6g}"),
        ("FAE bound", f"{rep.fae_bound:.6g}"),
        ("worst-case count", f"{rep.worst_case_count:.6g}"),
        ("IQAE bound", f"{rep.competitor_bound:.6g}"),
        ("IQAE / FAE", f"{rep.ratio:.4g}"),
    ]
    width = max(len(k) for k, _ in rows)
    for k, v in rows:
        print(f"{k:<{width}}  {v}")
    return EXIT_OK


COMMANDS = {"estimate": cmd_estimate, "bench": cmd_bench, "verify": cmd_verify, "bounds": cmd_bounds}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (DomainError, DegenerateNuError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
