"""Command line front end.

Subcommands: bench (MSE sweep to CSV/JSON), estimate (joint fit of one
sample file to a JSON report), generate (write a seeded synthetic sample),
density (evaluate the truncated density estimate on a grid).  Exit codes:
0 success, 2 configuration problem, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .bench import FULL_GRID, BenchSpec, determinism_hash, emit, run_bench
from .charfn import EvalGrid
from .errors import ConfigError, NumericalError
from .estimators import EstimateReport, FitConfig, fit_joint, truncate_density, truncation_level
from .simulate import generate, load_sample_csv, save_sample_bin, save_sample_csv, scenario


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise ConfigError(f"--n expects comma-separated integers, got {text!r}") from exc


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deconv",
        description="Circle/sphere deconvolution: estimate radius, center and angular density "
        "from noisy observations by characteristic-function contrast minimization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="run the seeded MSE sweep")
    b.add_argument("--scenario", type=int, required=True, choices=(1, 2, 3, 4))
    b.add_argument("--n", type=_int_list, default=None, metavar="N1,N2,...")
    b.add_argument("--reps", type=int, default=10)
    b.add_argument("--mode", default="both", choices=("known_f", "unknown_f", "both"))
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", default="bench.csv")
    b.add_argument("--rmin", type=float, default=None)
    b.add_argument("--rmax", type=float, default=None)
    b.add_argument(
        "--full",
        action="store_true",
        help="paper-scale grid (n up to 1e6, 30 replications); runtime is hours",
    )
    b.add_argument("--quiet", action="store_true", help="suppress per-cell progress")

    e = sub.add_parser("estimate", help="joint fit on a CSV sample")
    e.add_argument("--input", required=True)
    e.add_argument("--rmin", type=float, default=0.5)
    e.add_argument("--rmax", type=float, default=10.0)
    e.add_argument("--nu", type=float, default=0.5,
                   help="recorded in the report for provenance; does not alter the fit")
    e.add_argument("--nu-est", type=float, default=1.0, dest="nu_est",
                   help="half-width of the frequency window the contrast integrates over")
    e.add_argument("--out", default="report.json")

    g = sub.add_parser("generate", help="write a synthetic sample")
    g.add_argument("--scenario", type=int, required=True, choices=(1, 2, 3, 4))
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True)

    d = sub.add_parser("density", help="tabulate the truncated density estimate")
    d.add_argument("--report", required=True)
    d.add_argument("--alpha", type=float, default=0.45)
    d.add_argument("--grid", type=int, default=512)
    d.add_argument("--out", default="density.csv")
    return parser


def _cmd_bench(args) -> int:
    n_values = args.n
    reps = args.reps
    if args.full:
        n_values = FULL_GRID if n_values is None else n_values
        reps = 30 if args.reps == 10 else reps
    if n_values is None:
        n_values = (100, 1_000, 10_000)
    overrides = {}
    if args.rmin is not None:
        overrides["r_min"] = args.rmin
    if args.rmax is not None:
        overrides["r_max"] = args.rmax
    spec = BenchSpec(
        scenario_id=args.scenario,
        n_values=n_values,
        replications=reps,
        mode=args.mode,
        out_path=args.out,
        base_seed=args.seed,
        fit_overrides=overrides or None,
    )
    rows = run_bench(spec, progress=not args.quiet)
    fmt = "json" if args.out.endswith(".json") else "csv"
    emit(rows, args.out, fmt)
    print(f"integration=gauss-legendre nodes=33 nu=0.5 rows={len(rows)} out={args.out}")
    print(f"determinism_hash {determinism_hash(rows)}")
    return 0


def _cmd_estimate(args) -> int:
    sample = load_sample_csv(args.input)
    cfg = FitConfig(r_min=args.rmin, r_max=args.rmax)
    grid = EvalGrid.build(dim=sample.dim, nu_est=args.nu_est)
    report = fit_joint(sample, cfg, grid)
    payload = json.loads(report.to_json())
    payload["nu"] = args.nu
    payload["nu_est"] = args.nu_est
    with open(args.out, "w") as handle:
        json.dump(payload, handle, sort_keys=True, indent=1)
        handle.write("\n")
    print(
        f"r_hat={report.r_hat:.6g} c_hat=({report.c_hat[0]:.6g}, {report.c_hat[1]:.6g}) "
        f"contrast={report.contrast_value:.6g} out={args.out}"
    )
    return 0


def _cmd_generate(args) -> int:
    sample = generate(scenario(args.scenario), args.n, args.seed)
    if args.out.endswith(".bin"):
        save_sample_bin(sample, args.out)
    else:
        save_sample_csv(sample, args.out)
    print(f"wrote {sample.n} observations to {args.out}")
    return 0


def _cmd_density(args) -> int:
    if args.grid < 2:
        raise ConfigError("--grid must be >= 2")
    with open(args.report) as handle:
        report = EstimateReport.from_json(handle.read())
    k_cut = report.f_hat_coeffs.size // 2
    cfg = FitConfig(alpha=args.alpha, k_cutoff=max(k_cut, 1), n_trunc=0)
    poly = truncate_density(report, report.n, cfg)
    xs = (np.arange(args.grid) + 0.5) / args.grid
    values = poly(xs)
    with open(args.out, "w") as handle:
        handle.write("x,density\n")
        for x, v in zip(xs, values):
            handle.write(f"{x:.17g},{v:.17g}\n")
    level = truncation_level(report.n, args.alpha)
    print(f"truncation_level={level} points={args.grid} out={args.out}")
    return 0


_HANDLERS = {
    "bench": _cmd_bench,
    "estimate": _cmd_estimate,
    "generate": _cmd_generate,
    "density": _cmd_density,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the message
        return int(exc.code or 0)
    try:
        return _HANDLERS[args.command](args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
