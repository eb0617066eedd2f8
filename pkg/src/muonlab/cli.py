"""Command-line front end.

Subcommands: ``run`` (config-driven sweeps), ``lower-bound`` (adversarial
SignGD instances), ``precond-viz`` (preconditioner heatmaps), ``verify``
(property suites).  Exit codes: 0 success, 1 verification failure, 2 config
error, 3 runtime numerical failure.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, MuonLabError, NumericalDivergenceError, PreconditionError
from .experiments import (
    ExperimentConfig,
    FAMILIES,
    SUITES,
    parse_config,
    preconditioner_report,
    run_experiment,
    verify,
)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_ERROR = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="muonlab",
        description="Spectral-orthogonalization optimizer laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a config-driven experiment")
    run_p.add_argument("--config", required=True, help="path to a key = value config file")
    run_p.add_argument("--out", default=None, help="output directory (overrides config)")
    run_p.add_argument("--seed", type=int, default=None, help="master seed (overrides config)")

    lb_p = sub.add_parser("lower-bound", help="run a SignGD lower-bound construction")
    lb_p.add_argument("--family", choices=FAMILIES, required=True)
    lb_p.add_argument("--kappa", required=True, help="comma-separated condition numbers")
    lb_p.add_argument("--rho", type=float, default=0.98, help="schedule decay (eta_t = eta0 * rho^t)")
    lb_p.add_argument("--eta0", type=float, default=None, help="initial learning rate")
    lb_p.add_argument("--T", type=int, default=600, help="iterations to run")
    lb_p.add_argument("--out", default="results", help="output directory")

    pv_p = sub.add_parser("precond-viz", help="Muon vs ScaledGD preconditioner heatmaps")
    pv_p.add_argument("--d", type=int, default=10)
    pv_p.add_argument("--r", type=int, default=5)
    pv_p.add_argument("--k", type=int, default=5)
    pv_p.add_argument("--alpha", type=float, default=1e-10)
    pv_p.add_argument("--steps", default="0,500,1000", help="comma-separated step indices")
    pv_p.add_argument("--seed", type=int, default=42)
    pv_p.add_argument("--out", default="results")

    v_p = sub.add_parser("verify", help="run a verification suite")
    v_p.add_argument("--suite", choices=SUITES, default="all")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            with open(args.config) as fh:
                cfg = parse_config(fh.read())
            if args.seed is not None:
                cfg.seed = args.seed
            if cfg.kind == "verify":
                report = verify(cfg.suite)
                for line in report.lines:
                    print(line)
                return EXIT_OK if report.passed else EXIT_VERIFY_FAILED
            out = run_experiment(cfg, out_dir=args.out)
            for path in out.csv_paths + out.figure_paths:
                print(f"wrote {path}")
            if out.summary_path:
                print(f"wrote {out.summary_path}")
            return EXIT_OK
        if args.command == "lower-bound":
            cfg = ExperimentConfig(
                kind="lower_bound",
                family=args.family,
                kappa=tuple(float(s) for s in args.kappa.split(",")),
                lb_rho=args.rho,
                lb_eta0=args.eta0,
                T=args.T,
            )
            out = run_experiment(cfg, out_dir=args.out)
            all_ok = True
            for row in out.summary_rows:
                status = "OK" if row["satisfied"] else "VIOLATED"
                all_ok = all_ok and row["satisfied"]
                print(
                    f"{row['family']} kappa={row['kappa']:g}: first_hit={row['first_hit']} "
                    f">= bound={row['bound']:g}? {status}"
                )
            return EXIT_OK if all_ok else EXIT_VERIFY_FAILED
        if args.command == "precond-viz":
            steps = tuple(int(s) for s in args.steps.split(","))
            report = preconditioner_report(
                d=args.d, r=args.r, k=args.k, alpha=args.alpha, steps=steps,
                seed=args.seed, out_dir=args.out,
            )
            for s, diff in zip(report.steps, report.normalized_differences):
                print(f"t={s}: trace-normalized block difference {diff:.6f}")
            for path in report.heatmap_paths:
                print(f"wrote {path}")
            return EXIT_OK
        # verify
        report = verify(args.suite)
        for line in report.lines:
            print(line)
        return EXIT_OK if report.passed else EXIT_VERIFY_FAILED
    except (ConfigError, PreconditionError, FileNotFoundError) as exc:
        # bad config values and out-of-contract CLI parameters alike
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except NumericalDivergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL_ERROR
    except MuonLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
