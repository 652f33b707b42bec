"""Command-line interface: ``erasure-cg {solve,experiment,table,check}``.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 unrecoverable fault set.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .checks import run_checks
from .exceptions import (ErasureCGError, FaultCapacityError, FormatError, NumericalFailure,
                         UnrecoverableFaultSet)
from .faults import FaultPlan
from .harness import (ConfigError, ExperimentConfig, emit_figure_data, medians_csv,
                      report_csv, resolve_matrix, run_experiment, run_table, write_run_outputs,
                      write_table)

log = logging.getLogger("erasure_cg")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_UNRECOVERABLE = 0, 1, 2, 3


def _common(p):
    p.add_argument("--matrix", help="ltridiag:N, a Matrix Market path, or a name in the data dir")
    p.add_argument("--k", type=int, help="number of tolerated faults")
    p.add_argument("--k-frac", type=float, help="tolerated faults as a fraction of n")
    p.add_argument("--seed", type=int)
    p.add_argument("--rhs-seed", type=int, help="seed for x in (0,1)^n (default: --seed)")
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter-mult", type=float)
    p.add_argument("--fault-frac", type=float)
    p.add_argument("--data-dir")
    p.add_argument("--config", help="JSON file with ExperimentConfig fields")
    p.add_argument("--no-recompute", action="store_true",
                   help="keep the recurrence residual after faults")
    p.add_argument("--out-dir")
    p.add_argument("--trace", action="store_true", help="write trace.csv/trace.json/figure.csv")


def build_parser():
    parser = argparse.ArgumentParser(prog="erasure-cg", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one system, optionally with an explicit fault plan")
    _common(p)
    p.add_argument("--fault-plan", help="JSON fault plan; without it no faults are injected")
    p.add_argument("--rhs", help="right-hand side as a Matrix Market array file")

    p = sub.add_parser("experiment", help="one run of the fault-injection protocol")
    _common(p)

    p = sub.add_parser("table", help="sweep k values and seeds, emit report rows and medians")
    _common(p)
    p.add_argument("--k-list", nargs="*", default=None,
                   help="k values; a trailing %% marks a fraction of n (e.g. 0 1 20%%)")
    p.add_argument("--seeds", type=int, default=5, help="number of seeds, 0..N-1")

    p = sub.add_parser("check", help="structural and spectral checks of a matrix encoding")
    _common(p)
    p.add_argument("--samples", type=int, default=1000)
    return parser


def _config_from_args(args, **extra):
    data = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
    flags = {"matrix": args.matrix, "seed": args.seed, "rhs_seed": args.rhs_seed,
             "tol": args.tol, "max_iter_mult": args.max_iter_mult,
             "fault_frac": args.fault_frac, "data_dir": args.data_dir}
    for key, value in flags.items():
        if value is not None:
            data[key] = value
    if args.k is not None or args.k_frac is not None:
        data["k"], data["k_frac"] = args.k, args.k_frac
    if args.no_recompute:
        data["recompute_residual_on_fault"] = False
    data.update(extra)
    return ExperimentConfig.from_dict(data)


def _run_single(args, cfg):
    report, trace, recovered = run_experiment(cfg)
    sys.stdout.write(report_csv([report]))
    if args.out_dir:
        write_run_outputs(args.out_dir, report, trace, recovered, with_trace=args.trace)
        if args.trace:
            emit_figure_data(trace, f"{args.out_dir}/figure.csv")
    elif args.trace:
        raise ConfigError("--trace needs --out-dir")
    return EXIT_OK


def cmd_solve(args):
    extra = {"inject_faults": False}
    if args.fault_plan:
        with open(args.fault_plan) as fh:
            extra["fault_plan"] = FaultPlan.from_json(fh.read()).to_dict()
    if args.rhs:
        extra["rhs_file"] = args.rhs
    return _run_single(args, _config_from_args(args, **extra))


def cmd_experiment(args):
    return _run_single(args, _config_from_args(args))


def cmd_table(args):
    cfg = _config_from_args(args)
    k_list = args.k_list if args.k_list is not None else ["0", "1", "20%"]
    k_list = [s if s.endswith("%") else int(s) for s in k_list]
    reports, medians = run_table(cfg.matrix, k_list, range(args.seeds), cfg)
    sys.stdout.write(report_csv(reports))
    sys.stdout.write(medians_csv(medians))
    if args.out_dir:
        write_table(args.out_dir, reports, medians)
    return EXIT_OK


def cmd_check(args):
    cfg = _config_from_args(args)
    _, A = resolve_matrix(cfg.matrix, cfg.data_dir)
    results = run_checks(A, cfg.resolve_k(A.n_rows), cfg.seed, n_samples=args.samples)
    for res in results:
        print(f"{'PASS' if res.passed else 'FAIL'} {res.name}: {res.detail}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERICAL


COMMANDS = {"solve": cmd_solve, "experiment": cmd_experiment, "table": cmd_table,
            "check": cmd_check}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UnrecoverableFaultSet as exc:
        log.error("unrecoverable fault set: %s", exc)
        return EXIT_UNRECOVERABLE
    except NumericalFailure as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    except (ConfigError, FormatError, FaultCapacityError, FileNotFoundError,
            json.JSONDecodeError, TypeError, ValueError, ErasureCGError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
