"""Command-line entry point: ``irs-wiretap <experiment> [options]``."""

import argparse
import json
import logging
import sys

from .harness import (BASELINES, EXPERIMENT_KINDS, emit_results, load_config, make_spec,
                      run_monte_carlo)
from .rates import nats_to_bits


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _baselines(text):
    names = [x.strip() for x in text.split(",") if x.strip()]
    bad = [n for n in names if n not in BASELINES]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown baselines {bad}; choose from {BASELINES}")
    return names


def _u64(text):
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def build_parser():
    parser = _Parser(prog="irs-wiretap",
                     description="Secrecy-rate experiments for IRS-assisted MIMOME wiretap channels.")
    sub = parser.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    for kind in EXPERIMENT_KINDS:
        p = sub.add_parser(kind)
        p.add_argument("--config", help="YAML/JSON file of geometry and solver settings")
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--seed", type=_u64, default=0)
        power = p.add_mutually_exclusive_group()
        power.add_argument("--p0-dbm", type=_float_list, help="transmit powers in dBm")
        power.add_argument("--p0-watts", type=_float_list, help="transmit powers in watts")
        p.add_argument("--n", type=_int_list, help="IRS element counts")
        p.add_argument("--ne", type=_int_list, help="Eve antenna counts")
        p.add_argument("--out", default=None, help="directory for results.csv / results.json")
        p.add_argument("--baselines", type=_baselines, default=[],
                       help="comma-separated subset of: " + ",".join(BASELINES))
        p.add_argument("--bits", action="store_true", help="print rates in bits/s/Hz")
        p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
        p.add_argument("--traces", action="store_true", help="store per-trial iteration traces")
        p.add_argument("--timing", action="store_true", help="include timing in the output files")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _print_table(records, bits):
    unit = "bits" if bits else "nats"
    conv = (lambda x: None if x is None else float(nats_to_bits(x))) if bits else (lambda x: x)
    fmt = lambda x: "-" if x is None else f"{x:.4f}"
    print(f"{'N':>4} {'Ne':>3} {'P0 [W]':>10} {'trials':>6}  "
          f"{'C_s':>9} {'stderr':>8} {'no-IRS':>9} {'rand-phase':>10}  [{unit}]")
    for r in records:
        print(f"{r.N:>4} {r.Ne:>3} {r.P0_watts:>10.4g} {r.trial_count:>6}  "
              f"{fmt(conv(r.mean_Cs_nats)):>9} {fmt(conv(r.stderr_Cs_nats)):>8} "
              f"{fmt(conv(r.mean_no_irs_nats)):>9} {fmt(conv(r.mean_random_phase_nats)):>10}")


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        geometry, bsm = load_config(args.config) if args.config else ({}, {})
        p0_watts = args.p0_watts
        if p0_watts is None and args.p0_dbm is None and "P0" in bsm:
            p0_watts = [bsm["P0"]]
        bsm.pop("P0", None)
        for key, values in (("N", args.n), ("Ne", args.ne)):
            if key in geometry and values is None:
                values = [geometry[key]]
                setattr(args, key.lower(), values)
            geometry.pop(key, None)
        extra = {"trials": args.trials} if args.trials is not None else {}
        spec = make_spec(args.kind, geometry=geometry, bsm=bsm, p0_dbm=args.p0_dbm,
                         p0_watts=p0_watts, n_values=args.n, ne_values=args.ne,
                         seed=args.seed, baselines=args.baselines, out_dir=args.out,
                         keep_traces=args.traces or args.kind == "convergence", **extra)
        records = run_monte_carlo(spec, workers=max(1, args.workers))
        if args.out:
            emit_results(records, spec, args.out, include_timing=args.timing)
        _print_table(records, args.bits)
        failures = sum(r.failures for r in records)
        if failures == sum(r.trial_count for r in records):
            raise RuntimeError("every trial failed")
        return 0
    except SystemExit:
        raise
    except Exception as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return 2 if isinstance(exc, CliError) else 1


if __name__ == "__main__":
    sys.exit(main())
