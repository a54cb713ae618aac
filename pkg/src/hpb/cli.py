"""Command line entry point: ``hpb run`` and ``hpb pattern``."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

import numpy as np

from .harness import ExperimentSpec, SWEEPS, beam_pattern, load_config, run_sweep, write_results

log = logging.getLogger("hpb")

FULL_SCALE_TRIALS = 1000


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _str_list(text):
    return [x.strip() for x in text.split(",") if x.strip()]


def build_parser():
    parser = argparse.ArgumentParser(prog="hpb", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Monte-Carlo rate/time sweep written to CSV")
    run.add_argument("--config", help="scenario file (default: bundled paper_v.cfg)")
    run.add_argument("--algos", type=_str_list, default=["hpb-spp"],
                     help="comma-separated: pb-sca,hpb-ao,hpb-es,hpb-spp,random")
    run.add_argument("--sweep", choices=sorted(SWEEPS), required=True)
    run.add_argument("--values", type=_int_list, required=True,
                     help="sweep values (paths P, element count L^2, or RIS count N)")
    run.add_argument("--trials", type=int, default=200, help="realizations per point")
    run.add_argument("--seed", type=int, default=42)
    run.add_argument("--out", default="results.csv")
    run.add_argument("--full-scale", action="store_true",
                     help=f"use {FULL_SCALE_TRIALS} realizations per point")
    run.add_argument("--workers", type=int, default=1, help="worker threads")
    run.add_argument("--no-timing", action="store_true",
                     help="write 0 for mean_time_s so the CSV is byte-reproducible")
    run.add_argument("--es-grid", type=int, help="points per axis for hpb-es")
    run.add_argument("--random-trials", type=int, help="phase draws per realization for random")

    pat = sub.add_parser("pattern", help="dump the surface beam pattern over (sx, sy)")
    pat.add_argument("--config", help="scenario file providing L and delta")
    pat.add_argument("--L", type=int, help="override elements per side")
    pat.add_argument("--delta", type=float, help="override element spacing factor")
    pat.add_argument("--points", type=int, default=101)
    pat.add_argument("--span", type=float, help="half-width of the s grid")
    pat.add_argument("--out", default="-", help="output file, '-' for stdout")
    return parser


def _cmd_run(args):
    config, params = load_config(args.config)
    overrides = {}
    if args.es_grid is not None:
        overrides["es_grid"] = args.es_grid
    if args.random_trials is not None:
        overrides["random_trials"] = args.random_trials
    if overrides:
        params = replace(params, **overrides)
    trials = FULL_SCALE_TRIALS if args.full_scale else args.trials
    spec = ExperimentSpec(config=config, sweep=args.sweep, values=args.values,
                          algorithms=args.algos, realizations=trials, seed=args.seed,
                          out=args.out, params=params, workers=args.workers,
                          record_time=not args.no_timing)
    log.info("sweep %s over %s: %s x %d realizations", spec.sweep, spec.values,
             ",".join(spec.algorithms), trials)
    rows = run_sweep(spec)
    write_results(rows, args.out)
    for r in rows:
        log.info("%s=%g %-8s rate=%.4f time=%.3gs", r.sweep_var, r.sweep_value,
                 r.algorithm, r.mean_rate, r.mean_time)
    return 0


def _cmd_pattern(args):
    config, _ = load_config(args.config)
    L = args.L if args.L is not None else config.L
    delta = args.delta if args.delta is not None else config.delta
    if L % 2:
        raise ValueError(f"L must be even, got {L}")
    s, gain = beam_pattern(L, delta, args.points, args.span)
    sx, sy = np.meshgrid(s, s, indexing="ij")
    table = np.column_stack([sx.ravel(), sy.ravel(), gain.ravel()])
    header = f"sx sy gain  (L={L}, delta={delta})"
    target = sys.stdout if args.out == "-" else args.out
    np.savetxt(target, table, fmt="%.9g", header=header)
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_pattern(args)
    except (ValueError, OSError) as exc:
        print(f"hpb: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
