"""Command-line entry point: ``tvmoprox run | check-lemma1 | pareto``."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import scenarios
from .oracles import DEFAULT_TOL, grid_pareto_front, optimum_trace


def _cmd_run(args):
    spec = scenarios.load_scenario(args.scenario, args.override)
    result = scenarios.run_experiment(spec, tol=args.tol, record_inner=args.record_inner)
    trace_path, summary_path = scenarios.emit_report(result.report, result.trajectory, args.out)
    sys.stdout.write(summary_path.read_text())
    print(f"wrote {trace_path} and {summary_path}")
    return 0


def _cmd_check_lemma1(args):
    res = scenarios.lemma1_suite(args.samples, args.seed)
    print(f"Lemma1 satisfied={res.satisfied}/{res.samples} descent={res.descent_ok}/{res.samples} "
          f"elapsed={res.elapsed:.3f}s")
    for s, v, d in res.failures[:10]:
        print(f"  sample {s}: lhs={v.lhs!r} rhs={v.rhs!r} descent {d.lhs!r} vs {d.rhs!r}")
    return 0 if not res.failures else 1


def _cmd_pareto(args):
    spec = scenarios.load_scenario(args.scenario, args.override)
    if spec.n > 2:
        print(f"pareto needs n <= 2, scenario has n={spec.n}", file=sys.stderr)
        return 2
    stream = spec.build_stream()
    objs = stream.at(args.t)
    if args.box:
        lo, hi = (float(v) for v in args.box.split(","))
        box = [(lo, hi)] * spec.n
    else:
        # optima of every objective at T0, padded by half their spread
        trace = optimum_trace(spec.build_stream(), DEFAULT_TOL)
        pts = trace.points[args.t - 1]
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        pad = np.maximum(0.5 * (hi - lo), 0.5)
        box = list(zip(lo - pad, hi + pad))
    front = grid_pareto_front(objs, box, args.grid)
    print(f"# {len(front.points)} nondominated of {len(front.grid)} grid points at t={args.t}")
    header = [f"x{j + 1}" for j in range(spec.n)] + [f"phi{i + 1}" for i in range(spec.N)]
    print(",".join(header))
    for x, f in zip(front.points, front.values):
        print(",".join(repr(float(v)) for v in (*x, *f)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tvmoprox", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write trace.csv / summary.txt")
    run.add_argument("scenario", help="scenario file, or the name of a bundled one")
    run.add_argument("--out", default=".", help="output directory (default: cwd)")
    run.add_argument("--record-inner", action="store_true", help="keep every inner iterate and candidate")
    run.add_argument("--tol", type=float, default=DEFAULT_TOL, help="oracle tolerance")
    run.add_argument("--override", nargs="*", default=[], metavar="KEY=VALUE")
    run.set_defaults(func=_cmd_run)

    lem = sub.add_parser("check-lemma1", help="randomized check of the prox-gradient inequality")
    lem.add_argument("--samples", type=int, default=1000)
    lem.add_argument("--seed", type=int, default=0)
    lem.set_defaults(func=_cmd_check_lemma1)

    par = sub.add_parser("pareto", help="brute-force Pareto front on a grid")
    par.add_argument("scenario")
    par.add_argument("--t", type=int, default=1, help="time index T0")
    par.add_argument("--grid", type=int, default=401, help="points per axis (<= 401)")
    par.add_argument("--box", default=None, help="lo,hi for every axis (default: around the optima)")
    par.add_argument("--override", nargs="*", default=[], metavar="KEY=VALUE")
    par.set_defaults(func=_cmd_pareto)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
