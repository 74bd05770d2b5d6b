"""Command line: ``rgl simulate | threshold | oracle | verify``.

Exit status: 0 success, 1 predicate or assertion failure, 2 config error.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import diagnostics, oracles
from .lab import (ConfigError, check_assertions, emit, estimate_threshold, load_config,
                  run_experiment)


def _simulate(args):
    config = load_config(args.config)
    report = run_experiment(config)
    out = config.output or {}
    fmt = args.format or out.get("format", "json")
    path = args.out or out.get("path")
    if path:
        emit(report, fmt, path)
    else:
        sys.stdout.write(emit(report, fmt))
    status = 0
    for assertion, frac, ok in check_assertions(config, report):
        print(f"{'PASS' if ok else 'FAIL'} {assertion['predicate']} at t={assertion['t']}: "
              f"{frac:.2f} (need {assertion.get('min_fraction', 0.5)})", file=sys.stderr)
        status |= not ok
    return status


def _threshold(args):
    config = load_config(args.config)
    res = estimate_threshold(config, args.predicate, args.lo, args.hi, args.res)
    print(json.dumps({"lo": res.lo, "hi": res.hi, "consistent": res.consistent,
                      "probes": res.probes}))
    return 0 if res.consistent else 1


def _oracle_value(args):
    name = args.name
    if name == "phi":
        return {"phi": oracles.phi(args.t, args.L)}
    if name == "matching":
        i, b = oracles.matching_curves(args.t)
        return {"i": i, "b": b}
    if name == "x-blowup":
        sol = oracles.integrate_x(1.2, args.step)
        return {"blow_up_time": sol.blow_up_time, "x_at_1.06": sol(1.06)}
    if name == "checkpoints":
        return {"t": oracles.checkpoint_sequence(20, oracles.integrate_x(1.2, args.step))}
    if name == "lower-bound":
        if args.optimize:
            g, v = oracles.optimize_gamma()
            return {"gamma": g, "objective": v, "per_doubling": v / 2}
        led = oracles.lower_bound_general(args.r, args.gamma)
        return {"gamma": led.gamma, "L": led.L, "edge_budget": led.edge_budget}
    if name == "two-colors":
        if args.optimize:
            g, v = oracles.optimize_two_colors()
            return {"gamma": g, "value": v}
        return {"value": oracles.lower_bound_two_colors(args.gamma)}
    if name == "spectral":
        return {"rho": oracles.spectral_radius(np.array(json.loads(args.matrix), dtype=float))}
    if name == "block":
        rho1, rho2 = oracles.block_eigen_closed_form(args.k, args.t)
        best, _ = oracles.optimal_block_split(args.k)
        return {"rho1": rho1, "rho2": rho2, "best_t": best}
    if name == "kpartite":
        return {"threshold": oracles.kpartite_threshold(args.k)}
    if name == "plane":
        plane = oracles.build_projective_plane(args.q)
        return {"q": plane.q, "points": plane.r, "lines": plane.lines}
    if name == "adaptive":
        if args.optimize:
            return oracles.optimize_adaptive()
        return oracles.adaptive_thresholds(args.t)
    raise ConfigError(f"unknown oracle {name!r}")


def _oracle(args):
    print(json.dumps(_oracle_value(args)))
    return 0


def _verify(args):
    results = diagnostics.run_battery(args.seed)
    for res in results:
        print(f"{'PASS' if res.passed else 'FAIL'} {res.name}: {res.detail}")
    return 0 if all(r.passed for r in results) else 1


ORACLES = ("phi", "matching", "x-blowup", "checkpoints", "lower-bound", "two-colors",
           "spectral", "block", "kpartite", "plane", "adaptive")


def build_parser():
    parser = argparse.ArgumentParser(prog="rgl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run an experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"))
    p.set_defaults(func=_simulate)

    p = sub.add_parser("threshold", help="bisect for a predicate threshold")
    p.add_argument("--config", required=True)
    p.add_argument("--predicate", required=True)
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--res", type=float, default=0.01)
    p.set_defaults(func=_threshold)

    p = sub.add_parser("oracle", help="print an analytical value as JSON")
    p.add_argument("name", choices=ORACLES)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--gamma", type=float, default=1 / math.sqrt(2))
    p.add_argument("--step", type=float, default=1e-4)
    p.add_argument("--matrix", default="[[1]]")
    p.add_argument("--optimize", action="store_true")
    p.set_defaults(func=_oracle)

    p = sub.add_parser("verify", help="run the structural diagnostic battery")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_verify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
