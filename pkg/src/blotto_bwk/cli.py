"""Command-line interface: ``run``, ``oracle``, ``graph`` and ``validate``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import graph as lg
from . import harness, selfcheck
from .config import parse_config
from .exceptions import BlottoError

LOG_ENV = "BLOTTO_BWK_LOG_LEVEL"


def _int_list(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _add_game_flags(p):
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--n", type=int)
    p.add_argument("--T", type=int)
    p.add_argument("--B", type=int)
    p.add_argument("--c")
    p.add_argument("--adversary", help='e.g. "UniformSum(4)" or "FixedAllocation(1,1,1)"')
    p.add_argument("--seeds", type=_int_list, help="comma-separated seeds")
    p.add_argument("--horizons", type=_int_list, help="comma-separated horizons")
    p.add_argument("--mc-samples", dest="mc_samples", type=int)


def _spec(args):
    overrides = {
        "n": args.n, "T": args.T, "B": args.B, "c": args.c,
        "adversary": args.adversary, "seeds": args.seeds,
        "horizons": args.horizons, "mc_samples": args.mc_samples,
    }
    return parse_config(args.config, overrides)


def cmd_run(args):
    spec = _spec(args)
    return harness.run(spec, args.out)


def cmd_oracle(args):
    spec = _spec(args)
    adversary = spec.adversary_model()
    report = {}
    for T in spec.horizons:
        game = spec.game_for(T)
        report[T] = harness.compute_oracles(game, adversary, spec.mc_samples)
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def cmd_graph(args):
    if args.config or args.n is not None:
        spec = _spec(args)
        m, n = spec.game.m, spec.game.n
    else:
        m, n = args.m, args.battlefields
    print(json.dumps({"m": m, "n": n, **harness.graph_stats(m, n)}, indent=2))
    if args.edges:
        sys.stdout.write(lg.to_edge_list(lg.build_fixed(m, n)))
    return 0


def cmd_validate(args):
    m, n = args.m, args.battlefields
    if args.config:
        spec = _spec(args)
        m, n = spec.game.m, spec.game.n
    samples = args.mc_samples or 100_000
    results = selfcheck.run_all(m, n, samples=samples, seed=args.seed)
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="blotto-bwk", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment")
    _add_game_flags(p)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("oracle", help="print OPT_LP / OPT_DP for a config")
    _add_game_flags(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("graph", help="print fixed-set graph statistics")
    _add_game_flags(p)
    p.add_argument("--m", type=int, default=4)
    p.add_argument("--battlefields", type=int, default=3)
    p.add_argument("--edges", action="store_true", help="also print the edge list")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("validate", help="statistical self-tests")
    _add_game_flags(p)
    p.add_argument("--m", type=int, default=4)
    p.add_argument("--battlefields", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    logging.basicConfig(
        level=os.environ.get(LOG_ENV, "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BlottoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AssertionError as exc:
        print(f"internal assertion failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
