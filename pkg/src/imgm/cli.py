"""Command-line front end.

Subcommands ``generate``, ``select``, ``ramp`` and ``evaluate`` emit JSON.
Exit codes: 0 success, 2 usage error, 3 validation error, 4 I/O error.
The default seed is 0 unless the ``MATROID_IM_SEED`` environment variable is
set; an explicit ``--seed`` always wins.
"""

import argparse
import csv
import json
import logging
import math
import os
import sys
import time

import numpy as np

from .diffusion import RngStream
from .errors import ImgmError, ValidationError
from .graph import load_edge_list
from .instances import (GroundSet, InstanceKind, build_matroid, make_instance,
                        monte_carlo_stats, new_collection, read_rr, synthetic_seed_set,
                        write_rr)
from .ramp import RampConfig, ramp, rm_a_simplified
from .selection import amp, greedy, local_greedy, threshold_greedy
from .weighted import amp_weighted, load_weights, weighted_coverage

SEED_ENV = "MATROID_IM_SEED"
EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_IO = 0, 2, 3, 4
ALGOS = ("greedy", "local", "threshold", "amp", "amp-pm", "amp-weighted")


def _default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw, 0)
    except ValueError:
        raise ValidationError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _csv_floats(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_instance_args(p):
    p.add_argument("--graph", required=True, help="edge-list file")
    p.add_argument("--weighting", choices=("inverse_in_degree", "explicit"),
                   default="inverse_in_degree")
    p.add_argument("--instance", required=True, choices=("im", "rm", "mrim", "advim"))
    p.add_argument("--model", choices=("ic", "lt"), default=None)
    p.add_argument("--k", type=int, default=None,
                   help="IM/MRIM seed budget; RM per-node round cap (default 1)")
    p.add_argument("--T", type=int, default=None, help="number of rounds or campaigns")
    p.add_argument("--alpha", type=_csv_floats, default=None, help="RM campaign weights")
    p.add_argument("--kv", type=int, default=None, help="AdvIM node-blocking budget")
    p.add_argument("--ke", type=int, default=None, help="AdvIM edge-blocking budget")
    p.add_argument("--seeds-file", default=None,
                   help="AdvIM seed set, one node label per line")
    p.add_argument("--adv-mode", choices=("empty_miss", "regenerate"), default="empty_miss")


def _read_seed_labels(path, g):
    labels = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            t = line.strip()
            if t and not t.startswith("#"):
                try:
                    labels.append(g.index_of(int(t)))
                except ValueError:
                    raise ValidationError(f"bad seed label {t!r}") from None
    return labels


def _instance(args):
    g = load_edge_list(args.graph, args.weighting)
    kind = InstanceKind.parse(args.instance)
    kw = {}
    if kind is InstanceKind.IM:
        kw = dict(k=args.k)
    elif kind is InstanceKind.RM:
        kw = dict(T=args.T, alpha=args.alpha, k_per_node=1 if args.k is None else args.k)
    elif kind is InstanceKind.MRIM:
        kw = dict(T=args.T, k=args.k)
    else:
        if args.seeds_file:
            A = _read_seed_labels(args.seeds_file, g)
        else:
            A = synthetic_seed_set(g, RngStream(0))
        kw = dict(seed_set=A, kv=args.kv, ke=args.ke, adv_mode=args.adv_mode)
    return make_instance(kind, g, args.model, **kw)


def _emit(obj, path):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _write_solution(path, ground, chosen):
    with open(path, "w", encoding="utf-8") as fh:
        for e in chosen:
            fh.write(ground.format_line(e) + "\n")


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def cmd_generate(args):
    inst = _instance(args)
    if args.count < 0:
        raise ValidationError("--count must be non-negative")
    t0 = time.perf_counter()
    coll = new_collection(inst, args.count, args.seed, 0, args.threads)
    elapsed = time.perf_counter() - t0
    write_rr(args.out, coll, inst.header())
    sizes = coll.sizes()
    _emit({"theta": coll.theta, "n": coll.n, "seed": args.seed,
           "mean_rr_size": float(sizes.mean()) if len(sizes) else 0.0,
           "wall_time_ms": elapsed * 1e3}, None)


def cmd_select(args):
    coll, meta = read_rr(args.rr)
    if "instance" not in meta:
        raise ValidationError("RR file carries no instance description")
    h = meta["instance"]
    ground = GroundSet.from_dict(h["ground"])
    matroid = build_matroid(h["kind"], ground, h["params"])
    eps = None
    extra = {}
    if args.algo.startswith("amp"):
        if not 0 < args.eps <= 1:
            raise ValidationError("--eps must lie in (0, 1]")
        eps = 1.0 / math.ceil(1.0 / args.eps - 1e-9)
    if args.algo == "greedy":
        res = greedy(coll, matroid)
    elif args.algo == "local":
        res = local_greedy(coll, matroid)
    elif args.algo == "threshold":
        res = threshold_greedy(coll, matroid, args.xi)
    elif args.algo == "amp":
        res = amp(coll, matroid, eps, use_pm=False)
    elif args.algo == "amp-pm":
        res = amp(coll, matroid, eps, use_pm=True)
    else:
        w = load_weights(args.weights, coll.n) if args.weights else np.ones(coll.n)
        res = amp_weighted(coll, matroid, eps, w)
        extra["weighted_coverage"] = weighted_coverage(coll, res.chosen, w)
    out = {"algorithm": args.algo, "epsilon": eps, "xi": args.xi if args.algo == "threshold" else None,
           "chosen": [ground.describe(e) for e in res.chosen],
           "chosen_ids": list(res.chosen), "coverage": res.coverage,
           "f_trace": res.f_trace, "wall_time_ms": res.wall_time * 1e3, **extra}
    _emit(out, args.out)
    if args.solution_out:
        _write_solution(args.solution_out, ground, res.chosen)
    if args.csv:
        rows = [("search", i, f) for i, f in enumerate(res.f_trace)]
        rows += [("rounding", i + 1, f) for i, f in enumerate(res.rounding_trace)]
        _write_csv(args.csv, ("phase", "step", "value"), rows)


def cmd_ramp(args):
    inst = _instance(args)
    if args.method == "rm-a":
        rep = rm_a_simplified(inst, args.eps, args.delta, args.seed, args.threads)
    else:
        cfg = RampConfig(args.eps, args.delta, args.tighten == "on", args.threads)
        rep = ramp(inst, cfg, args.seed)
    out = rep.to_dict(timing=not args.no_timing)
    out["result_decoded"] = [inst.ground.describe(e) for e in rep.result]
    out["instance"] = inst.kind.value
    _emit(out, args.out)
    if args.solution_out:
        _write_solution(args.solution_out, inst.ground, rep.result)
    if args.csv:
        rows = zip(range(1, rep.iterations + 1), rep.thetas, rep.sigma_lower,
                   rep.sigma_upper, rep.ratios)
        _write_csv(args.csv, ("iteration", "theta", "sigma_lower", "sigma_upper", "ratio"),
                   rows)


def cmd_evaluate(args):
    inst = _instance(args)
    chosen = []
    with open(args.solution, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            t = line.strip()
            if t and not t.startswith("#"):
                chosen.append(inst.ground.parse_line(t, lineno))
    if len(set(chosen)) != len(chosen):
        raise ValidationError("solution lists an element twice")
    if args.sims < 1:
        raise ValidationError("--sims must be at least 1")
    est = monte_carlo_stats(inst, chosen, args.sims, RngStream(args.seed))
    _emit({"mean": est.mean, "stderr": est.stderr, "n_sims": est.n_sims}, args.out)


def build_parser():
    parser = argparse.ArgumentParser(prog="imgm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample an RR collection")
    _add_instance_args(p)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("select", help="run an element-selection algorithm on an RR file")
    p.add_argument("--rr", required=True)
    p.add_argument("--algo", required=True, choices=ALGOS)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--xi", type=float, default=0.05)
    p.add_argument("--weights", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--solution-out", default=None)
    p.add_argument("--csv", default=None, help="write the F trace as CSV")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("ramp", help="adaptive sampling with AMP")
    _add_instance_args(p)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tighten", choices=("on", "off"), default="on")
    p.add_argument("--method", choices=("ramp", "rm-a"), default="ramp")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--no-timing", action="store_true",
                   help="omit timing fields for byte-stable output")
    p.add_argument("--out", default=None)
    p.add_argument("--solution-out", default=None)
    p.add_argument("--csv", default=None, help="write per-iteration bounds as CSV")
    p.set_defaults(func=cmd_ramp)

    p = sub.add_parser("evaluate", help="Monte Carlo objective of a solution file")
    _add_instance_args(p)
    p.add_argument("--solution", required=True)
    p.add_argument("--sims", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if getattr(args, "seed", 0) is None:
            args.seed = _default_seed()
        args.func(args)
    except ImgmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
