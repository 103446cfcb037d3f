"""Desk-scale experiment harness and synthetic graph generators.

Sweeps write one CSV per call with a fixed header and also return the rows.
Every number is reproducible from the seeds passed in.
"""

import csv
from pathlib import Path

import numpy as np

from .diffusion import RngStream
from .errors import ValidationError
from .graph import Graph
from .instances import InstanceKind, monte_carlo_objective, new_collection
from .ramp import RampConfig, ramp, rm_a_simplified
from .selection import amp, greedy, local_greedy, threshold_greedy

QUALITY_FIELDS = ("algorithm", "theta", "seed", "rank", "size", "coverage", "objective",
                  "wall_time_ms")
SCALING_FIELDS = ("method", "eps", "seed", "iterations", "total_rr_sets", "ratio",
                  "objective", "wall_time_ms")


def _inverse_in_degree(n, src, dst):
    indeg = np.bincount(dst, minlength=n)
    return 1.0 / indeg[dst] if len(dst) else np.zeros(0)


def erdos_renyi_graph(n, avg_degree, seed=0, prob=None):
    """Directed G(n, m) graph with ``m ≈ n·avg_degree`` distinct edges.

    Probabilities default to the inverse in-degree weighting.
    """
    rng = np.random.default_rng(seed)
    m = int(round(n * avg_degree))
    if n < 2 or m == 0:
        return Graph(n, [], [], [])
    cap = n * (n - 1)
    m = min(m, cap)
    keys = np.zeros(0, dtype=np.int64)
    while len(keys) < m:
        draw = rng.integers(0, cap, size=2 * (m - len(keys)) + 16)
        keys = np.unique(np.concatenate([keys, draw]))
    keys = rng.permutation(keys)[:m]
    keys.sort()
    src = keys // (n - 1)
    off = keys % (n - 1)
    dst = off + (off >= src)
    p = _inverse_in_degree(n, src, dst) if prob is None else np.full(m, float(prob))
    return Graph(n, src, dst, p)


def preferential_attachment_graph(n, out_degree, seed=0, prob=None):
    """Directed preferential-attachment graph.

    Each new node sends ``out_degree`` edges to distinct earlier nodes chosen
    proportionally to in-degree plus one.
    """
    rng = np.random.default_rng(seed)
    d = int(out_degree)
    if n < 2 or d < 1:
        return Graph(n, [], [], [])
    src, dst = [], []
    pool = []
    for v in range(1, n):
        k = min(d, v)
        chosen = set()
        while len(chosen) < k:
            if pool and rng.random() < len(pool) / (len(pool) + v):
                u = pool[rng.integers(len(pool))]
            else:
                u = int(rng.integers(v))
            chosen.add(u)
        for u in sorted(chosen):
            src.append(v)
            dst.append(u)
            pool.append(u)
    src = np.asarray(src)
    dst = np.asarray(dst)
    p = _inverse_in_degree(n, src, dst) if prob is None else np.full(len(src), float(prob))
    return Graph(n, src, dst, p)


def _run_algo(name, coll, matroid, xi):
    if name == "greedy":
        return greedy(coll, matroid)
    if name == "local":
        return local_greedy(coll, matroid)
    if name == "threshold":
        return threshold_greedy(coll, matroid, xi)
    if name.startswith("amp"):
        pm = name.startswith("amp-pm")
        tail = name.split(":", 1)[1] if ":" in name else "0.5"
        return amp(coll, matroid, float(eval_fraction(tail)), use_pm=pm)
    raise ValidationError(f"unknown algorithm {name!r}")


def eval_fraction(text):
    """Parse ``"1/4"`` or ``"0.25"``."""
    if "/" in text:
        a, b = text.split("/", 1)
        return float(a) / float(b)
    return float(text)


def _write(path, fields, rows):
    if path is None:
        return
    with open(Path(path), "w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        w.writerows(rows)


def run_quality_sweep(inst, algos, thetas, seeds, out=None, xi=0.05, mc_sims=1000):
    """Coverage and Monte Carlo objective per ``(algorithm, θ, seed)``.

    Algorithm names are ``greedy``, ``local``, ``threshold``, ``amp:<ε_s>`` and
    ``amp-pm:<ε_s>`` (for example ``amp:1/2``).  All algorithms of one
    ``(θ, seed)`` cell share the same collection.  ``mc_sims=0`` skips the
    simulation column.
    """
    rows = []
    for theta in thetas:
        for seed in seeds:
            coll = new_collection(inst, int(theta), seed)
            for name in algos:
                res = _run_algo(name, coll, inst.matroid, xi)
                obj = (monte_carlo_objective(inst, res.chosen, mc_sims, RngStream(seed, 1 << 50))
                       if mc_sims else float("nan"))
                rows.append({"algorithm": name, "theta": int(theta), "seed": seed,
                             "rank": inst.matroid.rank, "size": len(res.chosen),
                             "coverage": res.coverage, "objective": obj,
                             "wall_time_ms": res.wall_time * 1e3})
    _write(out, QUALITY_FIELDS, rows)
    return rows


def run_scaling_sweep(inst, eps_grid, seeds, out=None, delta=0.1, mc_sims=0,
                      include_rm_a=None):
    """RAMP (and RM-A on RM instances) sample counts and runtimes per ``ε``."""
    if include_rm_a is None:
        include_rm_a = inst.kind is InstanceKind.RM
    rows = []
    for eps in eps_grid:
        for seed in seeds:
            reps = [("ramp", ramp(inst, RampConfig(eps, delta), seed))]
            if include_rm_a and eps < 0.5:
                reps.append(("rm-a", rm_a_simplified(inst, eps, delta, seed)))
            for name, rep in reps:
                obj = (monte_carlo_objective(inst, rep.result, mc_sims, RngStream(seed, 1 << 50))
                       if mc_sims else float("nan"))
                rows.append({"method": name, "eps": eps, "seed": seed,
                             "iterations": rep.iterations, "total_rr_sets": rep.total_rr_sets,
                             "ratio": rep.achieved_ratio, "objective": obj,
                             "wall_time_ms": rep.wall_time * 1e3})
    _write(out, SCALING_FIELDS, rows)
    return rows
