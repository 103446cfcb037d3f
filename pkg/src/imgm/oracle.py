"""Brute-force references for tests; exponential time, small inputs only.

Exact spreads enumerate live-edge worlds.  Under IC every uncertain edge is
live or dead independently; under LT every node keeps at most one in-edge,
edge ``e`` with probability ``p_e``.  Reachability is computed for all worlds
at once with node sets packed into ``uint64`` bitmasks.
"""

import itertools

import numpy as np

from .diffusion import DiffusionModel
from .errors import ValidationError
from .instances import InstanceKind

MAX_EDGES = 20
MAX_GROUND = 16
MAX_ENUM = 12
MAX_NODES = 63


def _popcount(a):
    return np.bitwise_count(a).astype(np.int64)


class LiveEdgeWorlds:
    """All live-edge worlds of a small graph with their probabilities.

    ``live`` is a ``(worlds, edges)`` boolean matrix and ``prob`` the
    probability of each world.
    """

    def __init__(self, g, model="ic"):
        model = DiffusionModel.parse(model)
        if g.edge_count > MAX_EDGES:
            raise ValidationError(f"oracle limited to {MAX_EDGES} edges")
        if g.node_count > MAX_NODES:
            raise ValidationError(f"oracle limited to {MAX_NODES} nodes")
        self.g = g
        self.src = g.src.astype(np.uint64)
        self.dst = g.dst.astype(np.uint64)
        m = g.edge_count
        if model is DiffusionModel.IC:
            uncertain = np.flatnonzero((g.prob > 0) & (g.prob < 1))
            u = len(uncertain)
            bits = ((np.arange(2**u)[:, None] >> np.arange(u)) & 1).astype(bool)
            live = np.zeros((2**u, m), dtype=bool)
            live[:, g.prob >= 1] = True
            live[:, uncertain] = bits
            p = g.prob[uncertain]
            prob = np.prod(np.where(bits, p, 1 - p), axis=1) if u else np.ones(1)
        else:
            g.check_lt()
            choices = []
            for v in range(g.node_count):
                eids = g.in_eids[g.in_indptr[v]:g.in_indptr[v + 1]].tolist()
                stay = 1.0 - g.prob[eids].sum() if eids else 1.0
                opts = [(e, g.prob[e]) for e in eids if g.prob[e] > 0]
                if stay > 1e-15 or not opts:
                    opts.append((-1, max(stay, 0.0)))
                choices.append(opts)
            combos = list(itertools.product(*choices))
            live = np.zeros((len(combos), m), dtype=bool)
            prob = np.ones(len(combos))
            for w, combo in enumerate(combos):
                for e, pe in combo:
                    if e >= 0:
                        live[w, e] = True
                    prob[w] *= pe
        self.live = live
        self.prob = prob

    def reach(self, seeds, blocked_nodes=(), blocked_edges=()):
        """Per-world bitmask of nodes reachable from ``seeds``."""
        seed_mask = np.uint64(0)
        for s in seeds:
            seed_mask |= np.uint64(1) << np.uint64(s)
        live = self.live
        if len(blocked_nodes) or len(blocked_edges):
            live = live.copy()
            live[:, list(blocked_edges)] = False
            bn = np.zeros(self.g.node_count, dtype=bool)
            bn[list(blocked_nodes)] = True
            live[:, bn[self.g.src] | bn[self.g.dst]] = False
        reach = np.full(len(self.prob), seed_mask, dtype=np.uint64)
        one = np.uint64(1)
        while True:
            before = reach.copy()
            for e in range(live.shape[1]):
                on = live[:, e] & (((reach >> self.src[e]) & one) == one)
                reach |= on.astype(np.uint64) << self.dst[e]
            if np.array_equal(before, reach):
                return reach

    def spread(self, seeds, **kw):
        """Expected number of nodes reachable from ``seeds``."""
        return float(self.prob @ _popcount(self.reach(seeds, **kw)))

    def activation(self, seeds):
        """Probability that each node is reached from ``seeds``."""
        r = self.reach(seeds)
        bits = ((r[:, None] >> np.arange(self.g.node_count, dtype=np.uint64)) & np.uint64(1))
        return self.prob @ bits.astype(np.float64)


def exact_spread(g, seeds, model="ic", blocked_nodes=(), blocked_edges=()):
    """Exact expected spread by live-edge enumeration."""
    return LiveEdgeWorlds(g, model).spread(list(seeds), blocked_nodes=blocked_nodes,
                                          blocked_edges=blocked_edges)


def exact_spread_ic(g, seeds):
    """Exact IC spread of ``seeds`` over all ``2^|E|`` live-edge subsets."""
    return exact_spread(g, seeds, "ic")


def exact_spread_lt(g, seeds):
    """Exact LT spread of ``seeds``."""
    return exact_spread(g, seeds, "lt")


class ExactObjective:
    """Exact instance objective ``σ(S)`` on a small graph."""

    def __init__(self, inst):
        self.inst = inst
        self.worlds = LiveEdgeWorlds(inst.graph, inst.model)
        if inst.kind is InstanceKind.ADVIM:
            self.base = self.worlds.spread(list(inst.seed_set))
        self._act = {}

    def _activation(self, seeds):
        key = tuple(sorted(seeds))
        if key not in self._act:
            self._act[key] = self.worlds.activation(key)
        return self._act[key]

    def __call__(self, S):
        inst = self.inst
        S = sorted({int(e) for e in S})
        n = inst.graph.node_count
        if inst.kind is InstanceKind.IM:
            return self.worlds.spread(S)
        if inst.kind in (InstanceKind.RM, InstanceKind.MRIM):
            rounds = [[] for _ in range(inst.ground.rounds)]
            for e in S:
                rounds[e // n].append(e % n)
            if inst.kind is InstanceKind.RM:
                return float(sum(a * self._activation(r).sum()
                                 for a, r in zip(inst.alpha, rounds)))
            miss = np.ones(n)
            for r in rounds:
                miss *= 1.0 - self._activation(r)
            return float((1.0 - miss).sum())
        m = len(inst.ground.nonseed)
        nodes = [int(inst.ground.nonseed[e]) for e in S if e < m]
        edges = [e - m for e in S if e >= m]
        cut = self.worlds.spread(list(inst.seed_set), blocked_nodes=nodes,
                                 blocked_edges=edges)
        return self.base - cut


def exact_objective(inst, S):
    """Exact ``σ(S)`` of an instance on a graph with at most 20 edges."""
    return ExactObjective(inst)(S)


# ---------------------------------------------------------- coverage oracles


def _masks(coll):
    masks = np.zeros(coll.theta, dtype=np.int64)
    for i in range(coll.theta):
        for e in coll[i].tolist():
            masks[i] |= 1 << e
    return masks


def _subset_matrix(n):
    return ((np.arange(2**n)[:, None] >> np.arange(n)) & 1).astype(bool)


def _coverage_of_subsets(coll, n):
    subs = np.arange(2**n, dtype=np.int64)
    cov = np.zeros(2**n, dtype=np.int64)
    for mask in _masks(coll).tolist():
        cov += (subs & mask) != 0
    return cov


def brute_F(coll, x):
    """Multilinear extension by enumerating all ``2^n`` subsets."""
    n = coll.n
    if n > MAX_GROUND:
        raise ValidationError(f"brute_F limited to {MAX_GROUND} elements")
    x = np.asarray(x, dtype=np.float64)
    bits = _subset_matrix(n)
    prob = np.prod(np.where(bits, x, 1.0 - x), axis=1)
    return float(prob @ _coverage_of_subsets(coll, n))


def brute_F_weighted(coll, x, w):
    """Weighted multilinear extension by enumerating ``(Ω(x), Φ_S)`` pairs.

    Every element is outside ``S`` (prob ``1 - x_i``), inside but ineffective
    (``x_i (1 - w_i)``), or inside and effective (``x_i w_i``); the value is
    the coverage of the effective elements.
    """
    n = coll.n
    if n > 10:
        raise ValidationError("brute_F_weighted limited to 10 elements")
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    states = np.array(list(itertools.product(range(3), repeat=n)), dtype=np.int64).reshape(-1, n)
    p = np.stack([1.0 - x, x * (1.0 - w), x * w])
    prob = np.prod(p[states, np.arange(n)], axis=1)
    eff = (states == 2).astype(np.int64) @ (1 << np.arange(n, dtype=np.int64))
    cov = _coverage_of_subsets(coll, n)
    return float(prob @ cov[eff])


def brute_weighted_coverage(coll, S, w):
    """``Σ_{S'⊆S} Π_{S'} w Π_{S\\S'} (1-w) Λ(S')`` for ``|S| ≤ 12``."""
    S = sorted({int(e) for e in S})
    if len(S) > MAX_ENUM:
        raise ValidationError(f"limited to |S| <= {MAX_ENUM}")
    w = np.asarray(w, dtype=np.float64)
    from .selection import coverage
    total = 0.0
    for keep in itertools.product((False, True), repeat=len(S)):
        p = 1.0
        sub = []
        for e, k in zip(S, keep):
            p *= w[e] if k else 1.0 - w[e]
            if k:
                sub.append(e)
        total += p * coverage(coll, sub)
    return total


def independent_sets(matroid):
    """All independent sets as bitmask-ordered tuples (``n ≤ 12``)."""
    n = matroid.n
    if n > MAX_ENUM:
        raise ValidationError(f"enumeration limited to {MAX_ENUM} elements")
    out = []
    for mask in range(2**n):
        S = tuple(i for i in range(n) if mask >> i & 1)
        if matroid.is_independent(S):
            out.append(S)
    return out


def bases(matroid):
    """All bases (``n ≤ 12``)."""
    r = matroid.rank
    return [S for S in independent_sets(matroid) if len(S) == r]


def brute_opt_coverage(coll, matroid):
    """Independent set of maximum coverage and its value.

    Among optimal sets the base that comes first in bitmask order is returned.
    """
    n = coll.n
    if n > MAX_ENUM or matroid.n != n:
        raise ValidationError(f"enumeration limited to {MAX_ENUM} elements")
    cov = _coverage_of_subsets(coll, n)
    best, best_val = None, -1
    for S in bases(matroid):
        mask = sum(1 << i for i in S)
        if cov[mask] > best_val:
            best, best_val = S, int(cov[mask])
    return list(best), best_val


def brute_opt_objective(inst):
    """Base maximizing the exact objective, and its value."""
    if inst.n > MAX_ENUM:
        raise ValidationError(f"enumeration limited to {MAX_ENUM} elements")
    f = ExactObjective(inst)
    best, best_val = None, -np.inf
    for S in bases(inst.matroid):
        v = f(S)
        if v > best_val + 1e-12:
            best, best_val = S, v
    return list(best), float(best_val)
