"""Forward IC/LT simulation and the single reverse-diffusion primitives.

Randomness is counter based.  A forward IC run flips the coin of edge ``e`` at
position ``e`` of its stream and an LT run draws the threshold of node ``j`` at
position ``j`` of a salted stream.  Two runs sharing an :class:`RngStream` are
therefore coupled: with the same stream, ``S ⊆ S'`` implies
``result(S) ⊆ result(S')``.  Reverse primitives draw sequentially from the
stream of the RR set being built.
"""

import enum
from dataclasses import dataclass

import numpy as np
from numba import njit

from ._rng import (SALT_THRESHOLD, as_u64, mix64, next_uniform, stream_key,
                   uniform_at)
from .errors import ConfigurationError, ValidationError


class DiffusionModel(str, enum.Enum):
    """Diffusion model: independent cascade or linear threshold."""

    IC = "ic"
    LT = "lt"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ConfigurationError(f"unknown diffusion model {value!r}") from None


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream identified by ``(seed, stream_index)``."""

    seed: int
    stream_index: int = 0

    def key(self):
        return int(stream_key(as_u64(self.seed), as_u64(self.stream_index)))

    def offset(self, k):
        """The stream ``k`` positions further along."""
        return RngStream(self.seed, self.stream_index + int(k))


@dataclass(frozen=True)
class SpreadEstimate:
    """Sample mean and standard error of a Monte Carlo estimate."""

    mean: float
    stderr: float
    n_sims: int

    def __iter__(self):
        return iter((self.mean, self.stderr))


# --------------------------------------------------------------------- kernels


@njit(cache=True, nogil=True)
def ic_forward(out_indptr, out_eids, dst, prob, seeds, blocked_node,
               blocked_edge, key, stamp, mark, queue):
    """One IC instance; active nodes are written to ``queue``, count returned.

    ``stamp[v] == mark`` flags ``v`` active, so scratch arrays are reused
    across calls without clearing.
    """
    count = 0
    for s in seeds:
        if stamp[s] != mark:
            stamp[s] = mark
            queue[count] = s
            count += 1
    head = 0
    while head < count:
        u = queue[head]
        head += 1
        for k in range(out_indptr[u], out_indptr[u + 1]):
            e = out_eids[k]
            v = dst[e]
            if stamp[v] == mark or blocked_edge[e] or blocked_node[v]:
                continue
            if uniform_at(key, e) < prob[e]:
                stamp[v] = mark
                queue[count] = v
                count += 1
    return count


@njit(cache=True, nogil=True)
def lt_forward(out_indptr, out_eids, dst, prob, seeds, blocked_node,
               blocked_edge, key, stamp, mark, queue, acc, acc_stamp):
    """One LT instance; same conventions as :func:`ic_forward`.

    ``acc`` holds accumulated incoming weight, valid where ``acc_stamp == mark``.
    """
    tkey = mix64(key ^ SALT_THRESHOLD)
    count = 0
    for s in seeds:
        if stamp[s] != mark:
            stamp[s] = mark
            queue[count] = s
            count += 1
    head = 0
    while head < count:
        u = queue[head]
        head += 1
        for k in range(out_indptr[u], out_indptr[u + 1]):
            e = out_eids[k]
            v = dst[e]
            if stamp[v] == mark or blocked_edge[e] or blocked_node[v]:
                continue
            if acc_stamp[v] != mark:
                acc_stamp[v] = mark
                acc[v] = 0.0
            acc[v] += prob[e]
            if acc[v] > uniform_at(tkey, v):
                stamp[v] = mark
                queue[count] = v
                count += 1
    return count


@njit(cache=True, nogil=True)
def forward_counts(out_indptr, out_eids, dst, prob, is_lt, round_ptr,
                   round_seeds, round_weight, union_mode, blocked_node,
                   blocked_edge, seed, start, n_sims):
    """Objective value of ``n_sims`` consecutive-stream simulations.

    Each simulation runs one independent diffusion per round; round ``t`` uses
    seeds ``round_seeds[round_ptr[t]:round_ptr[t+1]]``.  The value is the
    weighted sum of round spreads, or the size of the union of activated sets
    when ``union_mode`` is set.
    """
    n = len(out_indptr) - 1
    rounds = len(round_ptr) - 1
    out = np.zeros(n_sims, dtype=np.float64)
    stamp = np.full(n, -1, dtype=np.int64)
    acc_stamp = np.full(n, -1, dtype=np.int64)
    union = np.full(n, -1, dtype=np.int64)
    acc = np.zeros(n, dtype=np.float64)
    queue = np.empty(n, dtype=np.int64)
    mark = 0
    for s in range(n_sims):
        key = stream_key(seed, start + np.uint64(s))
        total = 0.0
        ucount = 0
        for t in range(rounds):
            seeds = round_seeds[round_ptr[t]:round_ptr[t + 1]]
            rkey = key if rounds == 1 else mix64(key ^ mix64(np.uint64(t + 1)))
            if is_lt:
                c = lt_forward(out_indptr, out_eids, dst, prob, seeds,
                               blocked_node, blocked_edge, rkey, stamp, mark,
                               queue, acc, acc_stamp)
            else:
                c = ic_forward(out_indptr, out_eids, dst, prob, seeds,
                               blocked_node, blocked_edge, rkey, stamp, mark, queue)
            if union_mode:
                for q in range(c):
                    v = queue[q]
                    if union[v] != s:
                        union[v] = s
                        ucount += 1
            else:
                total += round_weight[t] * c
            mark += 1
        if union_mode:
            out[s] = float(ucount)
        else:
            out[s] = total
    return out


@njit(cache=True, nogil=True)
def reverse_ic(in_indptr, in_eids, src, prob, root, state, stamp, mark, buf):
    """Stochastic reverse BFS from ``root``; reached nodes go to ``buf``."""
    stamp[root] = mark
    buf[0] = root
    count = 1
    head = 0
    while head < count:
        a = buf[head]
        head += 1
        for k in range(in_indptr[a], in_indptr[a + 1]):
            e = in_eids[k]
            b = src[e]
            if stamp[b] == mark:
                continue
            if next_uniform(state) < prob[e]:
                stamp[b] = mark
                buf[count] = b
                count += 1
    return count


@njit(cache=True, nogil=True)
def reverse_lt_step(in_indptr, in_eids, prob, a, state):
    """Edge id chosen by one LT reverse step from ``a``, or -1 to stop."""
    u = next_uniform(state)
    acc = 0.0
    for k in range(in_indptr[a], in_indptr[a + 1]):
        e = in_eids[k]
        acc += prob[e]
        if u < acc:
            return e
    return -1


@njit(cache=True, nogil=True)
def reverse_lt(in_indptr, in_eids, src, prob, root, state, stamp, mark,
               node_buf, edge_buf):
    """Raw LT reverse walk; returns ``(node_count, edge_count)``."""
    stamp[root] = mark
    node_buf[0] = root
    nn = 1
    ne = 0
    a = root
    while True:
        e = reverse_lt_step(in_indptr, in_eids, prob, a, state)
        if e < 0:
            break
        b = src[e]
        if stamp[b] == mark:
            break
        edge_buf[ne] = e
        ne += 1
        stamp[b] = mark
        node_buf[nn] = b
        nn += 1
        a = b
    return nn, ne


# ------------------------------------------------------------------ public API


def _seed_array(g, seeds):
    arr = np.unique(np.asarray(list(seeds), dtype=np.int64))
    if len(arr) and (arr[0] < 0 or arr[-1] >= g.node_count):
        raise ValidationError("seed node out of range")
    return arr


def _no_block(g):
    return np.zeros(g.node_count, dtype=np.bool_), np.zeros(g.edge_count, dtype=np.bool_)


def simulate_spread(g, model, seeds, rng, blocked_nodes=(), blocked_edges=()):
    """Nodes active at the end of one diffusion instance.

    ``blocked_nodes`` never activate and ``blocked_edges`` never fire, which
    realises diffusion on ``G \\ S``.
    """
    model = DiffusionModel.parse(model)
    seeds = _seed_array(g, seeds)
    bn, be = _no_block(g)
    bn[list(blocked_nodes)] = True
    be[list(blocked_edges)] = True
    n = g.node_count
    stamp = np.full(n, -1, dtype=np.int64)
    queue = np.empty(max(n, 1), dtype=np.int64)
    key = as_u64(rng.key())
    if model is DiffusionModel.LT:
        c = lt_forward(g.out_indptr, g.out_eids, g.dst, g.prob, seeds, bn, be,
                       key, stamp, 0, queue, np.zeros(n), np.full(n, -1, dtype=np.int64))
    else:
        c = ic_forward(g.out_indptr, g.out_eids, g.dst, g.prob, seeds, bn, be,
                       key, stamp, 0, queue)
    return set(queue[:c].tolist())


def simulate_counts(g, model, round_seeds, n_sims, rng, weights=None, union=False,
                    blocked_nodes=(), blocked_edges=()):
    """Per-simulation objective values over multi-round diffusions.

    ``round_seeds`` is a sequence of seed sets, one per round.  Simulation
    ``s`` uses stream ``rng.stream_index + s``.
    """
    model = DiffusionModel.parse(model)
    if n_sims < 1:
        raise ValidationError("n_sims must be at least 1")
    arrays = [_seed_array(g, s) for s in round_seeds]
    ptr = np.zeros(len(arrays) + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(a) for a in arrays])
    flat = np.concatenate(arrays) if arrays else np.zeros(0, dtype=np.int64)
    w = np.ones(len(arrays)) if weights is None else np.asarray(weights, dtype=np.float64)
    bn, be = _no_block(g)
    bn[list(blocked_nodes)] = True
    be[list(blocked_edges)] = True
    return forward_counts(g.out_indptr, g.out_eids, g.dst, g.prob,
                          model is DiffusionModel.LT, ptr, flat, w, union, bn, be,
                          as_u64(rng.seed), as_u64(rng.stream_index), int(n_sims))


def summarize(values):
    """Mean and standard error of a sample."""
    values = np.asarray(values, dtype=np.float64)
    n = len(values)
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return SpreadEstimate(mean, stderr, n)


def estimate_spread(g, model, seeds, n_sims, rng):
    """Mean and standard error of the activated count over ``n_sims`` runs."""
    return summarize(simulate_counts(g, model, [seeds], n_sims, rng))


def _reverse_scratch(g):
    n = g.node_count
    return (np.full(n, -1, dtype=np.int64), np.empty(max(n, 1), dtype=np.int64))


def _state(rng):
    return np.array([rng.key()], dtype=np.uint64)


def reverse_step_ic(g, root, rng):
    """Node set reached by a stochastic reverse BFS from ``root``."""
    if not 0 <= root < g.node_count:
        raise ValidationError("root out of range")
    stamp, buf = _reverse_scratch(g)
    c = reverse_ic(g.in_indptr, g.in_eids, g.src, g.prob, int(root), _state(rng),
                   stamp, 0, buf)
    return set(buf[:c].tolist())


def reverse_step_lt(g, root, rng):
    """LT reverse walk from ``root``.

    Returns the visited nodes in order and the traversed edges as
    ``(src, dst)`` pairs in order.  The walk stops on the stop outcome, at a
    node without in-edges, or when it would revisit a node.
    """
    if not 0 <= root < g.node_count:
        raise ValidationError("root out of range")
    stamp, nbuf = _reverse_scratch(g)
    ebuf = np.empty(max(g.node_count, 1), dtype=np.int64)
    nn, ne = reverse_lt(g.in_indptr, g.in_eids, g.src, g.prob, int(root),
                        _state(rng), stamp, 0, nbuf, ebuf)
    eids = ebuf[:ne]
    return nbuf[:nn].tolist(), list(zip(g.src[eids].tolist(), g.dst[eids].tolist()))
