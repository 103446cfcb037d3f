"""IM-GM problem instances, RR-set generation and RR collections.

Four instances are supported.

* ``IM``: elements are nodes, uniform matroid of rank ``k``.
* ``RM``: element ``(v, t)`` has id ``(t-1)|V| + v``; at most ``k_v`` rounds per node.
* ``MRIM``: same encoding; at most ``k`` nodes per round.
* ``AdvIM``: non-seed nodes occupy ``[0, |V\\A|)`` through a compaction table
  and edge ``e`` has id ``|V\\A| + e``; at most ``k_v`` nodes and ``k_e`` edges.

An RR set is a pure function of ``(seed, index)``.  Collections grow by
appending consecutive indices, so growing ``0 -> 4 -> 8`` equals ``0 -> 8``.
"""

import enum
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit
from scipy.special import gammaln

from ._rng import as_u64, next_below, next_uniform, stream_key
from .diffusion import DiffusionModel, RngStream, reverse_ic, reverse_lt_step, simulate_counts, summarize
from .errors import ConfigurationError, FormatError, ParseError, ValidationError
from .graph import Graph
from .matroid import PartitionMatroid, UniformMatroid

RR_MAGIC = "#imgm-rr 1"
KAPPA_SIMS = 10_000
MAX_REGEN_TRIES = 1_000_000


class InstanceKind(str, enum.Enum):
    IM = "IM"
    RM = "RM"
    MRIM = "MRIM"
    ADVIM = "AdvIM"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        for kind in cls:
            if kind.value.lower() == str(value).lower():
                return kind
        raise ConfigurationError(f"unknown instance kind {value!r}")


class AdvMode(str, enum.Enum):
    EMPTY_MISS = "empty_miss"
    REGENERATE = "regenerate"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower().replace("-", "_"))
        except ValueError:
            raise ConfigurationError(f"unknown AdvIM mode {value!r}") from None


_KIND_CODE = {InstanceKind.IM: 0, InstanceKind.RM: 1, InstanceKind.MRIM: 2, InstanceKind.ADVIM: 3}


def ln_binom(n, k):
    """Natural log of the binomial coefficient via log-gamma."""
    if k < 0 or k > n:
        return -math.inf
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


# ------------------------------------------------------------------ ground set


@dataclass(frozen=True, eq=False)
class GroundSet:
    """Encoding between element ids and natural coordinates.

    Natural coordinates are ``v`` (IM), ``(v, t)`` with 1-based ``t`` (RM,
    MRIM), and ``("node", v)`` or ``("edge", e)`` (AdvIM), all in dense graph
    ids.  ``labels``, ``edge_src`` and ``edge_dst`` allow decoding to original
    node labels without the graph.
    """

    kind: InstanceKind
    node_count: int
    rounds: int = 1
    labels: np.ndarray = None
    nonseed: np.ndarray = None
    edge_src: np.ndarray = None
    edge_dst: np.ndarray = None
    node_elem: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        labels = self.labels
        if labels is None:
            labels = np.arange(self.node_count, dtype=np.int64)
        object.__setattr__(self, "labels", np.asarray(labels))
        if self.kind is InstanceKind.ADVIM:
            nonseed = np.asarray(self.nonseed, dtype=np.int64)
            node_elem = np.full(self.node_count, -1, dtype=np.int64)
            node_elem[nonseed] = np.arange(len(nonseed))
            object.__setattr__(self, "nonseed", nonseed)
            object.__setattr__(self, "node_elem", node_elem)
            object.__setattr__(self, "edge_src", np.asarray(self.edge_src, dtype=np.int64))
            object.__setattr__(self, "edge_dst", np.asarray(self.edge_dst, dtype=np.int64))

    @property
    def size(self):
        if self.kind is InstanceKind.ADVIM:
            return len(self.nonseed) + len(self.edge_src)
        return self.node_count * self.rounds

    def encode(self, coord):
        """Element id of a natural coordinate."""
        n = self.node_count
        if self.kind is InstanceKind.IM:
            v = int(coord)
            if not 0 <= v < n:
                raise ValidationError(f"node {v} out of range")
            return v
        if self.kind in (InstanceKind.RM, InstanceKind.MRIM):
            v, t = (int(c) for c in coord)
            if not (0 <= v < n and 1 <= t <= self.rounds):
                raise ValidationError(f"element {(v, t)} out of range")
            return (t - 1) * n + v
        tag, idx = coord
        idx = int(idx)
        if tag == "node":
            if not 0 <= idx < n or self.node_elem[idx] < 0:
                raise ValidationError(f"node {idx} is not a blockable node")
            return int(self.node_elem[idx])
        if tag == "edge":
            if not 0 <= idx < len(self.edge_src):
                raise ValidationError(f"edge {idx} out of range")
            return len(self.nonseed) + idx
        raise ValidationError(f"unknown element tag {tag!r}")

    def decode(self, elem):
        """Natural coordinate of an element id."""
        elem = int(elem)
        if not 0 <= elem < self.size:
            raise ValidationError(f"element {elem} out of range")
        n = self.node_count
        if self.kind is InstanceKind.IM:
            return elem
        if self.kind in (InstanceKind.RM, InstanceKind.MRIM):
            return (elem % n, elem // n + 1)
        m = len(self.nonseed)
        if elem < m:
            return ("node", int(self.nonseed[elem]))
        return ("edge", elem - m)

    def describe(self, elem):
        """Decoded element with original node labels, as JSON-friendly values."""
        c = self.decode(elem)
        lab = self.labels
        if self.kind is InstanceKind.IM:
            return _plain(lab[c])
        if self.kind in (InstanceKind.RM, InstanceKind.MRIM):
            return [_plain(lab[c[0]]), c[1]]
        if c[0] == "node":
            return ["node", _plain(lab[c[1]])]
        e = c[1]
        return ["edge", _plain(lab[self.edge_src[e]]), _plain(lab[self.edge_dst[e]])]

    def format_line(self, elem):
        """One line of a solution file."""
        d = self.describe(elem)
        return " ".join(str(x) for x in d) if isinstance(d, list) else str(d)

    def parse_line(self, text, lineno=None):
        """Element id of one solution-file line (inverse of :meth:`format_line`)."""
        parts = text.split()
        index = {lab: i for i, lab in enumerate(self.labels.tolist())}

        def node(tok):
            try:
                return index[int(tok)]
            except (ValueError, KeyError):
                raise ParseError(f"unknown node {tok!r}", lineno) from None

        try:
            if self.kind is InstanceKind.IM and len(parts) == 1:
                return self.encode(node(parts[0]))
            if self.kind in (InstanceKind.RM, InstanceKind.MRIM) and len(parts) == 2:
                return self.encode((node(parts[0]), int(parts[1])))
            if self.kind is InstanceKind.ADVIM:
                if len(parts) == 2 and parts[0] == "node":
                    return self.encode(("node", node(parts[1])))
                if len(parts) == 3 and parts[0] == "edge":
                    u, v = node(parts[1]), node(parts[2])
                    hits = np.flatnonzero((self.edge_src == u) & (self.edge_dst == v))
                    if len(hits) == 0:
                        raise ParseError(f"no edge {parts[1]} -> {parts[2]}", lineno)
                    return self.encode(("edge", int(hits[0])))
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(str(exc), lineno) from None
        raise ParseError(f"malformed solution line {text!r}", lineno)

    def to_dict(self):
        d = {"kind": self.kind.value, "node_count": self.node_count,
             "rounds": self.rounds, "labels": [_plain(x) for x in self.labels.tolist()]}
        if self.kind is InstanceKind.ADVIM:
            d.update(nonseed=self.nonseed.tolist(), edge_src=self.edge_src.tolist(),
                     edge_dst=self.edge_dst.tolist())
        return d

    @classmethod
    def from_dict(cls, d):
        kind = InstanceKind.parse(d["kind"])
        extra = {}
        if kind is InstanceKind.ADVIM:
            extra = dict(nonseed=d["nonseed"], edge_src=d["edge_src"], edge_dst=d["edge_dst"])
        return cls(kind, int(d["node_count"]), int(d.get("rounds", 1)),
                   np.asarray(d["labels"]), **extra)


def _plain(x):
    return x.item() if hasattr(x, "item") else x


# ------------------------------------------------------------------- instance


@dataclass(frozen=True, eq=False)
class Instance:
    """An IM-GM problem bound to its encoding, matroid and RR constants.

    ``kappa`` scales coverage into the objective; ``theta_kappa`` is the
    constant used in the worst-case sample size (they differ only for AdvIM
    in regeneration mode).
    """

    kind: InstanceKind
    graph: Graph
    model: DiffusionModel
    ground: GroundSet
    matroid: PartitionMatroid
    kappa: float
    sigma_l_star: float
    ln_num_bases: float
    params: dict
    theta_kappa: float
    adv_mode: AdvMode = AdvMode.EMPTY_MISS
    seed_set: tuple = ()
    alpha: np.ndarray = None

    @property
    def n(self):
        return self.ground.size

    def header(self):
        """Serializable description sufficient to rebuild matroid and decoding."""
        return {"kind": self.kind.value, "model": self.model.value,
                "params": self.params, "kappa": self.kappa,
                "adv_mode": self.adv_mode.value, "ground": self.ground.to_dict()}


def build_matroid(kind, ground, params):
    """Matroid of an instance from its ground set and parameters."""
    kind = InstanceKind.parse(kind)
    n = ground.node_count
    if kind is InstanceKind.IM:
        return UniformMatroid(n, params["k"])
    if kind is InstanceKind.RM:
        return PartitionMatroid(np.tile(np.arange(n), ground.rounds), params["k_per_node"])
    if kind is InstanceKind.MRIM:
        return PartitionMatroid(np.repeat(np.arange(ground.rounds), n),
                                [params["k"]] * ground.rounds)
    m, e = len(ground.nonseed), len(ground.edge_src)
    return PartitionMatroid(np.concatenate([np.zeros(m, np.int64), np.ones(e, np.int64)]),
                            [params["kv"], params["ke"]])


def _require_int(name, value, low=None):
    if value is None:
        raise ConfigurationError(f"parameter {name} is required")
    if int(value) != value:
        raise ConfigurationError(f"parameter {name} must be an integer")
    value = int(value)
    if low is not None and value < low:
        raise ConfigurationError(f"parameter {name} must be at least {low}")
    return value


def make_instance(kind, graph, model=None, *, k=None, T=None, alpha=None,
                  k_per_node=None, seed_set=None, kv=None, ke=None,
                  adv_mode="empty_miss", kappa_sims=KAPPA_SIMS, kappa_seed=0):
    """Bind a graph and parameters into an :class:`Instance`.

    ``model`` defaults to IC, or LT for AdvIM.  For RM, ``k_per_node`` is a
    scalar or per-node sequence of caps and ``alpha`` defaults to all ones.
    For AdvIM, ``seed_set`` holds dense node ids; in regeneration mode the
    scaling constant ``ρ_G(A) - |A|`` is estimated from ``kappa_sims``
    forward simulations seeded with ``kappa_seed``.
    """
    kind = InstanceKind.parse(kind)
    if model is None:
        model = DiffusionModel.LT if kind is InstanceKind.ADVIM else DiffusionModel.IC
    model = DiffusionModel.parse(model)
    g = graph
    if model is DiffusionModel.LT:
        g = g.merge_parallel()
        g.check_lt()
    n = g.node_count
    if n == 0:
        raise ValidationError("graph has no nodes")
    mode = AdvMode.parse(adv_mode)
    seeds, alpha_arr = (), None

    if kind is InstanceKind.IM:
        k = _require_int("k", k, 1)
        if k > n:
            raise ValidationError(f"k={k} exceeds |V|={n}")
        ground = GroundSet(kind, n, 1, g.labels)
        params = {"k": k}
        kappa = float(n)
        sigma_l = float(k)
        ln_b = ln_binom(n, k)
    elif kind is InstanceKind.RM:
        T = _require_int("T", T, 1)
        alpha_arr = np.ones(T) if alpha is None else np.asarray(alpha, dtype=np.float64)
        if alpha_arr.shape != (T,):
            raise ConfigurationError(f"alpha must have T={T} entries")
        if not np.all(alpha_arr > 0):
            raise ValidationError("alpha values must be positive")
        caps = np.broadcast_to(np.asarray(1 if k_per_node is None else k_per_node,
                                          dtype=np.int64), (n,)).copy()
        if caps.min() < 1 or caps.max() > T:
            raise ValidationError("per-node caps must lie in [1, T]")
        ground = GroundSet(kind, n, T, g.labels)
        params = {"T": T, "alpha": alpha_arr.tolist(),
                  "k_per_node": caps.tolist()}
        kappa = float(alpha_arr.sum() * n)
        sigma_l = float(alpha_arr.max() * n)
        counts = np.bincount(caps, minlength=T + 1)
        ln_b = float(sum(c * ln_binom(T, kk) for kk, c in enumerate(counts) if c))
    elif kind is InstanceKind.MRIM:
        T = _require_int("T", T, 1)
        k = _require_int("k", k, 1)
        if k > n:
            raise ValidationError(f"k={k} exceeds |V|={n}")
        ground = GroundSet(kind, n, T, g.labels)
        params = {"T": T, "k": k}
        kappa = float(n)
        sigma_l = float(min(T * k, n))
        ln_b = T * ln_binom(n, k)
    else:
        if model is not DiffusionModel.LT:
            raise ConfigurationError("AdvIM requires the LT model")
        if not seed_set:
            raise ConfigurationError("AdvIM requires a nonempty seed set")
        seeds = tuple(sorted({int(a) for a in seed_set}))
        if seeds[0] < 0 or seeds[-1] >= n:
            raise ValidationError("seed node out of range")
        kv = _require_int("kv", kv, 0)
        ke = _require_int("ke", ke, 0)
        is_seed = np.zeros(n, dtype=np.bool_)
        is_seed[list(seeds)] = True
        nonseed = np.flatnonzero(~is_seed)
        if len(nonseed) == 0:
            raise ValidationError("every node is a seed; nothing can be blocked")
        if kv > len(nonseed) or ke > g.edge_count:
            raise ValidationError("blocking budget exceeds the number of candidates")
        if kv + ke == 0:
            raise ValidationError("kv + ke must be positive")
        ground = GroundSet(kind, n, 1, g.labels, nonseed, g.src, g.dst)
        params = {"kv": kv, "ke": ke, "seed_set": list(seeds)}
        sigma_l = 1.0
        ln_b = ln_binom(len(nonseed), kv) + ln_binom(g.edge_count, ke)
        if mode is AdvMode.EMPTY_MISS:
            kappa = float(len(nonseed))
        else:
            est = summarize(simulate_counts(g, model, [seeds], kappa_sims,
                                            RngStream(kappa_seed)))
            kappa = est.mean - len(seeds)
            if kappa <= 0:
                raise ConfigurationError("seed set activates no other node; "
                                         "regeneration mode is undefined")
    theta_kappa = float(len(ground.nonseed)) if kind is InstanceKind.ADVIM else kappa
    matroid = build_matroid(kind, ground, params)
    return Instance(kind, g, model, ground, matroid, kappa, sigma_l, max(ln_b, 0.0),
                    params, theta_kappa, mode, seeds, alpha_arr)


def synthetic_seed_set(graph, rng, p=0.5):
    """Seed set of the largest out-degree node plus each out-neighbour w.p. ``p``."""
    deg = graph.out_degree()
    hub = int(np.argmax(deg))
    nbrs = sorted({d for d, _ in graph.out_adj(hub)} - {hub})
    gen = np.random.default_rng([rng.seed & 0xFFFFFFFFFFFFFFFF, rng.stream_index])
    keep = [v for v in nbrs if gen.random() < p]
    return sorted({hub, *keep})


# ------------------------------------------------------------------ generation


@njit(cache=True, nogil=True)
def _generate_batch(kind, seed, start, count, n, in_indptr, in_eids, src, prob,
                    T, alpha_cum, roots, node_elem, is_seed, regen, max_tries):
    indptr = np.zeros(count + 1, dtype=np.int64)
    cap = max(64, 4 * count)
    elems = np.empty(cap, dtype=np.int64)
    stamp = np.full(n, -1, dtype=np.int64)
    buf = np.empty(max(n, 1), dtype=np.int64)
    tmp = np.empty(max(T * n, 2 * n + 2), dtype=np.int64)
    n_node_elems = len(roots)
    state = np.empty(1, dtype=np.uint64)
    mark = 0
    pos = 0
    ok = True
    for s in range(count):
        state[0] = stream_key(seed, start + np.uint64(s))
        size = 0
        if kind == 0 or kind == 1:
            root = next_below(state, n)
            j = 0
            if kind == 1:
                u = next_uniform(state) * alpha_cum[T - 1]
                j = np.searchsorted(alpha_cum, u, side="right")
                if j > T - 1:
                    j = T - 1
            c = reverse_ic(in_indptr, in_eids, src, prob, root, state, stamp, mark, buf)
            mark += 1
            for q in range(c):
                tmp[q] = j * n + buf[q]
            size = c
        elif kind == 2:
            root = next_below(state, n)
            for t in range(T):
                c = reverse_ic(in_indptr, in_eids, src, prob, root, state, stamp, mark, buf)
                mark += 1
                for q in range(c):
                    tmp[size + q] = t * n + buf[q]
                size += c
        else:
            tries = 0
            while True:
                root = roots[next_below(state, n_node_elems)]
                stamp[root] = mark
                tmp[0] = node_elem[root]
                size = 1
                hit = False
                a = root
                while True:
                    e = reverse_lt_step(in_indptr, in_eids, prob, a, state)
                    if e < 0:
                        break
                    b = src[e]
                    if is_seed[b]:
                        tmp[size] = n_node_elems + e
                        size += 1
                        hit = True
                        break
                    if stamp[b] == mark:
                        break
                    stamp[b] = mark
                    tmp[size] = n_node_elems + e
                    tmp[size + 1] = node_elem[b]
                    size += 2
                    a = b
                mark += 1
                if hit:
                    break
                size = 0
                if not regen:
                    break
                tries += 1
                if tries >= max_tries:
                    ok = False
                    break
            if not ok:
                break
        if pos + size > cap:
            while pos + size > cap:
                cap *= 2
            grown = np.empty(cap, dtype=np.int64)
            grown[:pos] = elems[:pos]
            elems = grown
        block = np.sort(tmp[:size])
        elems[pos:pos + size] = block
        pos += size
        indptr[s + 1] = pos
    return indptr, elems[:pos].copy(), ok


def _batch(inst, seed, start, count):
    g = inst.graph
    ground = inst.ground
    T = ground.rounds
    if inst.alpha is not None:
        alpha_cum = np.cumsum(inst.alpha)
    else:
        alpha_cum = np.ones(1)
    if inst.kind is InstanceKind.ADVIM:
        roots = ground.nonseed
        node_elem = ground.node_elem
        is_seed = np.zeros(g.node_count, dtype=np.bool_)
        is_seed[list(inst.seed_set)] = True
    else:
        roots = np.zeros(1, dtype=np.int64)
        node_elem = roots
        is_seed = np.zeros(1, dtype=np.bool_)
    indptr, elems, ok = _generate_batch(
        _KIND_CODE[inst.kind], as_u64(seed), as_u64(start), int(count), g.node_count,
        g.in_indptr, g.in_eids, g.src, g.prob, T, alpha_cum, roots, node_elem,
        is_seed, inst.adv_mode is AdvMode.REGENERATE, MAX_REGEN_TRIES)
    if not ok:
        raise ConfigurationError("regeneration found no walk reaching the seed set")
    return indptr, elems


def generate_rr(inst, index, rng_base):
    """RR set with stream ``(rng_base, index)`` as a sorted element-id array."""
    _, elems = _batch(inst, rng_base, index, 1)
    return elems


# ----------------------------------------------------------------- collection


class RRCollection:
    """Immutable bag of RR sets in flattened CSR form with an inverted index.

    Set ``i`` is ``elements[indptr[i]:indptr[i+1]]``.  Set ``i`` was generated
    with stream index ``offset + i`` under ``seed``.
    """

    def __init__(self, n, indptr, elements, seed=0, offset=0, kind=None, kappa=None):
        self.n = int(n)
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.elements = np.ascontiguousarray(elements, dtype=np.int64)
        self.seed = int(seed)
        self.offset = int(offset)
        self.kind = kind
        self.kappa = kappa
        if len(self.indptr) == 0 or self.indptr[0] != 0 or self.indptr[-1] != len(self.elements):
            raise ValidationError("inconsistent RR collection layout")
        if len(self.elements) and (self.elements.min() < 0 or self.elements.max() >= self.n):
            raise ValidationError("RR element id out of range")
        self.set_of = np.repeat(np.arange(self.theta, dtype=np.int64), np.diff(self.indptr))
        order = np.argsort(self.elements, kind="stable")
        self.inv_sets = self.set_of[order]
        self.inv_indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(self.elements, minlength=self.n), out=self.inv_indptr[1:])
        for arr in (self.indptr, self.elements, self.set_of, self.inv_sets, self.inv_indptr):
            arr.setflags(write=False)

    @classmethod
    def from_sets(cls, n, sets, **kw):
        """Build from a sequence of element lists (deduplicated and sorted)."""
        sets = [np.unique(np.asarray(s, dtype=np.int64)) for s in sets]
        indptr = np.zeros(len(sets) + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(s) for s in sets])
        elems = np.concatenate(sets) if sets else np.zeros(0, dtype=np.int64)
        return cls(n, indptr, elems, **kw)

    @property
    def theta(self):
        return len(self.indptr) - 1

    count = theta

    def __len__(self):
        return self.theta

    def __getitem__(self, i):
        return self.elements[self.indptr[i]:self.indptr[i + 1]]

    @property
    def sets(self):
        return [self[i].tolist() for i in range(self.theta)]

    def sizes(self):
        return np.diff(self.indptr)

    def sets_containing(self, e):
        """Indices of RR sets that contain element ``e``."""
        return self.inv_sets[self.inv_indptr[e]:self.inv_indptr[e + 1]]

    def degree(self):
        """Number of RR sets containing each element."""
        return np.diff(self.inv_indptr)

    def nonempty(self):
        return int(np.count_nonzero(np.diff(self.indptr)))

    def same_sets(self, other):
        return (np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.elements, other.elements))


def _generate_range(inst, seed, start, count, threads):
    if count <= 0:
        return np.zeros(1, dtype=np.int64), np.zeros(0, dtype=np.int64)
    threads = max(1, int(threads))
    if threads == 1 or count < 2 * threads:
        return _batch(inst, seed, start, count)
    bounds = np.linspace(0, count, threads + 1).astype(np.int64)
    with ThreadPoolExecutor(threads) as pool:
        parts = list(pool.map(lambda i: _batch(inst, seed, start + int(bounds[i]),
                                               int(bounds[i + 1] - bounds[i])),
                              range(threads)))
    return _concat(parts)


def _concat(parts):
    indptrs, elems, base = [np.zeros(1, dtype=np.int64)], [], 0
    for ip, el in parts:
        indptrs.append(ip[1:] + base)
        elems.append(el)
        base += len(el)
    return np.concatenate(indptrs), np.concatenate(elems) if elems else np.zeros(0, np.int64)


def new_collection(inst, count, seed, offset=0, threads=1):
    """Collection of ``count`` RR sets with stream indices ``offset, offset+1, ...``."""
    if count < 0:
        raise ValidationError("count must be non-negative")
    indptr, elems = _generate_range(inst, seed, offset, count, threads)
    return RRCollection(inst.n, indptr, elems, seed, offset, inst.kind.value, inst.kappa)


def grow_collection(inst, coll, target, threads=1):
    """Collection extended to ``target`` sets with the next stream indices.

    Existing sets are kept as they are; new sets continue the stream.
    """
    if target < coll.theta:
        raise ValidationError("target is smaller than the current collection")
    if target == coll.theta:
        return coll
    ip, el = _generate_range(inst, coll.seed, coll.offset + coll.theta,
                             target - coll.theta, threads)
    indptr, elems = _concat([(coll.indptr, coll.elements), (ip, el)])
    return RRCollection(coll.n, indptr, elems, coll.seed, coll.offset, coll.kind, coll.kappa)


def coverage_count(coll, S):
    """Number of RR sets hit by ``S``."""
    S = np.unique(np.asarray(list(S), dtype=np.int64))
    if len(S) == 0 or coll.theta == 0:
        return 0
    hit = np.zeros(coll.theta, dtype=np.bool_)
    for e in S.tolist():
        hit[coll.sets_containing(e)] = True
    return int(np.count_nonzero(hit))


def estimate_objective(inst, coll, S):
    """Unbiased RR estimate ``κ/θ · Λ(S)``."""
    if coll.theta == 0:
        raise ValidationError("estimate requires a nonempty collection")
    return inst.kappa * coverage_count(coll, S) / coll.theta


# ------------------------------------------------------------- Monte Carlo


def _split_rounds(inst, S):
    n = inst.graph.node_count
    rounds = [[] for _ in range(inst.ground.rounds)]
    for e in S:
        rounds[e // n].append(e % n)
    return rounds


def monte_carlo_stats(inst, S, n_sims, rng):
    """Simulation mean and standard error of the instance objective ``σ(S)``.

    AdvIM uses common random numbers: both spreads in each simulation share
    one stream.
    """
    S = sorted({int(e) for e in S})
    if not inst.matroid.is_independent(S):
        raise ValidationError("solution violates the matroid constraint")
    g, model = inst.graph, inst.model
    if inst.kind is InstanceKind.IM:
        vals = simulate_counts(g, model, [S], n_sims, rng)
    elif inst.kind is InstanceKind.RM:
        vals = simulate_counts(g, model, _split_rounds(inst, S), n_sims, rng,
                               weights=inst.alpha)
    elif inst.kind is InstanceKind.MRIM:
        vals = simulate_counts(g, model, _split_rounds(inst, S), n_sims, rng, union=True)
    else:
        m = len(inst.ground.nonseed)
        nodes = [int(inst.ground.nonseed[e]) for e in S if e < m]
        edges = [e - m for e in S if e >= m]
        base = simulate_counts(g, model, [inst.seed_set], n_sims, rng)
        cut = simulate_counts(g, model, [inst.seed_set], n_sims, rng,
                              blocked_nodes=nodes, blocked_edges=edges)
        vals = base - cut
    return summarize(vals)


def monte_carlo_objective(inst, S, n_sims, rng):
    """Simulation estimate of the instance objective ``σ(S)``."""
    return monte_carlo_stats(inst, S, n_sims, rng).mean


# ------------------------------------------------------------- serialization


def write_rr(path, coll, header=None):
    """Write ``coll`` as text: magic line, JSON header, then one set per line."""
    meta = {"n": coll.n, "theta": coll.theta, "seed": coll.seed, "offset": coll.offset,
            "kind": coll.kind, "kappa": coll.kappa}
    if header:
        meta["instance"] = header
    with open(Path(path), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(RR_MAGIC + "\n")
        fh.write(json.dumps(meta, sort_keys=True, separators=(",", ":")) + "\n")
        for i in range(coll.theta):
            fh.write(" ".join(map(str, coll[i].tolist())) + "\n")


def read_rr(path):
    """Read a collection written by :func:`write_rr`; returns ``(coll, meta)``."""
    with open(Path(path), "r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if not lines or lines[0] != RR_MAGIC:
        raise FormatError("not an RR collection file", 1)
    if len(lines) < 2:
        raise FormatError("missing header", 2)
    try:
        meta = json.loads(lines[1])
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad header: {exc}", 2) from None
    theta = int(meta["theta"])
    # every set line ends in a newline, so a complete file splits into θ + 3 parts
    body = lines[2:2 + theta]
    if len(lines) != theta + 3 or lines[-1] != "":
        raise FormatError(f"expected {theta} set lines", min(len(lines), theta + 3))
    sets = []
    for i, line in enumerate(body):
        try:
            sets.append([int(t) for t in line.split()])
        except ValueError:
            raise ParseError("non-integer element", i + 3) from None
    coll = RRCollection.from_sets(meta["n"], sets, seed=meta["seed"], offset=meta["offset"],
                                  kind=meta.get("kind"), kappa=meta.get("kappa"))
    return coll, meta
