"""Directed social graphs with per-edge influence probabilities.

Edges are stored once, as parallel ``src``/``dst``/``prob`` arrays indexed by a
global edge id.  Forward and reverse adjacency are CSR views over those ids, so
edge identity survives both orientations (blocking an edge in one direction
blocks it in the other).
"""

import logging
from pathlib import Path

import numpy as np

from .errors import FormatError, ParseError, ValidationError

logger = logging.getLogger(__name__)

LT_TOLERANCE = 1e-9


def _csr(keys, node_count):
    """Stable CSR grouping of edge ids by ``keys``."""
    order = np.argsort(keys, kind="stable").astype(np.int64)
    counts = np.bincount(keys, minlength=node_count)
    indptr = np.zeros(node_count + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, order


class Graph:
    """Immutable directed graph with dense node ids in ``[0, node_count)``.

    Parameters
    ----------
    node_count : int
        Number of nodes.
    src, dst : array-like of int
        Edge endpoints.
    prob : array-like of float
        Activation probability of each edge, in [0, 1].
    labels : array-like, optional
        Original node id of each dense id; defaults to the identity.
    """

    def __init__(self, node_count, src, dst, prob, labels=None):
        node_count = int(node_count)
        if node_count < 0:
            raise ValidationError("node_count must be non-negative")
        src = np.ascontiguousarray(src, dtype=np.int64).reshape(-1)
        dst = np.ascontiguousarray(dst, dtype=np.int64).reshape(-1)
        prob = np.ascontiguousarray(prob, dtype=np.float64).reshape(-1)
        if not (len(src) == len(dst) == len(prob)):
            raise ValidationError("src, dst and prob must have equal length")
        if len(src) and (src.min() < 0 or dst.min() < 0
                         or src.max() >= node_count or dst.max() >= node_count):
            raise ValidationError("edge endpoint out of range")
        if len(prob) and (not np.all(np.isfinite(prob))
                          or prob.min() < 0.0 or prob.max() > 1.0):
            raise ValidationError("edge probabilities must lie in [0, 1]")
        if labels is None:
            labels = np.arange(node_count, dtype=np.int64)
        labels = np.asarray(labels)
        if len(labels) != node_count:
            raise ValidationError("labels must have one entry per node")

        self.node_count = node_count
        self.src, self.dst, self.prob, self.labels = src, dst, prob, labels
        self.out_indptr, self.out_eids = _csr(src, node_count)
        self.in_indptr, self.in_eids = _csr(dst, node_count)
        for arr in (src, dst, prob, labels, self.out_indptr, self.out_eids,
                    self.in_indptr, self.in_eids):
            arr.setflags(write=False)
        self._label_index = None

    @classmethod
    def from_edges(cls, node_count, edges, labels=None):
        """Build from an iterable of ``(src, dst, p)`` triples."""
        edges = list(edges)
        if not edges:
            return cls(node_count, [], [], [], labels)
        s, d, p = zip(*edges)
        return cls(node_count, s, d, p, labels)

    @property
    def edge_count(self):
        return len(self.src)

    @property
    def edges(self):
        """Edge list as ``(src, dst, p)`` tuples, in edge-id order."""
        return list(zip(self.src.tolist(), self.dst.tolist(), self.prob.tolist()))

    def out_adj(self, u):
        """Out-neighbours of ``u`` as ``(dst, p)`` pairs."""
        eids = self.out_eids[self.out_indptr[u]:self.out_indptr[u + 1]]
        return list(zip(self.dst[eids].tolist(), self.prob[eids].tolist()))

    def in_adj(self, v):
        """In-neighbours of ``v`` as ``(src, p)`` pairs."""
        eids = self.in_eids[self.in_indptr[v]:self.in_indptr[v + 1]]
        return list(zip(self.src[eids].tolist(), self.prob[eids].tolist()))

    def in_degree(self):
        return np.diff(self.in_indptr)

    def out_degree(self):
        return np.diff(self.out_indptr)

    def in_weight_sums(self):
        """Total incoming probability of every node."""
        return np.bincount(self.dst, weights=self.prob, minlength=self.node_count)

    def is_lt_admissible(self):
        """True when every node's incoming probabilities sum to at most one."""
        return bool(np.all(self.in_weight_sums() <= 1.0 + LT_TOLERANCE))

    def check_lt(self):
        """Raise unless the graph satisfies the LT sum constraint."""
        sums = self.in_weight_sums()
        bad = np.flatnonzero(sums > 1.0 + LT_TOLERANCE)
        if len(bad):
            j = int(bad[0])
            raise ValidationError(
                f"LT constraint violated at node {self.labels[j]}: "
                f"incoming probability sums to {sums[j]:.12g}")

    def merge_parallel(self):
        """Graph with parallel edges merged by summing their probabilities.

        Sums are clipped at 1 per edge; the LT sum constraint is checked
        separately.
        """
        if self.edge_count == 0:
            return self
        key = self.src * self.node_count + self.dst
        uniq, inv = np.unique(key, return_inverse=True)
        if len(uniq) == self.edge_count:
            return self
        p = np.minimum(np.bincount(inv, weights=self.prob), 1.0)
        return Graph(self.node_count, uniq // self.node_count,
                     uniq % self.node_count, p, self.labels)

    def index_of(self, label):
        """Dense id of an original node label."""
        if self._label_index is None:
            self._label_index = {lab: i for i, lab in enumerate(self.labels.tolist())}
        try:
            return self._label_index[label]
        except KeyError:
            raise ValidationError(f"unknown node label {label!r}") from None

    def __repr__(self):
        return f"Graph(node_count={self.node_count}, edge_count={self.edge_count})"


def reverse(g):
    """Graph with every edge ``(u, v, p)`` replaced by ``(v, u, p)``.

    Edge ids are preserved.
    """
    return Graph(g.node_count, g.dst, g.src, g.prob, g.labels)


def _parse_token(tok, lineno):
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"node id {tok!r} is not an integer", lineno) from None


def load_edge_list(path, weighting="inverse_in_degree"):
    """Read a whitespace-separated edge list.

    Lines are ``src dst`` or ``src dst p``; lines starting with ``#`` are
    comments.  Node ids may be sparse and are relabelled densely in ascending
    order of their original value; the original ids are kept in ``labels``.

    With ``weighting="inverse_in_degree"`` every edge into ``j`` receives
    ``p = 1/|N_in(j)|`` after the whole file is read and any third column is
    ignored.  With ``weighting="explicit"`` the third column is required.

    Self-loops are dropped with a warning.
    """
    if weighting not in ("explicit", "inverse_in_degree"):
        raise ValidationError(f"unknown weighting {weighting!r}")
    explicit = weighting == "explicit"
    srcs, dsts, probs = [], [], []
    loops = 0
    with open(Path(path), "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) not in (2, 3):
                raise ParseError(f"expected 2 or 3 fields, found {len(parts)}", lineno)
            u = _parse_token(parts[0], lineno)
            v = _parse_token(parts[1], lineno)
            p = 1.0
            if explicit:
                if len(parts) < 3:
                    raise FormatError("explicit weighting requires a probability column",
                                      lineno)
                try:
                    p = float(parts[2])
                except ValueError:
                    raise ParseError(f"probability {parts[2]!r} is not a number",
                                     lineno) from None
                if not (0.0 <= p <= 1.0):
                    raise ValidationError(f"line {lineno}: probability {p} outside [0, 1]")
            elif len(parts) == 3:
                try:
                    float(parts[2])
                except ValueError:
                    raise ParseError(f"probability {parts[2]!r} is not a number",
                                     lineno) from None
            if u == v:
                loops += 1
                continue
            srcs.append(u)
            dsts.append(v)
            probs.append(p)
    if loops:
        logger.warning("dropped %d self-loop(s) from %s", loops, path)

    raw_src = np.asarray(srcs, dtype=np.int64)
    raw_dst = np.asarray(dsts, dtype=np.int64)
    labels, inv = np.unique(np.concatenate([raw_src, raw_dst]), return_inverse=True)
    m = len(raw_src)
    src, dst = inv[:m].astype(np.int64), inv[m:].astype(np.int64)
    n = len(labels)
    if explicit:
        prob = np.asarray(probs, dtype=np.float64)
    else:
        indeg = np.bincount(dst, minlength=n)
        prob = 1.0 / indeg[dst] if m else np.zeros(0)
    return Graph(n, src, dst, prob, labels)


def write_edge_list(g, path, with_prob=True):
    """Write ``g`` as an edge list using the original node labels."""
    with open(Path(path), "w", encoding="utf-8") as fh:
        for s, d, p in zip(g.labels[g.src].tolist(), g.labels[g.dst].tolist(),
                           g.prob.tolist()):
            fh.write(f"{s} {d} {p!r}\n" if with_prob else f"{s} {d}\n")
