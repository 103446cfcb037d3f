"""Matroid oracles with incremental independence and exchange queries.

Sets of elements are passed as any iterable of ints.  Hot loops use a
:meth:`Matroid.builder`, an incremental independent set that answers
``can_add`` in constant time for partition matroids.
"""

from abc import ABC, abstractmethod

import numpy as np

from .errors import ContractError, ValidationError


class Matroid(ABC):
    """Abstract matroid over the ground set ``{0, ..., n-1}``."""

    n: int

    @property
    @abstractmethod
    def rank(self):
        """Size of every base."""

    @abstractmethod
    def is_independent(self, S):
        """True when ``S`` is independent."""

    @abstractmethod
    def builder(self):
        """Fresh incremental independent set starting at the empty set."""

    @property
    def partition_view(self):
        """The matroid as a :class:`PartitionMatroid`, or ``None``."""
        return None

    def _check(self, u):
        if not 0 <= u < self.n:
            raise ValidationError(f"element {u} out of range [0, {self.n})")

    def can_add(self, B, u):
        """True iff ``B ∪ {u}`` is independent, for independent ``B``."""
        self._check(u)
        return self.is_independent(set(B) | {u})

    def is_base(self, B):
        B = set(B)
        return len(B) == self.rank and self.is_independent(B)

    def find_exchange(self, B1, B2, u_i):
        """Element ``u_j ∈ B2 \\ B1`` such that both swaps yield bases.

        Candidates are scanned in ascending id order with two independence
        checks each.
        """
        B1, B2 = set(B1), set(B2)
        if u_i not in B1 or u_i in B2:
            raise ContractError("u_i must lie in B1 \\ B2")
        base1 = B1 - {u_i}
        for u_j in sorted(B2 - B1):
            if (self.is_independent(base1 | {u_j})
                    and self.is_independent((B2 - {u_j}) | {u_i})):
                return u_j
        raise ContractError("no exchange partner; B1 or B2 is not a base")

    def max_weight_base(self, weights):
        """Greedy maximum-weight base; ties go to the smaller id.

        Returns the base as a sorted list.
        """
        w = np.asarray(weights, dtype=np.float64)
        if len(w) != self.n:
            raise ValidationError("weights must have one entry per element")
        order = np.lexsort((np.arange(self.n), -w))
        b = self.builder()
        target = self.rank
        for u in order.tolist():
            if b.can_add(u):
                b.add(u)
                if len(b) == target:
                    break
        return sorted(b.members)


class _SetBuilder:
    """Incremental independent set backed by an independence predicate."""

    def __init__(self, matroid):
        self._m = matroid
        self.members = []
        self._set = set()

    def __len__(self):
        return len(self.members)

    def __contains__(self, u):
        return u in self._set

    def can_add(self, u):
        return u not in self._set and self._m.is_independent(self._set | {u})

    def add(self, u):
        self.members.append(u)
        self._set.add(u)


class _PartitionBuilder:
    """Incremental independent set of a partition matroid."""

    def __init__(self, matroid):
        self._part = matroid.partition_of
        self._room = matroid.capacities.copy()
        self._in = np.zeros(matroid.n, dtype=np.bool_)
        self.members = []

    def __len__(self):
        return len(self.members)

    def __contains__(self, u):
        return bool(self._in[u])

    def can_add(self, u):
        return not self._in[u] and self._room[self._part[u]] > 0

    def add(self, u):
        self._in[u] = True
        self._room[self._part[u]] -= 1
        self.members.append(u)

    def room(self, l):
        return int(self._room[l])


class PartitionMatroid(Matroid):
    """Partition matroid: at most ``capacities[l]`` elements from part ``l``.

    Parameters
    ----------
    partition_of : array-like of int
        Part index of every element.
    capacities : array-like of int
        Capacity of every part.  Zero is allowed and forbids the part.
    """

    def __init__(self, partition_of, capacities):
        part = np.ascontiguousarray(partition_of, dtype=np.int64).reshape(-1)
        caps = np.ascontiguousarray(capacities, dtype=np.int64).reshape(-1)
        if len(caps) == 0:
            raise ValidationError("at least one partition is required")
        if caps.min() < 0:
            raise ValidationError("capacities must be non-negative")
        if len(part) and (part.min() < 0 or part.max() >= len(caps)):
            raise ValidationError("partition index out of range")
        self.n = len(part)
        self.partition_of = part
        self.capacities = caps
        self.sizes = np.bincount(part, minlength=len(caps))
        self._rank = int(np.minimum(caps, self.sizes).sum())
        self._members = None

    @property
    def rank(self):
        return self._rank

    @property
    def num_partitions(self):
        return len(self.capacities)

    @property
    def partition_view(self):
        return self

    def members(self, l):
        """Elements of part ``l`` in ascending order."""
        if self._members is None:
            order = np.argsort(self.partition_of, kind="stable")
            bounds = np.zeros(self.num_partitions + 1, dtype=np.int64)
            np.cumsum(self.sizes, out=bounds[1:])
            self._members = [order[bounds[i]:bounds[i + 1]]
                             for i in range(self.num_partitions)]
        return self._members[l]

    def is_independent(self, S):
        S = np.unique(np.asarray(list(S), dtype=np.int64))
        if len(S) == 0:
            return True
        if S[0] < 0 or S[-1] >= self.n:
            return False
        counts = np.bincount(self.partition_of[S], minlength=self.num_partitions)
        return bool(np.all(counts <= self.capacities))

    def can_add(self, B, u):
        self._check(u)
        l = self.partition_of[u]
        used = sum(1 for b in B if self.partition_of[b] == l and b != u)
        return used < self.capacities[l] and u not in set(B)

    def find_exchange(self, B1, B2, u_i):
        B1, B2 = set(B1), set(B2)
        if u_i not in B1 or u_i in B2:
            raise ContractError("u_i must lie in B1 \\ B2")
        l = self.partition_of[u_i]
        cands = [u for u in B2 - B1 if self.partition_of[u] == l]
        if not cands:
            raise ContractError("no exchange partner; B1 or B2 is not a base")
        return min(cands)

    def builder(self):
        return _PartitionBuilder(self)


class UniformMatroid(PartitionMatroid):
    """All sets of size at most ``k``."""

    def __init__(self, n, k):
        super().__init__(np.zeros(int(n), dtype=np.int64), [int(k)])
        self.k = int(k)


class GeneralMatroid(Matroid):
    """Matroid given by a caller-supplied independence predicate.

    ``independent`` receives a ``frozenset`` of element ids.  The rank is
    computed once by greedy augmentation from the empty set.
    """

    def __init__(self, n, independent):
        self.n = int(n)
        self._pred = independent
        if not independent(frozenset()):
            raise ValidationError("the empty set must be independent")
        b = self.builder()
        for u in range(self.n):
            if b.can_add(u):
                b.add(u)
        self._rank = len(b)

    @property
    def rank(self):
        return self._rank

    def is_independent(self, S):
        S = frozenset(int(u) for u in S)
        if any(not 0 <= u < self.n for u in S):
            return False
        return bool(self._pred(S))

    def builder(self):
        return _SetBuilder(self)


def graphic_matroid(n_vertices, edges):
    """Graphic matroid on ``edges``: independent sets are forests."""
    edges = [tuple(e) for e in edges]

    def acyclic(S):
        parent = list(range(n_vertices))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for i in S:
            a, b = find(edges[i][0]), find(edges[i][1])
            if a == b:
                return False
            parent[a] = b
        return True

    return GeneralMatroid(len(edges), acyclic)
