"""Coverage, multilinear extension and element-selection algorithms.

The multilinear extension of RR-set coverage is

    F(x) = Σ_R (1 - q_R),   q_R = Π_{i∈R} (1 - x[i]),

and its partial derivative is ``Σ_{R∋i} Π_{j∈R, j≠i} (1 - x[j])``.  A
:class:`QCache` keeps, per RR set, the product of factors above ``TAU_ZERO``
and the number of factors at or below it, so the leave-one-out product stays
exact when coordinates reach one.

AMP runs ``1/ε_s`` lazy greedy search rounds over the fractional solution and
then merges the resulting bases by pairwise exchange rounding.
"""

import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import ContractError, ValidationError

TAU_ZERO = 1e-12
_BOUND_SLACK = 1e-9
_TIE_RTOL = 1e-12


# --------------------------------------------------------------------- kernels


@njit(cache=True, nogil=True)
def _factor(xi, wi, weighted):
    if weighted:
        return 1.0 - xi * wi
    return 1.0 - xi


@njit(cache=True, nogil=True)
def _build(indptr, elements, x, w, weighted, prod, zeros):
    for r in range(len(indptr) - 1):
        p = 1.0
        z = 0
        for k in range(indptr[r], indptr[r + 1]):
            e = elements[k]
            f = _factor(x[e], w[e], weighted)
            if f > TAU_ZERO:
                p *= f
            else:
                z += 1
        prod[r] = p
        zeros[r] = z


@njit(cache=True, nogil=True)
def _derivative(inv_indptr, inv_sets, prod, zeros, xi, wi, weighted, i):
    f = _factor(xi, wi, weighted)
    s = 0.0
    if f > TAU_ZERO:
        for k in range(inv_indptr[i], inv_indptr[i + 1]):
            r = inv_sets[k]
            if zeros[r] == 0:
                s += prod[r]
        s /= f
    else:
        for k in range(inv_indptr[i], inv_indptr[i + 1]):
            r = inv_sets[k]
            if zeros[r] == 1:
                s += prod[r]
    if weighted:
        s *= wi
    return s


@njit(cache=True, nogil=True)
def _all_derivatives(inv_indptr, inv_sets, prod, zeros, x, w, weighted, out):
    for i in range(len(inv_indptr) - 1):
        out[i] = _derivative(inv_indptr, inv_sets, prod, zeros, x[i], w[i], weighted, i)


@njit(cache=True, nogil=True)
def _update(inv_indptr, inv_sets, prod, zeros, fo, fn, i):
    """Swap factor ``fo`` for ``fn`` in every set containing ``i``.

    Returns the change of ``Σ_R q_R``.
    """
    dq = 0.0
    lo = inv_indptr[i]
    hi = inv_indptr[i + 1]
    if fo > TAU_ZERO and fn > TAU_ZERO:
        ratio = fn / fo
        for k in range(lo, hi):
            r = inv_sets[k]
            old = prod[r]
            prod[r] = old * ratio
            if zeros[r] == 0:
                dq += prod[r] - old
        return dq
    for k in range(lo, hi):
        r = inv_sets[k]
        before = prod[r] if zeros[r] == 0 else 0.0
        if fo > TAU_ZERO:
            prod[r] /= fo
        else:
            zeros[r] -= 1
        if fn > TAU_ZERO:
            prod[r] *= fn
        else:
            zeros[r] += 1
        after = prod[r] if zeros[r] == 0 else 0.0
        dq += after - before
    return dq


@njit(cache=True, nogil=True)
def _hit_weights(inv_indptr, inv_sets, prod, zeros, out):
    for i in range(len(inv_indptr) - 1):
        s = 0.0
        for k in range(inv_indptr[i], inv_indptr[i + 1]):
            r = inv_sets[k]
            if zeros[r] == 0:
                s += prod[r]
        out[i] = s


@njit(cache=True, nogil=True)
def _marginal(inv_indptr, inv_sets, covered, e):
    c = 0
    for k in range(inv_indptr[e], inv_indptr[e + 1]):
        if not covered[inv_sets[k]]:
            c += 1
    return c


@njit(cache=True, nogil=True)
def _cover(inv_indptr, inv_sets, covered, e):
    c = 0
    for k in range(inv_indptr[e], inv_indptr[e + 1]):
        r = inv_sets[k]
        if not covered[r]:
            covered[r] = True
            c += 1
    return c


# ---------------------------------------------------------------------- QCache


class QCache:
    """Per-RR-set residual products for a fractional solution ``x``.

    With ``weights`` the factors are ``1 - x[i]·w[i]`` (weighted objective);
    without, they are ``1 - x[i]`` and no multiply is performed.
    """

    def __init__(self, coll, x=None, weights=None):
        self.coll = coll
        n = coll.n
        x = np.zeros(n) if x is None else np.asarray(x, dtype=np.float64)
        if len(x) != n:
            raise ValidationError("x must have one entry per element")
        self.weighted = weights is not None
        if self.weighted:
            self.w = np.ascontiguousarray(weights, dtype=np.float64)
            if len(self.w) != n:
                raise ValidationError("weights must have one entry per element")
            if len(self.w) and (self.w.min() < 0.0 or self.w.max() > 1.0):
                raise ValidationError("weights must lie in [0, 1]")
        else:
            self.w = np.ones(max(n, 1))
        self.prod = np.empty(coll.theta)
        self.zeros = np.empty(coll.theta, dtype=np.int64)
        _build(coll.indptr, coll.elements, x, self.w, self.weighted, self.prod, self.zeros)
        self.q_sum = float(self.q().sum())

    def q(self):
        """Residual product ``q_R`` of every set."""
        return np.where(self.zeros == 0, self.prod, 0.0)

    def F(self):
        """Multilinear extension at the cached point, ``θ - Σ q_R``."""
        return float(self.coll.theta - self.q().sum())

    def factor(self, i, xi):
        return _factor(xi, self.w[i], self.weighted)

    def derivative(self, i, xi):
        """Partial derivative in coordinate ``i`` whose current value is ``xi``."""
        c = self.coll
        return _derivative(c.inv_indptr, c.inv_sets, self.prod, self.zeros, float(xi),
                           self.w[i], self.weighted, int(i))

    def derivatives(self, x):
        """All partial derivatives at ``x``."""
        c = self.coll
        out = np.empty(c.n)
        _all_derivatives(c.inv_indptr, c.inv_sets, self.prod, self.zeros,
                         np.asarray(x, dtype=np.float64), self.w, self.weighted, out)
        return out

    def update(self, i, old_x, new_x):
        """Move coordinate ``i`` from ``old_x`` to ``new_x``; returns the change of F."""
        c = self.coll
        wi = self.w[i]
        dq = _update(c.inv_indptr, c.inv_sets, self.prod, self.zeros,
                     _factor(old_x, wi, self.weighted), _factor(new_x, wi, self.weighted),
                     int(i))
        self.q_sum += dq
        return -dq

    def hit_weights(self):
        """``Σ_{R∋i} q_R`` for every element."""
        c = self.coll
        out = np.empty(c.n)
        _hit_weights(c.inv_indptr, c.inv_sets, self.prod, self.zeros, out)
        return out


def coverage(coll, S):
    """Number of RR sets intersecting ``S``."""
    covered = np.zeros(coll.theta, dtype=np.bool_)
    total = 0
    for e in set(int(u) for u in S):
        if not 0 <= e < coll.n:
            raise ValidationError(f"element {e} out of range")
        total += _cover(coll.inv_indptr, coll.inv_sets, covered, e)
    return total


def multilinear_F(coll, cache):
    """``Σ_R (1 - q_R)`` from the cache."""
    return cache.F()


def partial_derivative(coll, cache, x, i):
    """Partial derivative of F at ``x`` in coordinate ``i``."""
    return cache.derivative(i, x[i])


def q_update(cache, i, old_x, new_x):
    """Swap the factor of coordinate ``i`` from ``old_x`` to ``new_x``."""
    return cache.update(i, old_x, new_x)


# -------------------------------------------------------------------- results


@dataclass
class SelectionResult:
    """Outcome of an element-selection run.

    ``f_trace`` holds F at every search checkpoint ``x_0 .. x_{1/ε_s}`` for
    AMP, or the coverage after each pick for the greedy baselines.
    ``tight_bound_trace`` holds the bound ``F(x_t) + max-weight-base`` at the
    same checkpoints when requested.
    """

    algorithm: str
    chosen: list
    coverage: int
    f_trace: list = field(default_factory=list)
    tight_bound_trace: list = field(default_factory=list)
    rounding_trace: list = field(default_factory=list)
    bases: list = field(default_factory=list)
    swaps: int = 0
    epsilon: float = None
    wall_time: float = 0.0

    def to_dict(self):
        return {"algorithm": self.algorithm, "epsilon": self.epsilon,
                "chosen": list(self.chosen), "coverage": self.coverage,
                "f_trace": list(self.f_trace),
                "tight_bound_trace": list(self.tight_bound_trace),
                "swaps": self.swaps, "wall_time_ms": self.wall_time * 1e3}


# ----------------------------------------------------------------------- AMP


def _check_eps(eps):
    if not 0 < eps <= 1:
        raise ValidationError("ε_s must lie in (0, 1]")
    L = round(1.0 / eps)
    if abs(L * eps - 1.0) > 1e-9:
        raise ValidationError("1/ε_s must be an integer")
    return L


def _lazy_pick(heap, feasible, value):
    """Pop the feasible element of largest value, ties to the smaller id.

    Values within a relative ``_TIE_RTOL`` of the maximum are ties.

    ``heap`` holds ``(-upper_bound, id)``; infeasible entries are dropped.
    Returns ``(id, value)`` or ``None`` when the heap runs dry.
    """
    while heap:
        _, i = heapq.heappop(heap)
        if not feasible(i):
            continue
        v = value(i)
        if heap and (-v, i) > heap[0]:
            heapq.heappush(heap, (-v, i))
            continue
        # values equal up to rounding count as ties, so rescan the near-top
        lim = v - _TIE_RTOL * abs(v)
        best, best_v = i, v
        held = []
        while heap and -heap[0][0] >= lim:
            _, j = heapq.heappop(heap)
            if not feasible(j):
                continue
            vj = value(j)
            if vj >= lim and j < best:
                held.append((-best_v, best))
                best, best_v = j, vj
            else:
                held.append((-vj, j))
        for item in held:
            heapq.heappush(heap, item)
        return best, best_v
    return None


def _initial_heap(bounds, ids):
    b = bounds[ids] * (1.0 + _BOUND_SLACK) + 1e-300
    heap = list(zip((-b).tolist(), ids.tolist()))
    heapq.heapify(heap)
    return heap


def amp_search(coll, matroid, x, eps, cache):
    """One AMP search round over all feasible elements.

    Picks ``r`` elements, each the feasible argmax of the partial derivative,
    raising its coordinate by ``eps`` in a working copy of ``x``.  The cache
    is updated in place; ``x`` itself is not modified.  Returns the base in
    pick order and the cache.
    """
    y = np.array(x, dtype=np.float64)
    b = matroid.builder()
    heap = _initial_heap(cache.derivatives(y), np.arange(coll.n))
    deriv = cache.derivative
    r = matroid.rank
    while len(b) < r:
        got = _lazy_pick(heap, b.can_add, lambda i: deriv(i, y[i]))
        if got is None:
            raise ContractError("matroid could not be extended to a base")
        i = got[0]
        b.add(i)
        old = y[i]
        y[i] = old + eps
        cache.update(i, old, y[i])
    return list(b.members), cache


def amp_search_pm(coll, pm, x, eps, cache):
    """AMP search restricted to one partition at a time.

    Partitions are processed in ascending index, each until its capacity
    ``min(k_l, |U_l|)`` is reached.
    """
    pm = pm.partition_view
    if pm is None:
        raise ValidationError("amp_search_pm requires a partition matroid")
    y = np.array(x, dtype=np.float64)
    bounds = cache.derivatives(y)
    deriv = cache.derivative
    chosen = []
    for l in range(pm.num_partitions):
        members = pm.members(l)
        need = int(min(pm.capacities[l], len(members)))
        if need == 0:
            continue
        heap = _initial_heap(bounds, members)
        taken = set()
        for _ in range(need):
            got = _lazy_pick(heap, lambda i: i not in taken, lambda i: deriv(i, y[i]))
            if got is None:
                raise ContractError("partition exhausted before reaching its capacity")
            i = got[0]
            taken.add(i)
            chosen.append(i)
            old = y[i]
            y[i] = old + eps
            cache.update(i, old, y[i])
    return chosen, cache


def amp_round(coll, matroid, eps, cache, bases, y=None, trace=None):
    """Merge bases ``B_1 .. B_L`` into one base by pairwise exchange.

    ``y`` is the merged vector ``ε_s Σ 1_{B_l}`` consistent with ``cache``
    (computed from ``bases`` when omitted) and is updated in place.  When
    ``trace`` is a list, F is appended after every swap.  Returns the final
    base (sorted) and the number of swaps.
    """
    L = len(bases)
    if L == 0:
        raise ValidationError("at least one base is required")
    if y is None:
        y = np.zeros(coll.n)
        for B in bases:
            for u in B:
                y[u] += eps
    pm = matroid.partition_view
    deriv = cache.derivative
    F = cache.F() if trace is not None else 0.0

    def move(u, delta):
        nonlocal F
        old = y[u]
        y[u] = old + delta
        F += cache.update(u, old, y[u])

    swaps = 0
    cur = set(int(u) for u in bases[0])
    for t in range(1, L):
        nxt = set(int(u) for u in bases[t])
        pending = sorted(cur - nxt)
        if pm is not None:
            cands = {}
            for u in sorted(nxt - cur):
                cands.setdefault(int(pm.partition_of[u]), []).append(u)
            for lst in cands.values():
                lst.reverse()
        for ui in pending:
            if pm is not None:
                lst = cands.get(int(pm.partition_of[ui]))
                if not lst:
                    raise ContractError("no exchange partner; inputs are not bases")
                uj = lst.pop()
            else:
                uj = matroid.find_exchange(cur, nxt, ui)
            if deriv(ui, y[ui]) >= deriv(uj, y[uj]):
                nxt.discard(uj)
                nxt.add(ui)
                move(ui, eps)
                move(uj, -eps)
            else:
                cur.discard(ui)
                cur.add(uj)
                move(uj, t * eps)
                move(ui, -t * eps)
            swaps += 1
            if trace is not None:
                trace.append(F)
        cur = nxt
    return sorted(cur), swaps


def tightened_upper_bound(coll, matroid, cache, F_current):
    """``F(x) + max_{S∈I} Σ_{i∈S} Σ_{R∋i} q_R`` for the cached point."""
    w = cache.hit_weights()
    base = matroid.max_weight_base(w)
    return float(F_current + w[base].sum())


def amp_guarantee(eps):
    """Approximation factor ``1 - (1+ε_s)^{-1/ε_s}`` of AMP."""
    return 1.0 - (1.0 + eps) ** (-1.0 / eps)


def amp(coll, matroid, eps, *, use_pm=None, track_bound=False, weights=None):
    """AMP element selection.

    Parameters
    ----------
    coll : RRCollection
    matroid : Matroid
    eps : float
        Step ``ε_s``; ``1/ε_s`` must be an integer.
    use_pm : bool, optional
        Use the partition-by-partition search.  Defaults to whether the
        matroid exposes a partition view.
    track_bound : bool
        Record the tightened upper bound at every search checkpoint.
    weights : array-like, optional
        Per-element adoption probabilities for the weighted objective.
    """
    start = time.perf_counter()
    L = _check_eps(eps)
    if use_pm is None:
        use_pm = matroid.partition_view is not None
    cache = QCache(coll, weights=weights)
    x = np.zeros(coll.n)
    search = amp_search_pm if use_pm else amp_search
    f_trace = [0.0]
    bound_trace = []
    if track_bound:
        bound_trace.append(tightened_upper_bound(coll, matroid, cache, 0.0))
    bases = []
    for _ in range(L):
        B, cache = search(coll, matroid, x, eps, cache)
        for u in B:
            x[u] = x[u] + eps
        bases.append(B)
        F = cache.F()
        f_trace.append(F)
        if track_bound:
            bound_trace.append(tightened_upper_bound(coll, matroid, cache, F))
    rounding = []
    chosen, swaps = amp_round(coll, matroid, eps, cache, bases, y=x, trace=rounding)
    name = "amp-pm" if use_pm else "amp"
    if weights is not None:
        name = "amp-weighted"
    return SelectionResult(name, chosen, coverage(coll, chosen), f_trace, bound_trace,
                           rounding, bases, swaps, eps, time.perf_counter() - start)


# ------------------------------------------------------------------ baselines


def _greedy_fill(coll, matroid, b, covered, candidates, limit, trace):
    inv_indptr, inv_sets = coll.inv_indptr, coll.inv_sets
    heap = _initial_heap(coll.degree().astype(np.float64), np.asarray(candidates))
    total = trace[-1] if trace else 0
    for _ in range(limit):
        got = _lazy_pick(heap, b.can_add,
                         lambda i: float(_marginal(inv_indptr, inv_sets, covered, i)))
        if got is None:
            break
        i = got[0]
        b.add(i)
        total += _cover(inv_indptr, inv_sets, covered, i)
        trace.append(total)


def greedy(coll, matroid):
    """Lazy greedy on marginal coverage subject to the matroid; ties to smaller id."""
    start = time.perf_counter()
    b = matroid.builder()
    covered = np.zeros(coll.theta, dtype=np.bool_)
    trace = []
    _greedy_fill(coll, matroid, b, covered, np.arange(coll.n), matroid.rank, trace)
    chosen = sorted(b.members)
    return SelectionResult("greedy", chosen, coverage(coll, chosen), trace,
                           wall_time=time.perf_counter() - start)


def local_greedy(coll, pm):
    """Greedy within partition 1 until full, then partition 2, and so on."""
    start = time.perf_counter()
    pm = pm.partition_view
    if pm is None:
        raise ValidationError("local_greedy requires a partition matroid")
    b = pm.builder()
    covered = np.zeros(coll.theta, dtype=np.bool_)
    trace = []
    for l in range(pm.num_partitions):
        members = pm.members(l)
        need = int(min(pm.capacities[l], len(members)))
        if need:
            _greedy_fill(coll, pm, b, covered, members, need, trace)
    chosen = sorted(b.members)
    return SelectionResult("local", chosen, coverage(coll, chosen), trace,
                           wall_time=time.perf_counter() - start)


def threshold_greedy(coll, matroid, xi=0.05):
    """Decreasing-threshold greedy.

    The threshold starts at the largest single-element coverage ``d_max``.
    Each pass scans feasible elements in id order and adds any whose marginal
    coverage is at least the threshold; the threshold is then multiplied by
    ``1 - xi``.  Stops at ``r`` elements or when the threshold drops below
    ``xi·d_max/r``, so fewer than ``r`` elements may be returned.
    """
    if not 0 < xi < 1:
        raise ValidationError("xi must lie in (0, 1)")
    start = time.perf_counter()
    r = matroid.rank
    b = matroid.builder()
    covered = np.zeros(coll.theta, dtype=np.bool_)
    inv_indptr, inv_sets = coll.inv_indptr, coll.inv_sets
    bound = coll.degree().astype(np.float64)
    d_max = float(bound.max()) if coll.n else 0.0
    trace = []
    total = 0
    if d_max > 0 and r > 0:
        thr = d_max
        floor = xi * d_max / r
        while len(b) < r and thr >= floor:
            for i in np.flatnonzero(bound >= thr).tolist():
                if not b.can_add(i):
                    continue
                m = _marginal(inv_indptr, inv_sets, covered, i)
                bound[i] = m
                if m >= thr:
                    b.add(i)
                    total += _cover(inv_indptr, inv_sets, covered, i)
                    trace.append(total)
                    if len(b) == r:
                        break
            thr *= 1.0 - xi
    chosen = sorted(b.members)
    return SelectionResult("threshold", chosen, coverage(coll, chosen), trace,
                           wall_time=time.perf_counter() - start)
