"""Weighted objective with per-element adoption probabilities.

Each chosen element ``i`` takes effect independently with probability
``w_i``.  On RR sets the objective becomes

    Λ^W(S) = Σ_R (1 - Π_{i∈S∩R} (1 - w_i)),

whose multilinear extension uses the residuals ``q'_R = Π_{i∈R}(1 - x[i] w_i)``.
The machinery is shared with :mod:`imgm.selection`; passing ``w`` switches
every factor to ``1 - x[i] w_i`` and scales derivatives by ``w_i``.
"""

from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError
from .selection import QCache, amp


class WQCache(QCache):
    """Residual products ``q'_R`` for a weight vector ``w``."""

    def __init__(self, coll, w, x=None):
        super().__init__(coll, x=x, weights=np.asarray(w, dtype=np.float64))


def weighted_derivative(coll, wcache, x, w, i):
    """``w_i Σ_{R∋i} Π_{j∈R, j≠i} (1 - x[j] w_j)``."""
    if not wcache.weighted or wcache.w[i] != w[i]:
        raise ValidationError("cache was built for different weights")
    return wcache.derivative(i, x[i])


def weighted_q_update(wcache, i, old_x, new_x, w_i=None):
    """Swap the factor ``1 - w_i x[i]`` from ``old_x`` to ``new_x``."""
    if w_i is not None and wcache.w[i] != w_i:
        raise ValidationError("w_i does not match the cache")
    return wcache.update(i, old_x, new_x)


def weighted_coverage(coll, S, w):
    """``Λ^W(S)`` for an integral set ``S``."""
    w = np.asarray(w, dtype=np.float64)
    x = np.zeros(coll.n)
    x[list(S)] = 1.0
    return WQCache(coll, w, x).F()


def amp_weighted(coll, matroid, eps, w, **kw):
    """AMP on the weighted multilinear extension."""
    res = amp(coll, matroid, eps, weights=np.asarray(w, dtype=np.float64), **kw)
    return res


def load_weights(path, n):
    """Read ``element_id w`` lines; unlisted elements default to 1.0."""
    w = np.ones(n)
    with open(Path(path), "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 2:
                raise ParseError("expected 'element_id w'", lineno)
            try:
                i, v = int(parts[0]), float(parts[1])
            except ValueError:
                raise ParseError("malformed weight entry", lineno) from None
            if not 0 <= i < n:
                raise ValidationError(f"line {lineno}: element {i} out of range")
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"line {lineno}: weight {v} outside [0, 1]")
            w[i] = v
    return w
