"""Counter-based 64-bit random streams.

Every random draw is a pure function of ``(seed, stream_index, counter)``, so a
single RR set or Monte Carlo run can be reproduced in isolation and work can be
split across threads without changing results.  The mixer is splitmix64.
"""

import numpy as np
from numba import njit

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0
SALT_THRESHOLD = np.uint64(0xD1B54A32D192ED03)
SALT_ROUND = np.uint64(0xABC98388FB8FAC03)


@njit(cache=True, nogil=True)
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True, nogil=True)
def stream_key(seed, index):
    """Key of stream ``index`` under ``seed`` (both uint64)."""
    return mix64(mix64(seed + GOLDEN) ^ mix64(index * _M2 + GOLDEN))


@njit(cache=True, nogil=True)
def sub_key(key, salt, j):
    """Derived key for sub-stream ``j`` of ``key``."""
    return mix64(key ^ mix64(salt + np.uint64(j) * GOLDEN))


@njit(cache=True, nogil=True)
def to_unit(z):
    return np.float64(z >> _S11) * _INV53


@njit(cache=True, nogil=True)
def uniform_at(key, counter):
    """Random-access uniform in [0, 1) at position ``counter`` of a stream."""
    return to_unit(mix64(key + (np.uint64(counter) + np.uint64(1)) * GOLDEN))


@njit(cache=True, nogil=True)
def next_uniform(state):
    """Sequential uniform in [0, 1); ``state`` is a length-1 uint64 array."""
    state[0] += GOLDEN
    return to_unit(mix64(state[0]))


@njit(cache=True, nogil=True)
def next_below(state, n):
    """Uniform integer in [0, n)."""
    v = np.int64(next_uniform(state) * n)
    if v >= n:
        v = n - 1
    return v


def as_u64(value):
    """Reduce a Python integer to a numpy uint64 (mod 2**64)."""
    return np.uint64(int(value) & 0xFFFFFFFFFFFFFFFF)
