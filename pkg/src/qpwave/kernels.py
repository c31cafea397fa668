"""Shared array kernels: index packing, grouped reduction, and phi1.

All reductions here are deterministic: rows are ordered by a stable lexsort
before ``reduceat``, so results do not depend on input order or worker count.
"""

from __future__ import annotations

import numpy as np


def pack_rows(idx: np.ndarray, bits: int | None = None) -> np.ndarray:
    """Pack integer rows (M, r) into single int64 keys.

    With the default per-call width the keys are only comparable within one
    call; pass an explicit ``bits`` (covering all coordinates involved) to
    compare keys across arrays.  Falls back to a lexicographic rank when the
    coordinates are too large to pack.
    """
    idx = np.asarray(idx, dtype=np.int64)
    if idx.ndim == 1:
        idx = idx[:, None]
    m, r = idx.shape
    if m == 0:
        return np.zeros(0, dtype=np.int64)
    explicit = bits is not None
    span = int(np.abs(idx).max()) if m else 0
    if bits is None:
        bits = max(span.bit_length() + 2, 4)
    elif span.bit_length() + 2 > bits:
        raise ValueError("coordinates exceed the requested packing width")
    if bits * r <= 62:
        base = np.int64(1) << bits
        off = np.int64(1) << (bits - 1)
        out = np.zeros(m, dtype=np.int64)
        for j in range(r):
            out = out * base + (idx[:, j] + off)
        return out
    if explicit:
        raise ValueError("requested packing width does not fit in int64")
    # rank fallback: unique rows -> dense ids
    _, inv = np.unique(idx, axis=0, return_inverse=True)
    return inv.astype(np.int64)


def group_boundaries(sorted_keys: np.ndarray) -> np.ndarray:
    """Start offsets of equal-key runs in an already sorted key array."""
    if len(sorted_keys) == 0:
        return np.zeros(0, dtype=np.intp)
    return np.flatnonzero(np.r_[True, sorted_keys[1:] != sorted_keys[:-1]])


def group_sum(idx: np.ndarray, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sum ``values`` over equal rows of ``idx``; returns (unique rows, sums)."""
    idx = np.asarray(idx, dtype=np.int64)
    if idx.ndim == 1:
        idx = idx[:, None]
    if len(idx) == 0:
        return idx, np.asarray(values)
    keys = pack_rows(idx)
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    idx = idx[order]
    values = np.asarray(values)[order]
    cuts = group_boundaries(keys)
    return idx[cuts], np.add.reduceat(values, cuts)


def phi1(z: np.ndarray | complex) -> np.ndarray | complex:
    """(e^z - 1)/z, continuous through z = 0.

    Near zero the direct quotient cancels catastrophically; a 4-term Taylor
    polynomial takes over below |z| = 1e-4 (error there ~ |z|^4/120 < 1e-18).
    """
    scalar = np.isscalar(z)
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-4
    zs = np.where(small, 1.0, z)
    out = np.where(small, 1 + z / 2 + z * z / 6 + z * z * z / 24, np.expm1(zs) / zs)
    return complex(out[()]) if scalar else out
