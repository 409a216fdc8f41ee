"""Dynamic time warping distance between vibration signatures.

Standard dynamic program over the symmetric step set {(1,0), (0,1), (1,1)}
with |a[i] - b[j]| as the local cost, so sequences of different lengths and
locally stretched shapes compare sensibly. The distance-only kernel keeps
two rows over the shorter sequence, O(min(len_a, len_b)) space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import EmptyInput


@dataclass(frozen=True)
class WarpPath:
    """Optimal alignment: index pairs from (0,0) to (n-1,m-1) and its cost."""

    pairs: tuple
    cost: float


@njit(cache=True)
def _dtw_cost(a, b, band, squared):
    n = len(a)
    m = len(b)
    w = band
    if w >= 0 and w < n - m:
        w = n - m  # keep the end corner reachable
    prev = np.empty(m)
    curr = np.empty(m)
    for i in range(n):
        lo = 0
        hi = m
        if w >= 0:
            lo = max(0, i - w)
            hi = min(m, i + w + 1)
        for j in range(m):
            curr[j] = np.inf
        for j in range(lo, hi):
            d = a[i] - b[j]
            c = d * d if squared else abs(d)
            if i == 0 and j == 0:
                curr[j] = c
            else:
                best = np.inf
                if i > 0 and prev[j] < best:
                    best = prev[j]
                if i > 0 and j > 0 and prev[j - 1] < best:
                    best = prev[j - 1]
                if j > 0 and curr[j - 1] < best:
                    best = curr[j - 1]
                curr[j] = c + best
        prev, curr = curr, prev
    return prev[m - 1]


@njit(cache=True)
def _dtw_matrix(a, b, band, squared):
    n = len(a)
    m = len(b)
    w = band
    if w >= 0 and w < abs(n - m):
        w = abs(n - m)
    D = np.full((n, m), np.inf)
    for i in range(n):
        lo = 0
        hi = m
        if w >= 0:
            lo = max(0, i - w)
            hi = min(m, i + w + 1)
        for j in range(lo, hi):
            d = a[i] - b[j]
            c = d * d if squared else abs(d)
            if i == 0 and j == 0:
                D[i, j] = c
            else:
                best = np.inf
                if i > 0 and D[i - 1, j] < best:
                    best = D[i - 1, j]
                if i > 0 and j > 0 and D[i - 1, j - 1] < best:
                    best = D[i - 1, j - 1]
                if j > 0 and D[i, j - 1] < best:
                    best = D[i, j - 1]
                D[i, j] = c + best
    return D


def _as_float_array(x, name):
    arr = np.ascontiguousarray(getattr(x, "values", x), dtype=np.float64)
    if arr.size == 0:
        raise EmptyInput(f"{name} sequence is empty")
    return arr


def dtw_distance(a, b, squared: bool = False, band: int | None = None) -> float:
    """Minimum alignment cost between two sequences.

    Args:
        a, b: sample sequences (or signatures; their values are used).
        squared: use (a-b)**2 as the local cost instead of |a-b|.
        band: optional Sakoe-Chiba window half-width in samples; widened
            automatically to |len(a)-len(b)| so the corners stay reachable.
    """
    a = _as_float_array(a, "first")
    b = _as_float_array(b, "second")
    if len(b) > len(a):
        a, b = b, a  # two-row storage runs over the shorter sequence
    return float(_dtw_cost(a, b, -1 if band is None else int(band), squared))


def dtw_path(a, b, squared: bool = False, band: int | None = None) -> WarpPath:
    """Optimal warp path with backtracking (diagonal preferred on ties)."""
    a = _as_float_array(a, "first")
    b = _as_float_array(b, "second")
    D = _dtw_matrix(a, b, -1 if band is None else int(band), squared)
    i = len(a) - 1
    j = len(b) - 1
    pairs = [(i, j)]
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            diag = D[i - 1, j - 1]
            up = D[i - 1, j]
            left = D[i, j - 1]
            if diag <= up and diag <= left:
                i -= 1
                j -= 1
            elif up <= left:
                i -= 1
            else:
                j -= 1
        pairs.append((i, j))
    pairs.reverse()
    return WarpPath(pairs=tuple(pairs), cost=float(D[len(a) - 1, len(b) - 1]))


def distance_matrix(sigs, squared: bool = False, band: int | None = None) -> np.ndarray:
    """Symmetric zero-diagonal matrix of pairwise distances, input order kept."""
    if len(sigs) == 0:
        raise EmptyInput("no signatures")
    arrays = [_as_float_array(s, f"signature {i}") for i, s in enumerate(sigs)]
    n = len(arrays)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d = dtw_distance(arrays[i], arrays[j], squared=squared, band=band)
            out[i, j] = d
            out[j, i] = d
    return out
