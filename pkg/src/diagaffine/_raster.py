"""Cell-level Hutchinson closure on a packed bitmap (numba kernel).

Cells are half-open boxes ``Π_j [k_j h_j, (k_j+1) h_j)`` inside the bounding
box. Starting from the cells holding the fixed points of the maps, a cell
``C'`` is added whenever it meets the closed image ``φ_i(cl C)`` of a cell
``C`` already present. The result is the set of cells reachable through the
system acting on cells; it contains every cell whose interior meets the
attractor.
"""
from __future__ import annotations

import math

import numba as nb
import numpy as np


def image_ranges(slopes, offsets, lows, widths, h):
    """Per map and coordinate: for each cell index, the range of image cells.

    Returns ``lo, hi`` lists indexed ``[i][j]`` of int64 arrays of length
    ``widths[j]``, clipped to the grid; empty ranges have ``lo > hi``.
    """
    nmaps, d = slopes.shape
    lo_t, hi_t = [], []
    for i in range(nmaps):
        lo_i, hi_i = [], []
        for j in range(d):
            k = np.arange(widths[j], dtype=np.int64) + lows[j]
            a = k * h[j]
            b = a + h[j]
            x0 = slopes[i, j] * a + offsets[i, j]
            x1 = slopes[i, j] * b + offsets[i, j]
            lo = np.floor(np.minimum(x0, x1) / h[j]).astype(np.int64) - lows[j]
            hi = np.floor(np.maximum(x0, x1) / h[j]).astype(np.int64) - lows[j]
            lo_i.append(np.clip(lo, 0, widths[j] - 1))
            hi_i.append(np.clip(hi, -1, widths[j] - 1))
        lo_t.append(lo_i)
        hi_t.append(hi_i)
    return lo_t, hi_t


@nb.njit(cache=True, boundscheck=False)
def _closure(lo_tab, hi_tab, strides, total, seeds):
    # lo_tab/hi_tab: (nmaps, d, maxwidth) int64
    nmaps = lo_tab.shape[0]
    d = lo_tab.shape[1]
    nwords = (total + 63) // 64
    visited = np.zeros(nwords, np.uint64)
    pending = np.zeros(nwords, np.uint64)
    count = 0
    for q in range(seeds.shape[0]):
        c = seeds[q]
        wq = c >> 6
        bit = np.uint64(1) << np.uint64(c & 63)
        if visited[wq] & bit == 0:
            visited[wq] |= bit
            pending[wq] |= bit
            count += 1
    k = np.empty(d, np.int64)
    lo = np.empty(d, np.int64)
    hi = np.empty(d, np.int64)
    cur = np.empty(d, np.int64)
    changed = True
    while changed:
        changed = False
        for wi in range(nwords):
            while pending[wi] != 0:
                word = pending[wi]
                pending[wi] = np.uint64(0)
                for b in range(64):
                    if (word >> np.uint64(b)) & np.uint64(1) == 0:
                        continue
                    c = wi * 64 + b
                    rem = c
                    for j in range(d - 1):
                        k[j] = rem // strides[j]
                        rem -= k[j] * strides[j]
                    k[d - 1] = rem
                    for i in range(nmaps):
                        empty = False
                        for j in range(d):
                            lo[j] = lo_tab[i, j, k[j]]
                            hi[j] = hi_tab[i, j, k[j]]
                            if lo[j] > hi[j]:
                                empty = True
                        if empty:
                            continue
                        for j in range(d):
                            cur[j] = lo[j]
                        while True:
                            idx = 0
                            for j in range(d):
                                idx += cur[j] * strides[j]
                            tw = idx >> 6
                            tb = np.uint64(1) << np.uint64(idx & 63)
                            if visited[tw] & tb == 0:
                                visited[tw] |= tb
                                pending[tw] |= tb
                                count += 1
                                changed = True
                            j = d - 1
                            while j >= 0:
                                cur[j] += 1
                                if cur[j] <= hi[j]:
                                    break
                                cur[j] = lo[j]
                                j -= 1
                            if j < 0:
                                break
    return count


@nb.njit(cache=True, boundscheck=False)
def _closure_2d(lo0, hi0, lo1, hi1, w1, total, seeds):
    nmaps = lo0.shape[0]
    nwords = (total + 63) // 64
    visited = np.zeros(nwords, np.uint64)
    pending = np.zeros(nwords, np.uint64)
    count = 0
    for q in range(seeds.shape[0]):
        c = seeds[q]
        bit = np.uint64(1) << np.uint64(c & 63)
        if visited[c >> 6] & bit == 0:
            visited[c >> 6] |= bit
            pending[c >> 6] |= bit
            count += 1
    changed = True
    while changed:
        changed = False
        for wi in range(nwords):
            while pending[wi] != 0:
                word = pending[wi]
                pending[wi] = np.uint64(0)
                for b in range(64):
                    if (word >> np.uint64(b)) & np.uint64(1) == 0:
                        continue
                    c = wi * 64 + b
                    k0 = c // w1
                    k1 = c - k0 * w1
                    for i in range(nmaps):
                        a1 = lo1[i, k1]
                        b1 = hi1[i, k1]
                        for x in range(lo0[i, k0], hi0[i, k0] + 1):
                            base = x * w1
                            for y in range(a1, b1 + 1):
                                idx = base + y
                                tw = idx >> 6
                                tb = np.uint64(1) << np.uint64(idx & 63)
                                if visited[tw] & tb == 0:
                                    visited[tw] |= tb
                                    pending[tw] |= tb
                                    count += 1
                                    changed = True
    return count


def raster_closure_count(slopes, offsets, half_widths, levels, max_cells):
    """Number of level-``levels`` cells reachable from the fixed-point cells.

    ``levels`` is the per-coordinate dyadic level. Raises :class:`ValueError`
    when the grid exceeds ``max_cells`` (two bits of memory per cell).
    """
    slopes = np.asarray(slopes, dtype=float)
    offsets = np.asarray(offsets, dtype=float)
    nmaps, d = slopes.shape
    h = np.array([math.ldexp(1.0, -int(m)) for m in levels])
    lows = np.array([math.floor(-float(M) / hj) for M, hj in zip(half_widths, h)], dtype=np.int64)
    highs = np.array([math.floor(float(M) / hj) for M, hj in zip(half_widths, h)], dtype=np.int64)
    widths = highs - lows + 1
    total = int(np.prod([int(w) for w in widths]))
    if total > max_cells:
        raise ValueError(f"raster of {total} cells exceeds limit {max_cells}")
    strides = np.empty(d, dtype=np.int64)
    s = 1
    for j in range(d - 1, -1, -1):
        strides[j] = s
        s *= int(widths[j])
    lo_l, hi_l = image_ranges(slopes, offsets, lows, widths, h)
    maxw = int(widths.max())
    lo_tab = np.zeros((nmaps, d, maxw), dtype=np.int64)
    hi_tab = np.full((nmaps, d, maxw), -1, dtype=np.int64)
    for i in range(nmaps):
        for j in range(d):
            lo_tab[i, j, : widths[j]] = lo_l[i][j]
            hi_tab[i, j, : widths[j]] = hi_l[i][j]
    seeds = []
    for i in range(nmaps):
        fp = offsets[i] / (1.0 - slopes[i])
        ks = [min(max(math.floor(fp[j] / h[j]) - lows[j], 0), widths[j] - 1) for j in range(d)]
        seeds.append(sum(int(ks[j]) * int(strides[j]) for j in range(d)))
    seeds = np.array(seeds, dtype=np.int64)
    if d == 2:
        return int(_closure_2d(lo_tab[:, 0], hi_tab[:, 0], lo_tab[:, 1], hi_tab[:, 1], int(widths[1]), total, seeds))
    return int(_closure(lo_tab, hi_tab, strides, total, seeds))
