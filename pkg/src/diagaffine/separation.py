"""The ρ distance between affine maps of the line, exact-overlap search and
finite-level separation diagnostics.

Words are tuples of 0-based map indices; composition is ``φ_u = φ_{u_0} ∘ ...``.
Floating-point comparisons use the declared threshold :data:`FLOAT_OVERLAP_TOL`;
systems with rational data are compared exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .ifs_core import DEFAULT_WORD_BUDGET, AffineMap1, BudgetExceeded, DiagonalIFS

FLOAT_OVERLAP_TOL = 1e-12
ROOT_TOL = 1e-10
MAX_PM_DEGREE = 30
BRUTE_FORCE_DEGREE = 16


def rho(a: AffineMap1, b: AffineMap1) -> float:
    """``∞`` if the slopes differ, otherwise ``|b_1 - b_2|``."""
    if a.slope != b.slope:
        return math.inf
    return abs(a.offset - b.offset)


def _require_line(ifs: DiagonalIFS):
    if ifs.d != 1:
        raise ValueError("a 1-dimensional system is required")


def _decode(index: int, length: int, base: int) -> tuple[int, ...]:
    letters = []
    for _ in range(length):
        index, r = divmod(index, base)
        letters.append(r)
    return tuple(reversed(letters))


def _level_maps(ifs: DiagonalIFS, n: int):
    """Slopes and offsets of ``φ_u`` for all ``u ∈ Λ^n`` in lexicographic order."""
    r = ifs.slopes[:, 0]
    a = ifs.offsets[:, 0]
    s, b = r.copy(), a.copy()
    for _ in range(n - 1):
        # φ_u ∘ φ_i appends the letter i
        b = (b[:, None] + s[:, None] * a[None, :]).ravel()
        s = (s[:, None] * r[None, :]).ravel()
    return s, b


def _slope_classes(s: np.ndarray, exact: bool) -> np.ndarray:
    """Label equal slopes (exactly, or within relative tolerance for floats)."""
    if exact:
        labels: dict = {}
        return np.array([labels.setdefault(v, len(labels)) for v in s], dtype=np.int64)
    order = np.argsort(s, kind="stable")
    ss = s[order]
    gaps = np.abs(np.diff(ss)) > FLOAT_OVERLAP_TOL * np.maximum(np.abs(ss[1:]), np.abs(ss[:-1]))
    lab_sorted = np.concatenate([[0], np.cumsum(gaps)])
    out = np.empty_like(lab_sorted)
    out[order] = lab_sorted
    return out


def _close_pairs(cls: np.ndarray, b: np.ndarray, exact: bool):
    """Pairs (i, j), i < j, in the same slope class with equal offsets."""
    order = np.lexsort((np.arange(len(b)), b.astype(float), cls))
    pairs = []
    for x, y in zip(order[:-1], order[1:]):
        if cls[x] != cls[y]:
            continue
        same = b[x] == b[y] if exact else abs(b[x] - b[y]) <= FLOAT_OVERLAP_TOL
        if same:
            pairs.append((min(x, y), max(x, y)))
    return pairs


def exact_overlap_search(
    ifs1d: DiagonalIFS, max_len: int, budget: int = DEFAULT_WORD_BUDGET
) -> tuple[tuple, tuple, int] | None:
    """Shortest pair of distinct words with ``ψ_{u1} = ψ_{u2}``, or ``None``.

    Words of all lengths ``1..max_len`` are compared. The returned length is
    that of the longer word; among witnesses of that length the one whose
    later word (in length-then-lexicographic order) comes first is returned.
    """
    _require_line(ifs1d)
    if max_len < 1:
        raise ValueError("max_len must be positive")
    k = ifs1d.size
    total = sum(k**L for L in range(1, max_len + 1))
    if total > budget:
        raise BudgetExceeded(f"{total} words exceed budget {budget}")
    exact = ifs1d.exact
    seen: dict = {}
    all_s, all_b, tags = [], [], []
    for L in range(1, max_len + 1):
        s, b = _level_maps(ifs1d, L)
        if exact:
            for idx, key in enumerate(zip(s, b)):
                if key in seen:
                    u1 = seen[key]
                    return u1, _decode(idx, L, k), L
                seen[key] = _decode(idx, L, k)
            continue
        all_s.append(s)
        all_b.append(b)
        tags.extend((L, idx) for idx in range(len(s)))
        S, B = np.concatenate(all_s), np.concatenate(all_b)
        pairs = _close_pairs(_slope_classes(S, False), B, False)
        # keep pairs involving a new word; positions are ordered by (length, index)
        fresh = [(i, j) for i, j in pairs if tags[j][0] == L]
        if fresh:
            i, j = min(fresh, key=lambda ij: (ij[1], ij[0]))
            (L1, i1), (L2, i2) = tags[i], tags[j]
            return _decode(i1, L1, k), _decode(i2, L2, k), L
    return None


@dataclass
class SeparationProfile:
    levels: list = field(default_factory=list)
    c_values: list = field(default_factory=list)
    min_rho: list = field(default_factory=list)

    def rows(self):
        return list(zip(self.levels, self.min_rho, self.c_values))


def min_level_distance(ifs1d: DiagonalIFS, n: int, budget: int = DEFAULT_WORD_BUDGET) -> float:
    """``min ρ(ψ_{u1}, ψ_{u2})`` over distinct ``u1, u2 ∈ Λ^n``."""
    _require_line(ifs1d)
    if ifs1d.size**n > budget:
        raise BudgetExceeded(f"{ifs1d.size}^{n} words exceed budget {budget}")
    s, b = _level_maps(ifs1d, n)
    cls = _slope_classes(s, ifs1d.exact)
    best = math.inf
    order = np.lexsort((b.astype(float), cls))
    for x, y in zip(order[:-1], order[1:]):
        if cls[x] != cls[y]:
            continue
        diff = float(abs(b[x] - b[y]))
        if not ifs1d.exact and diff <= FLOAT_OVERLAP_TOL:
            diff = 0.0
        best = min(best, diff)
    return best


def separation_profile(
    ifs1d: DiagonalIFS, levels: Sequence[int], budget: int = DEFAULT_WORD_BUDGET
) -> SeparationProfile:
    """Finite-level separation constants ``c_n = (min ρ)^{1/n}``."""
    prof = SeparationProfile()
    for n in levels:
        if n < 1:
            raise ValueError("levels must be positive")
        m = min_level_distance(ifs1d, n, budget)
        prof.levels.append(int(n))
        prof.min_rho.append(m)
        prof.c_values.append(m ** (1.0 / n) if math.isfinite(m) else math.inf)
    return prof


def _half_sums(r: float, powers: Sequence[int]) -> np.ndarray:
    """All sums ``Σ c_k r^k`` over ``c ∈ {-1,0,1}^powers``; the last power varies fastest."""
    vals = np.zeros(1)
    for k in powers:
        vals = (vals[:, None] + np.array([-1.0, 0.0, 1.0]) * r**k).ravel()
    return vals


def _digits(index: int, count: int) -> list[int]:
    out = []
    for _ in range(count):
        index, q = divmod(index, 3)
        out.append(q - 1)
    return out[::-1]


def pm10_root_check(r, max_degree: int) -> tuple[int, ...] | None:
    """A nonzero ``c ∈ {-1,0,1}^{D+1}`` with ``Σ c_k r^k = 0``, of least degree ``D``.

    The witness has ``c_0 ≠ 0`` and leading coefficient ``+1``, and is
    returned trimmed to its degree. Floats are matched within
    :data:`ROOT_TOL`, which admits spurious witnesses at high degree since
    the number of candidate values grows like ``3^D``. Rational ``r`` in
    ``(0, 1)`` never has a witness (rational root theorem).
    """
    if max_degree < 1:
        raise ValueError("max_degree must be positive")
    if max_degree > MAX_PM_DEGREE:
        raise BudgetExceeded(f"max_degree {max_degree} exceeds {MAX_PM_DEGREE}")
    if isinstance(r, Fraction) or (isinstance(r, int) and not isinstance(r, bool)):
        r = Fraction(r)
        if not 0 < r < 1:
            raise ValueError("r must lie in (0, 1)")
        return None
    r = float(r)
    if not 0 < r < 1:
        raise ValueError("r must lie in (0, 1)")
    for D in range(1, max_degree + 1):
        middle = list(range(1, D))
        top = r**D
        for c0 in (-1, 1):
            const = top + c0
            if D <= BRUTE_FORCE_DEGREE:
                vals = const + _half_sums(r, middle)
                hits = np.flatnonzero(np.abs(vals) <= ROOT_TOL)
                if hits.size:
                    mid = _digits(int(hits[0]), len(middle))
                    return tuple([c0] + mid + [1])
                continue
            h = len(middle) // 2
            low, high = middle[:h], middle[h:]
            A = _half_sums(r, low)
            B = const + _half_sums(r, high)
            order = np.argsort(A, kind="stable")
            As = A[order]
            pos = np.searchsorted(As, -B)
            for cand in (pos - 1, pos):
                ok = (cand >= 0) & (cand < len(As))
                c = np.clip(cand, 0, len(As) - 1)
                good = ok & (np.abs(As[c] + B) <= ROOT_TOL)
                hits = np.flatnonzero(good)
                if hits.size:
                    ib = int(hits[0])
                    ia = int(order[c[ib]])
                    return tuple([c0] + _digits(ia, len(low)) + _digits(ib, len(high)) + [1])
    return None


def pm_one_template(ifs: DiagonalIFS, j: int):
    """If coordinate ``j`` is ``t -> r t ± 1`` (two maps, one common r), return r."""
    if ifs.size != 2:
        return None
    r = ifs.slopes[:, j]
    a = ifs.offsets[:, j]
    if r[0] != r[1] or sorted(float(v) for v in a) != [-1.0, 1.0]:
        return None
    return r[0]
