"""Diagonal affine maps, iterated function systems and word algebra.

Index conventions are 0-based throughout: maps are indexed ``0..|Λ|-1`` and
coordinates ``0..d-1``. Words are plain tuples of map indices.

Two arithmetic backends exist. When every slope and offset is a
:class:`fractions.Fraction` (or an int) the system is *exact* and compositions
are computed in rational arithmetic; otherwise everything is converted to
binary floating point. The backend is decided once, at construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence, Union

import numpy as np

Number = Union[int, float, Fraction]
Word = tuple  # tuple[int, ...]

DEFAULT_WORD_BUDGET = 10**7
SUBGROUP_RTOL = 1e-9
# t-values are sums of floating ratios; compare levels with this slack
T_ATOL = 1e-9


class BudgetExceeded(RuntimeError):
    """An enumeration would exceed its configured node/atom budget."""


class SubgroupConditionError(ValueError):
    """The linear parts are not contained in a one-parameter subgroup."""


def as_number(x, exact: bool):
    """Coerce a scalar to the requested backend.

    Strings of the form ``"num/den"`` are parsed as rationals. Floats are
    converted to the rational equal to their shortest decimal repr.
    """
    if exact:
        if isinstance(x, Fraction):
            return x
        if isinstance(x, str):
            return Fraction(x.strip())
        if isinstance(x, Rational):
            return Fraction(int(x.numerator), int(x.denominator))
        return Fraction(repr(float(x)))
    if isinstance(x, str):
        return float(Fraction(x.strip()))
    return float(x)


def _is_rational(x) -> bool:
    if isinstance(x, (Fraction, int, np.integer)) and not isinstance(x, bool):
        return True
    if isinstance(x, str):
        try:
            Fraction(x.strip())
        except ValueError:
            return False
        return True
    return False


@dataclass(frozen=True)
class AffineMap1:
    """The map ``t -> slope*t + offset`` on the real line."""

    slope: Number
    offset: Number

    def __post_init__(self):
        if self.slope == 0:
            raise ValueError("slope must be nonzero")

    def __call__(self, t):
        return self.slope * t + self.offset

    def compose(self, other: "AffineMap1") -> "AffineMap1":
        """Return ``self ∘ other``."""
        return AffineMap1(self.slope * other.slope, self.slope * other.offset + self.offset)

    @staticmethod
    def identity(exact: bool = False) -> "AffineMap1":
        one, zero = (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)
        return AffineMap1(one, zero)


@dataclass(frozen=True)
class DiagonalMap:
    """A map of R^d acting coordinatewise by :class:`AffineMap1`."""

    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        if not self.coords:
            raise ValueError("a diagonal map needs at least one coordinate")

    @property
    def d(self) -> int:
        return len(self.coords)

    @property
    def slopes(self) -> tuple:
        return tuple(c.slope for c in self.coords)

    @property
    def offsets(self) -> tuple:
        return tuple(c.offset for c in self.coords)

    def __call__(self, x: Sequence):
        if len(x) != self.d:
            raise ValueError(f"expected a point of dimension {self.d}")
        return tuple(c(t) for c, t in zip(self.coords, x))

    def compose(self, other: "DiagonalMap") -> "DiagonalMap":
        if other.d != self.d:
            raise ValueError("dimension mismatch")
        return DiagonalMap(tuple(a.compose(b) for a, b in zip(self.coords, other.coords)))

    @staticmethod
    def identity(d: int, exact: bool = False) -> "DiagonalMap":
        return DiagonalMap(tuple(AffineMap1.identity(exact) for _ in range(d)))


class DiagonalIFS:
    """A finite family of diagonal affine contractions of R^d.

    ``slopes`` and ``offsets`` are ``(|Λ|, d)`` arrays. In exact mode they are
    object arrays of :class:`Fraction`, otherwise ``float64``.
    """

    def __init__(self, slopes, offsets, exact: bool | None = None):
        slopes_l = [list(row) for row in slopes]
        offsets_l = [list(row) for row in offsets]
        if len(slopes_l) < 1 or len(slopes_l) != len(offsets_l):
            raise ValueError("slopes and offsets must list the same maps")
        d = len(slopes_l[0])
        if d < 1:
            raise ValueError("dimension must be positive")
        for row_r, row_a in zip(slopes_l, offsets_l):
            if len(row_r) != d or len(row_a) != d:
                raise ValueError("all maps must share the same dimension")
        if exact is None:
            exact = all(_is_rational(v) for row in slopes_l + offsets_l for v in row)
        dtype = object if exact else np.float64
        self.exact = bool(exact)
        self.slopes = np.array([[as_number(v, exact) for v in row] for row in slopes_l], dtype=dtype)
        self.offsets = np.array([[as_number(v, exact) for v in row] for row in offsets_l], dtype=dtype)
        for v in self.slopes.ravel():
            if not (0 < abs(v) < 1):
                raise ValueError(f"every slope must satisfy 0 < |r| < 1, got {v}")
        self.slopes.setflags(write=False)
        self.offsets.setflags(write=False)

    @classmethod
    def from_maps(cls, maps: Iterable[DiagonalMap], exact: bool | None = None) -> "DiagonalIFS":
        maps = list(maps)
        return cls([m.slopes for m in maps], [m.offsets for m in maps], exact=exact)

    @property
    def d(self) -> int:
        return self.slopes.shape[1]

    @property
    def size(self) -> int:
        return self.slopes.shape[0]

    def __len__(self) -> int:
        return self.size

    @property
    def maps(self) -> list[DiagonalMap]:
        return [
            DiagonalMap(tuple(AffineMap1(r, a) for r, a in zip(rs, as_)))
            for rs, as_ in zip(self.slopes, self.offsets)
        ]

    def abs_log_slopes(self) -> np.ndarray:
        """``-log2|r_{i,j}|`` as a float array, shape ``(|Λ|, d)``."""
        return np.array([[-math.log2(abs(v)) for v in row] for row in self.slopes], dtype=float)

    def coordinate(self, j: int) -> "DiagonalIFS":
        """The 1-dimensional system acting on coordinate ``j``."""
        return self.restrict([j])

    def restrict(self, coords: Sequence[int]) -> "DiagonalIFS":
        coords = list(coords)
        return DiagonalIFS(self.slopes[:, coords], self.offsets[:, coords], exact=self.exact)

    def permute_coordinates(self, perm: Sequence[int]) -> "DiagonalIFS":
        return self.restrict(perm)

    def as_float(self) -> "DiagonalIFS":
        if not self.exact:
            return self
        return DiagonalIFS(self.slopes.astype(float), self.offsets.astype(float), exact=False)

    def float_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return self.slopes.astype(float), self.offsets.astype(float)

    def check_word(self, u: Sequence[int]) -> Word:
        u = tuple(int(i) for i in u)
        for i in u:
            if not 0 <= i < self.size:
                raise IndexError(f"letter {i} is not a map index (|Λ| = {self.size})")
        return u

    def __eq__(self, other):
        return (
            isinstance(other, DiagonalIFS)
            and self.exact == other.exact
            and self.slopes.shape == other.slopes.shape
            and bool(np.all(self.slopes == other.slopes))
            and bool(np.all(self.offsets == other.offsets))
        )

    def __repr__(self):
        return f"DiagonalIFS(d={self.d}, maps={self.size}, exact={self.exact})"


class WeightedIFS:
    """A :class:`DiagonalIFS` together with a probability vector on its maps."""

    def __init__(self, ifs: DiagonalIFS, p: Sequence[float] | None = None):
        if p is None:
            p = np.full(ifs.size, 1.0 / ifs.size)
        p = np.asarray([float(x) for x in p], dtype=float)
        if p.shape != (ifs.size,):
            raise ValueError(f"need {ifs.size} weights, got {p.shape[0]}")
        if np.any(p < 0):
            raise ValueError("weights must be nonnegative")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1 (sum = {p.sum()!r})")
        p.setflags(write=False)
        self.ifs = ifs
        self.p = p

    @property
    def d(self) -> int:
        return self.ifs.d

    @property
    def size(self) -> int:
        return self.ifs.size

    def entropy(self) -> float:
        """Shannon entropy of ``p`` in bits."""
        q = self.p[self.p > 0]
        return float(-(q * np.log2(q)).sum())

    def __repr__(self):
        return f"WeightedIFS({self.ifs!r}, p={self.p.tolist()})"


def example_system(rbar: Sequence, exact: bool | None = None) -> DiagonalIFS:
    """The two-map system ``x -> diag(rbar) x ± (1, ..., 1)``."""
    rbar = list(rbar)
    d = len(rbar)
    return DiagonalIFS([rbar, rbar], [[1] * d, [-1] * d], exact=exact)


def compose(ifs: DiagonalIFS, u: Sequence[int]) -> DiagonalMap:
    """``φ_u = φ_{u_0} ∘ ... ∘ φ_{u_{n-1}}``; the empty word gives the identity."""
    u = ifs.check_word(u)
    one = Fraction(1) if ifs.exact else 1.0
    slope = [one] * ifs.d
    offset = [one * 0] * ifs.d
    for i in u:
        for j in range(ifs.d):
            offset[j] = offset[j] + slope[j] * ifs.offsets[i, j]
            slope[j] = slope[j] * ifs.slopes[i, j]
    return DiagonalMap(tuple(AffineMap1(s, a) for s, a in zip(slope, offset)))


def lyapunov_exponents(w: WeightedIFS) -> np.ndarray:
    """``χ_j = -Σ_i p_i log2|r_{i,j}|`` for each coordinate."""
    return w.p @ w.ifs.abs_log_slopes()


def one_dim_subgroup_check(ifs: DiagonalIFS, p: Sequence[float] | None = None):
    """Return ``t_i`` with ``(-log|r_{i,j}|)_j = t_i χ`` for every map, or ``None``.

    Proportionality is tested coordinatewise with relative tolerance 1e-9.
    """
    w = WeightedIFS(ifs, p)
    chi = lyapunov_exponents(w)
    logs = ifs.abs_log_slopes()
    ratios = logs / chi[None, :]
    t = ratios.mean(axis=1)
    if np.all(np.abs(ratios - t[:, None]) <= SUBGROUP_RTOL * np.abs(t[:, None])):
        return t
    return None


def word_t(ts: Sequence[float], u: Sequence[int]) -> float:
    """``t_u = Σ_k t_{u_k}``; additive under concatenation."""
    return float(sum(ts[i] for i in u))


def stopping_words(
    ifs: DiagonalIFS,
    p: Sequence[float] | None,
    n: float,
    budget: int = DEFAULT_WORD_BUDGET,
) -> list[Word]:
    """The prefix-free set ``U_n`` of words first reaching ``t_u >= n``.

    The root is always expanded, so ``n <= 0`` yields the single letters.
    Returned in lexicographic order.
    """
    ts = one_dim_subgroup_check(ifs, p)
    if ts is None:
        raise SubgroupConditionError("linear parts are not in a 1-dimensional subgroup")
    if n < 0:
        raise ValueError("n must be nonnegative")
    out: list[Word] = []
    nodes = 0
    # explicit DFS; children pushed in reverse so output is lexicographic
    stack: list[tuple[Word, float]] = [((), 0.0)]
    while stack:
        u, tu = stack.pop()
        for i in reversed(range(ifs.size)):
            nodes += 1
            if nodes > budget:
                raise BudgetExceeded(f"stopping-word enumeration exceeded {budget} nodes")
            v, tv = u + (i,), tu + ts[i]
            if tv >= n - T_ATOL:
                out.append(v)
            else:
                stack.append((v, tv))
    out.sort()
    return out


def word_mass(p: Sequence[float], u: Sequence[int]) -> float:
    return float(np.prod([p[i] for i in u])) if len(u) else 1.0


def bounding_box(ifs: DiagonalIFS) -> np.ndarray:
    """Half-widths ``M_j = max_i|a_{i,j}| / (1 - max_i|r_{i,j}|)``.

    The box ``Π_j [-M_j, M_j]`` is mapped into itself by every map of the
    system, hence contains the attractor. Returned as floats (or Fractions in
    exact mode).
    """
    out = []
    for j in range(ifs.d):
        amax = max(abs(v) for v in ifs.offsets[:, j])
        rmax = max(abs(v) for v in ifs.slopes[:, j])
        out.append(amax / (1 - rmax))
    return np.array(out, dtype=object if ifs.exact else float)
