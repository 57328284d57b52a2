"""Finite atomic measures on R^d and entropies with respect to dyadic partitions.

Partitions are objects with a ``keys(points)`` method returning an integer
array with one row per point; two points share a cell iff their rows agree.
:class:`PartitionSpec` gives the non-conformal partition ``E_n`` (cells of
side ``2^-floor(chi_j n)`` in coordinate ``j``), :class:`Pullback` the
pull-back of a partition through a coordinate projection, and :class:`Join`
the common refinement of several partitions.

Coordinates are 0-based. Entropies are in bits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy import signal, special

from .ifs_core import BudgetExceeded

DEFAULT_ATOM_BUDGET = 10**7
MASS_ATOL = 1e-9
# guards floor(chi*n) against chi*n landing a hair below an integer
LEVEL_EPS = 1e-9


def level(chi_j: float, n: float) -> int:
    return math.floor(chi_j * n + LEVEL_EPS)


def _scaled_floor(col: np.ndarray, m: int) -> np.ndarray:
    """``floor(x * 2^m)`` exactly, for float or Fraction columns."""
    if col.dtype == object:
        scale = Fraction(2) ** m
        return np.array([math.floor(x * scale) for x in col], dtype=np.int64)
    return np.floor(np.ldexp(col, m)).astype(np.int64)


def _group(keys: np.ndarray) -> tuple[np.ndarray, int]:
    """Inverse indices labelling equal rows of ``keys``, and the group count."""
    n = keys.shape[0]
    if keys.ndim == 1:
        keys = keys[:, None]
    if keys.shape[1] == 0 or n == 0:
        return np.zeros(n, dtype=np.intp), min(n, 1)
    if keys.shape[1] == 1:
        _, inv = np.unique(keys[:, 0], return_inverse=True)
        return inv.ravel(), int(inv.max()) + 1
    lo = keys.min(axis=0)
    span = keys.max(axis=0) - lo + 1
    if float(np.prod(span.astype(float))) < 2.0**62:
        flat = np.zeros(n, dtype=np.int64)
        for j in range(keys.shape[1]):
            flat = flat * span[j] + (keys[:, j] - lo[j])
        _, inv = np.unique(flat, return_inverse=True)
    else:
        _, inv = np.unique(keys, axis=0, return_inverse=True)
    inv = inv.ravel()
    return inv, int(inv.max()) + 1


def _entropy_of_masses(q: np.ndarray) -> float:
    q = q[q > 0]
    return float(-(q * np.log2(q)).sum())


# ----------------------------------------------------------------------------
# partitions


@dataclass(frozen=True)
class PartitionSpec:
    """The level-``n`` non-conformal partition for exponents ``chi``."""

    chi: tuple
    n: float

    def __post_init__(self):
        object.__setattr__(self, "chi", tuple(float(c) for c in self.chi))
        if any(c <= 0 for c in self.chi):
            raise ValueError("chi entries must be positive")

    @classmethod
    def dyadic(cls, d: int, n: int) -> "PartitionSpec":
        """The conformal partition ``D_n`` of R^d."""
        return cls((1.0,) * d, n)

    @property
    def d(self) -> int:
        return len(self.chi)

    @property
    def levels(self) -> tuple[int, ...]:
        return tuple(level(c, self.n) for c in self.chi)

    def at(self, n: float) -> "PartitionSpec":
        return PartitionSpec(self.chi, n)

    def keys(self, points: np.ndarray) -> np.ndarray:
        points = _as_points(points, self.d)
        return np.stack([_scaled_floor(points[:, j], m) for j, m in enumerate(self.levels)], axis=1)


@dataclass(frozen=True)
class Pullback:
    """``π_J^{-1} base``: cells of the projection onto the coordinates ``J``."""

    base: PartitionSpec
    J: tuple

    def __post_init__(self):
        object.__setattr__(self, "J", tuple(sorted(int(j) for j in self.J)))

    def keys(self, points: np.ndarray) -> np.ndarray:
        points = _as_points(points, self.base.d)
        return self.base.keys(_project_points(points, self.J))


class Join:
    """Common refinement ``P_1 ∨ ... ∨ P_k``."""

    def __init__(self, *parts):
        self.parts = parts

    def keys(self, points: np.ndarray) -> np.ndarray:
        if not self.parts:
            return np.zeros((len(points), 0), dtype=np.int64)
        return np.concatenate([p.keys(points) for p in self.parts], axis=1)


class Trivial:
    """The one-cell partition."""

    def keys(self, points: np.ndarray) -> np.ndarray:
        return np.zeros((len(points), 0), dtype=np.int64)


# ----------------------------------------------------------------------------
# measures


def _as_points(points, d: int | None = None) -> np.ndarray:
    arr = np.asarray(points)
    if arr.dtype != object:
        arr = arr.astype(float)
    if arr.ndim == 1:
        arr = arr[:, None] if d in (None, 1) else arr[None, :]
    if d is not None and arr.shape[1] != d:
        raise ValueError(f"expected points of dimension {d}, got {arr.shape[1]}")
    return arr


def _project_points(points: np.ndarray, J: Sequence[int]) -> np.ndarray:
    out = points.copy()
    mask = np.ones(points.shape[1], dtype=bool)
    mask[list(J)] = False
    if points.dtype == object:
        out[:, mask] = Fraction(0)
    else:
        out[:, mask] = 0.0
    return out


class DiscreteMeasure:
    """A finitely supported probability measure on R^d.

    ``points`` is ``(N, d)`` float64, or an object array of Fractions for exact
    work; ``masses`` is float64 or object likewise. Exact duplicate points are
    merged and atoms sorted lexicographically unless ``merge=False``.
    """

    def __init__(self, points, masses, merge: bool = True):
        pts = _as_points(points)
        if pts.dtype == object:
            ms = np.array(list(masses), dtype=object)
        else:
            ms = np.asarray(masses, dtype=float)
        if pts.shape[0] != ms.shape[0] or pts.shape[0] == 0:
            raise ValueError("need one positive mass per point and at least one atom")
        if not all(v > 0 for v in ms) if ms.dtype == object else np.any(ms <= 0):
            raise ValueError("masses must be positive")
        total = float(sum(ms)) if ms.dtype == object else float(ms.sum())
        if abs(total - 1.0) > MASS_ATOL:
            raise ValueError(f"masses must sum to 1 (got {total!r})")
        if merge:
            pts, ms = _merge(pts, ms)
        pts.setflags(write=False)
        ms.setflags(write=False)
        self.points = pts
        self.masses = ms

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def exact(self) -> bool:
        return self.points.dtype == object

    def __len__(self) -> int:
        return self.points.shape[0]

    def __repr__(self):
        return f"DiscreteMeasure(atoms={len(self)}, d={self.d}, exact={self.exact})"

    def float_masses(self) -> np.ndarray:
        return self.masses.astype(float) if self.masses.dtype == object else self.masses

    def float_points(self) -> np.ndarray:
        return self.points.astype(float) if self.exact else self.points

    def as_float(self) -> "DiscreteMeasure":
        if not self.exact:
            return self
        return DiscreteMeasure(self.float_points(), self.float_masses())

    def total_mass(self):
        return sum(self.masses) if self.masses.dtype == object else float(self.masses.sum())

    def support_diameter(self) -> float:
        pts = self.float_points()
        return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))

    def atoms(self) -> list[tuple[tuple, object]]:
        return [(tuple(p), m) for p, m in zip(self.points, self.masses)]

    def allclose(self, other: "DiscreteMeasure", atol: float = 1e-12) -> bool:
        if len(self) != len(other) or self.d != other.d:
            return False
        return bool(
            np.allclose(self.float_points(), other.float_points(), atol=atol, rtol=0)
            and np.allclose(self.float_masses(), other.float_masses(), atol=atol, rtol=0)
        )


def _merge(points: np.ndarray, masses: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if points.dtype == object:
        acc: dict = {}
        for p, m in zip(map(tuple, points), masses):
            acc[p] = acc.get(p, 0) + m
        keys = sorted(acc)
        return np.array(keys, dtype=object).reshape(len(keys), -1), np.array([acc[k] for k in keys], dtype=object)
    uniq, inv = np.unique(points, axis=0, return_inverse=True)
    return uniq, np.bincount(inv.ravel(), weights=masses, minlength=uniq.shape[0])


def point_mass(x: Sequence) -> DiscreteMeasure:
    x = np.asarray(x, dtype=object if any(isinstance(v, Fraction) for v in np.ravel(x)) else float)
    return DiscreteMeasure(x.reshape(1, -1), [Fraction(1) if x.dtype == object else 1.0])


def uniform(points) -> DiscreteMeasure:
    pts = _as_points(points)
    n = pts.shape[0]
    masses = [Fraction(1, n)] * n if pts.dtype == object else np.full(n, 1.0 / n)
    return DiscreteMeasure(pts, masses)


def mixture(measures: Sequence[DiscreteMeasure], q: Sequence[float]) -> DiscreteMeasure:
    pts = np.concatenate([m.float_points() for m in measures])
    ms = np.concatenate([qi * m.float_masses() for m, qi in zip(measures, q)])
    keep = ms > 0
    return DiscreteMeasure(pts[keep], ms[keep] / ms[keep].sum())


# ----------------------------------------------------------------------------
# entropy


def cell_of(x: Sequence, spec: PartitionSpec) -> tuple[int, ...]:
    """Index of the ``E_n`` cell containing ``x``."""
    pts = _as_points(np.asarray([list(np.ravel(x))], dtype=object if any(isinstance(v, Fraction) for v in np.ravel(x)) else float))
    return tuple(int(v) for v in spec.keys(pts)[0])


def cell_masses(m: DiscreteMeasure, partition) -> np.ndarray:
    inv, k = _group(partition.keys(m.points))
    return np.bincount(inv, weights=m.float_masses(), minlength=k)


def entropy(m: DiscreteMeasure, partition) -> float:
    """``H(θ, P) = -Σ θ(P) log θ(P)``."""
    return _entropy_of_masses(cell_masses(m, partition))


def shannon_entropy(m: DiscreteMeasure) -> float:
    """Entropy of the atoms themselves (the finest partition)."""
    return _entropy_of_masses(m.float_masses())


def cond_entropy(m: DiscreteMeasure, fine, coarse) -> float:
    """``H(θ, D | E) = Σ_E θ(E) H(θ_E, D)``."""
    ce, _ = _group(coarse.keys(m.points))
    joint, _ = _group(np.concatenate([ce[:, None], fine.keys(m.points)], axis=1))
    w = m.float_masses()
    q_joint = np.bincount(joint, weights=w)
    q_coarse = np.bincount(ce, weights=w)
    # coarse cell of each joint cell
    parent = np.zeros(q_joint.shape[0], dtype=np.intp)
    parent[joint] = ce
    ratio = q_joint / q_coarse[parent]
    keep = q_joint > 0
    return float(-(q_joint[keep] * np.log2(ratio[keep])).sum())


def cond_entropy_with_projection(
    m: DiscreteMeasure, j: int, q: float, mstep: int, chi: Sequence[float]
) -> float:
    """``H(θ, E_{q+m} | E_q ∨ π_{[d]∖{j}}^{-1} E_{q+m})``."""
    d = m.d
    if not 0 <= j < d:
        raise ValueError(f"coordinate {j} out of range for d = {d}")
    fine = PartitionSpec(chi, q + mstep)
    others = tuple(k for k in range(d) if k != j)
    coarse = Join(PartitionSpec(chi, q), Pullback(fine, others))
    return cond_entropy(m, fine, coarse)


def components(m: DiscreteMeasure, partition) -> list[tuple[tuple, float, DiscreteMeasure]]:
    """The normalised restrictions of ``θ`` to the cells it charges."""
    keys = partition.keys(m.points)
    inv, k = _group(keys)
    w = m.float_masses()
    out = []
    for g in range(k):
        sel = inv == g
        mass = float(w[sel].sum())
        cell = tuple(int(v) for v in keys[sel][0])
        pts = m.points[sel]
        if m.exact:
            tot = sum(m.masses[sel])
            comp = DiscreteMeasure(pts, [v / tot for v in m.masses[sel]], merge=False)
        else:
            comp = DiscreteMeasure(pts, w[sel] / mass, merge=False)
        out.append((cell, mass, comp))
    out.sort(key=lambda t: t[0])
    return out


def multiscale_average(m: DiscreteMeasure, n: int, mstep: int, chi: Sequence[float]) -> float:
    """``E_{1<=i<=n} (1/m) H(θ_{x,i}, E_{i+m})``.

    Each level's expectation over components equals ``H(θ, E_{i+m} | E_i)``.
    """
    if n < 1 or mstep < 1:
        raise ValueError("n and mstep must be positive")
    spec = PartitionSpec(chi, 0)
    total = sum(cond_entropy(m, spec.at(i + mstep), spec.at(i)) for i in range(1, n + 1))
    return total / (n * mstep)


# ----------------------------------------------------------------------------
# transformations


def project(m: DiscreteMeasure, J: Iterable[int]) -> DiscreteMeasure:
    """Push-forward through ``π_J`` (coordinates outside ``J`` set to 0)."""
    J = tuple(J)
    for j in J:
        if not 0 <= j < m.d:
            raise ValueError(f"coordinate {j} out of range")
    return DiscreteMeasure(_project_points(m.points, J), m.masses)


def rescale(m: DiscreteMeasure, t: float, chi: Sequence[float]) -> DiscreteMeasure:
    """Push-forward through ``A_χ^t = diag(2^{tχ_1}, ..., 2^{tχ_d})``."""
    expo = [t * c for c in chi]
    if all(float(e).is_integer() for e in expo):
        if m.exact:
            pts = m.points * np.array([Fraction(2) ** int(e) for e in expo], dtype=object)
        else:
            pts = np.ldexp(m.points, np.array([int(e) for e in expo]))
        return DiscreteMeasure(pts, m.masses)
    pts = m.float_points() * np.exp2(np.asarray(expo, dtype=float))
    return DiscreteMeasure(pts, m.float_masses())


def lattice_quantize(m: DiscreteMeasure, spec: PartitionSpec) -> DiscreteMeasure:
    """Move each atom to the lattice point ``k / 2^{m_j}`` of its ``E_n`` cell."""
    keys = spec.keys(m.points)
    if m.exact:
        scale = np.array([Fraction(2) ** -lv for lv in spec.levels], dtype=object)
        pts = np.array([[Fraction(int(k)) for k in row] for row in keys], dtype=object) * scale
    else:
        pts = np.ldexp(keys.astype(float), -np.array(spec.levels))
    return DiscreteMeasure(pts, m.masses)


def on_lattice(m: DiscreteMeasure, spec: PartitionSpec) -> bool:
    """Whether every atom already sits on the lattice of ``spec``."""
    q = lattice_quantize(m, spec)
    return len(q) == len(m) and bool(np.all(q.points == m.points))


def _lattice_ints(m: DiscreteMeasure, levels: Sequence[int]) -> np.ndarray:
    """Integer coordinates ``x_j 2^{L_j}``; raises if an atom is off the lattice."""
    cols = []
    for j, lv in enumerate(levels):
        col = m.points[:, j]
        if m.exact:
            scaled = [x * Fraction(2) ** lv for x in col]
            if any(s.denominator != 1 for s in scaled):
                raise ValueError(f"coordinate {j} is not on the 2^-{lv} lattice")
            cols.append(np.array([int(s) for s in scaled], dtype=np.int64))
        else:
            scaled = np.ldexp(col, lv)
            if np.any(np.floor(scaled) != scaled):
                raise ValueError(f"coordinate {j} is not on the 2^-{lv} lattice")
            cols.append(scaled.astype(np.int64))
    return np.stack(cols, axis=1)


def _sparse_convolve_ints(pa, wa, pb, wb, budget):
    if len(pa) * len(pb) > budget:
        raise BudgetExceeded(f"convolution of {len(pa)} x {len(pb)} atoms exceeds budget {budget}")
    pts = (pa[:, None, :] + pb[None, :, :]).reshape(-1, pa.shape[1])
    ws = (wa[:, None] * wb[None, :]).ravel()
    inv, k = _group(pts)
    out_w = np.bincount(inv, weights=ws, minlength=k)
    out_p = np.zeros((k, pa.shape[1]), dtype=np.int64)
    out_p[inv] = pts
    return out_p, out_w


def _dense_convolve_ints(pa, wa, pb, wb, budget):
    """Direct (non-FFT) convolution of two lattice measures on a dense grid."""
    lo_a, lo_b = pa.min(axis=0), pb.min(axis=0)
    shape_a = tuple(pa.max(axis=0) - lo_a + 1)
    shape_b = tuple(pb.max(axis=0) - lo_b + 1)
    out_shape = tuple(x + y - 1 for x, y in zip(shape_a, shape_b))
    if np.prod(np.array(out_shape, dtype=float)) > budget:
        return None
    ga = np.zeros(shape_a)
    gb = np.zeros(shape_b)
    np.add.at(ga, tuple((pa - lo_a).T), wa)
    np.add.at(gb, tuple((pb - lo_b).T), wb)
    # axes along which both grids are flat do not take part
    live = [ax for ax in range(ga.ndim) if shape_a[ax] > 1 or shape_b[ax] > 1]
    if len(live) <= 1:
        gc = np.convolve(ga.ravel(), gb.ravel()).reshape(out_shape)
    else:
        gc = signal.convolve(ga, gb, method="direct")
    idx = np.nonzero(gc > 0)
    pts = np.stack(idx, axis=1).astype(np.int64) + (lo_a + lo_b)
    return pts, gc[idx]


def _convolve_ints(pa, wa, pb, wb, budget):
    if len(pa) * len(pb) > 4096:
        dense = _dense_convolve_ints(pa, wa, pb, wb, budget)
        if dense is not None:
            return dense
    return _sparse_convolve_ints(pa, wa, pb, wb, budget)


def convolve(
    a: DiscreteMeasure,
    b: DiscreteMeasure,
    budget: int = DEFAULT_ATOM_BUDGET,
    lattice_level: int | Sequence[int] | None = None,
) -> DiscreteMeasure:
    """``a * b``, the law of ``X + Y`` for independent ``X ~ a``, ``Y ~ b``.

    With ``lattice_level`` both inputs are first quantized to the lattice of
    pitch ``2^-L`` and the sum is computed in integer coordinates. Otherwise
    sums of atoms are merged only when exactly equal.
    """
    if a.d != b.d:
        raise ValueError("dimension mismatch")
    if lattice_level is not None:
        levels = [lattice_level] * a.d if np.isscalar(lattice_level) else list(lattice_level)
        spec = PartitionSpec((1.0,) * a.d, 1)
        spec_levels = tuple(int(v) for v in levels)
        pa = _lattice_ints(_quantize_levels(a, spec_levels), spec_levels)
        pb = _lattice_ints(_quantize_levels(b, spec_levels), spec_levels)
        pts, ws = _convolve_ints(pa, a.float_masses(), pb, b.float_masses(), budget)
        del spec
        return DiscreteMeasure(np.ldexp(pts.astype(float), -np.array(spec_levels)), ws / ws.sum())
    if len(a) * len(b) > budget:
        raise BudgetExceeded(f"convolution of {len(a)} x {len(b)} atoms exceeds budget {budget}")
    if a.exact and b.exact:
        pts = (a.points[:, None, :] + b.points[None, :, :]).reshape(-1, a.d)
        ws = (a.masses[:, None] * b.masses[None, :]).ravel()
        return DiscreteMeasure(pts, ws)
    pts = (a.float_points()[:, None, :] + b.float_points()[None, :, :]).reshape(-1, a.d)
    ws = (a.float_masses()[:, None] * b.float_masses()[None, :]).ravel()
    return DiscreteMeasure(pts, ws / ws.sum())


def _quantize_levels(m: DiscreteMeasure, levels: Sequence[int]) -> DiscreteMeasure:
    cols = [_scaled_floor(m.points[:, j], lv) for j, lv in enumerate(levels)]
    keys = np.stack(cols, axis=1)
    return DiscreteMeasure(np.ldexp(keys.astype(float), -np.array(levels)), m.float_masses())


def self_convolve(
    a: DiscreteMeasure,
    k: int,
    budget: int = DEFAULT_ATOM_BUDGET,
    lattice_level: int | Sequence[int] | None = None,
) -> DiscreteMeasure:
    """``a^{*k}`` by binary powering."""
    if k < 1:
        raise ValueError("k must be >= 1")
    result = None
    base = a
    while True:
        if k & 1:
            result = base if result is None else convolve(result, base, budget, lattice_level)
        k >>= 1
        if not k:
            return result
        base = convolve(base, base, budget, lattice_level)


def kv_gap(
    theta: DiscreteMeasure,
    sigma: DiscreteMeasure,
    k: int,
    spec: PartitionSpec,
    budget: int = DEFAULT_ATOM_BUDGET,
) -> float:
    """``k(H(θ*σ) - H(σ)) - (H(θ^{*k}*σ) - H(σ))`` on the lattice of ``spec``.

    Both measures must already lie on the lattice ``Π_j 2^{-m_j} Z``; the
    convolutions are carried out exactly in integer coordinates.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    levels = spec.levels
    pt, wt = _lattice_ints(theta, levels), theta.float_masses()
    ps, ws = _lattice_ints(sigma, levels), sigma.float_masses()
    h_sigma = _entropy_of_masses(ws)
    _, w1 = _convolve_ints(pt, wt, ps, ws, budget)
    h1 = _entropy_of_masses(w1)
    pk, wk = ps, ws
    for _ in range(k):
        pk, wk = _convolve_ints(pt, wt, pk, wk, budget)
    hk = _entropy_of_masses(wk)
    return float(k * (h1 - h_sigma) - (hk - h_sigma))


# ----------------------------------------------------------------------------
# one-dimensional statistics


@dataclass(frozen=True)
class GaussianSpec:
    """Centered Gaussian with the given variance."""

    variance: float

    def __post_init__(self):
        if not self.variance > 0:
            raise ValueError("variance must be positive")

    def cdf(self, t):
        return special.ndtr(np.asarray(t, dtype=float) / math.sqrt(self.variance))


def gaussian_cdf(spec: GaussianSpec, t: float) -> float:
    return float(spec.cdf(t))


def _coord(m: DiscreteMeasure, coord: int):
    if not 0 <= coord < m.d:
        raise ValueError(f"coordinate {coord} out of range")
    x = m.points[:, coord]
    return x


def mean_variance(m: DiscreteMeasure, coord: int = 0):
    """Mean and variance of one coordinate (exact for Fraction measures)."""
    x = _coord(m, coord)
    if m.exact:
        mean = sum(w * v for w, v in zip(m.masses, x))
        var = sum(w * (v - mean) ** 2 for w, v in zip(m.masses, x))
        return mean, var
    w = m.masses
    mean = float(np.dot(w, x))
    var = float(np.dot(w, (x - mean) ** 2))
    return mean, var


def third_abs_moment(m: DiscreteMeasure, coord: int = 0) -> float:
    x = _coord(m, coord).astype(float)
    return float(np.dot(m.float_masses(), np.abs(x) ** 3))


def _cdf_steps(m: DiscreteMeasure, coord: int):
    x = _coord(m, coord).astype(float)
    w = m.float_masses()
    order = np.argsort(x, kind="stable")
    x, w = x[order], w[order]
    # collapse atoms sharing the coordinate
    xs, inv = np.unique(x, return_inverse=True)
    ws = np.bincount(inv, weights=w)
    F = np.minimum(np.cumsum(ws), 1.0)
    return xs, F


def kolmogorov_distance(m: DiscreteMeasure, g: GaussianSpec, coord: int = 0) -> float:
    """``sup_t |F_θ(t) - F_γ(t)|``, attained at an atom (left or right limit)."""
    xs, F = _cdf_steps(m, coord)
    G = g.cdf(xs)
    left = np.concatenate([[0.0], F[:-1]])
    return float(max(np.abs(F - G).max(), np.abs(left - G).max()))


def levy_distance(m: DiscreteMeasure, g: GaussianSpec, coord: int = 0, tol: float = 1e-9) -> float:
    """Lévy distance between ``θ`` and ``γ`` by bisection on ``ε``."""
    xs, F = _cdf_steps(m, coord)
    Fprev = np.concatenate([[0.0], F])

    def ok(eps: float) -> bool:
        # G(x) <= F(x+eps) + eps and F(x-eps) - eps <= G(x) for all x
        upper = g.cdf(np.concatenate([xs - eps, [np.inf]])) <= Fprev + eps + 1e-15
        lower = F - eps <= g.cdf(xs + eps) + 1e-15
        return bool(upper.all() and lower.all())

    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi
