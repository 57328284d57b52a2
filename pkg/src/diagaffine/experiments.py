"""Approximations of self-affine measures and attractors, and the numerical
experiments built on them: entropy curves, box counts, slice entropies and
entropy increase under convolution.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _raster
from .dimension import kappa_value, lyapunov_dimension
from .ifs_core import (
    DEFAULT_WORD_BUDGET,
    BudgetExceeded,
    DiagonalIFS,
    WeightedIFS,
    bounding_box,
    lyapunov_exponents,
)
from .measures import (
    DiscreteMeasure,
    PartitionSpec,
    cond_entropy_with_projection,
    convolve,
    entropy,
    level,
    self_convolve,
)

# raster grids above this many cells are refused (two bits per cell)
DEFAULT_MAX_CELLS = 4 * 10**9
MC_CHUNK = 1 << 16
DEFAULT_WINDOW_START = 4


def _csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for row in rows:
        wr.writerow([f"{v:.9f}" if isinstance(v, float) else v for v in row])
    return buf.getvalue()


# ----------------------------------------------------------------------------
# measure approximations


def _merge_within(points: np.ndarray, tol: float) -> np.ndarray:
    """Snap each coordinate to the smallest value of its ``tol``-chain cluster."""
    out = points.copy()
    for j in range(points.shape[1]):
        col = points[:, j]
        order = np.argsort(col, kind="stable")
        sc = col[order]
        starts = np.concatenate([[True], np.diff(sc) > tol])
        rep = sc[starts][np.cumsum(starts) - 1]
        out[order, j] = rep
    return out


def _word_points(w: WeightedIFS, n: int, budget: int):
    """``φ_u(0)`` and ``p_u`` for ``u ∈ Λ^n``, lexicographic order."""
    ifs = w.ifs
    if ifs.size**n > budget:
        raise BudgetExceeded(f"{ifs.size}^{n} words exceed budget {budget}")
    slopes, offsets = ifs.slopes, ifs.offsets
    pts = np.zeros((1, ifs.d), dtype=slopes.dtype)
    if ifs.exact:
        pts[:] = Fraction(0)
    mass = np.ones(1)
    for _ in range(n):
        # prepend the letter i: φ_i(φ_u(0))
        pts = (slopes[:, None, :] * pts[None, :, :] + offsets[:, None, :]).reshape(-1, ifs.d)
        mass = (w.p[:, None] * mass[None, :]).ravel()
    return pts, mass


def exact_word_measure(
    w: WeightedIFS,
    n: int,
    budget: int = DEFAULT_WORD_BUDGET,
    merge_tol: float | None = None,
) -> DiscreteMeasure:
    """``Σ_{u ∈ Λ^n} p_u δ_{φ_u(0)}``.

    Atoms are merged when exactly equal (exact in rational mode). With
    ``merge_tol`` float atoms whose coordinates chain within the tolerance
    are merged as well.
    """
    if n < 1:
        raise ValueError("n must be positive")
    pts, mass = _word_points(w, n, budget)
    keep = mass > 0
    pts, mass = pts[keep], mass[keep]
    if merge_tol is not None and not w.ifs.exact:
        pts = _merge_within(pts, merge_tol)
    return DiscreteMeasure(pts, mass / mass.sum())


def sample_measure(
    w: WeightedIFS, n: int, count: int, seed: int = 0, chunk: int = MC_CHUNK
) -> DiscreteMeasure:
    """Empirical measure of ``count`` draws of ``φ_{ω|n}(0)``, ``ω ~ p^N``.

    Draws are split into chunks with independent streams spawned from
    ``seed``, so the result depends only on ``(seed, count, chunk)``.
    """
    if count < 1:
        raise ValueError("count must be positive")
    if n < 1:
        raise ValueError("n must be positive")
    r, a = w.ifs.float_arrays()
    nchunks = -(-count // chunk)
    streams = np.random.SeedSequence(seed).spawn(nchunks)
    parts = []
    for c, ss in enumerate(streams):
        size = min(chunk, count - c * chunk)
        rng = np.random.default_rng(ss)
        letters = rng.choice(w.size, size=(size, n), p=w.p)
        x = np.zeros((size, w.d))
        for k in range(n - 1, -1, -1):
            idx = letters[:, k]
            x = r[idx] * x + a[idx]
        parts.append(x)
    pts = np.concatenate(parts)
    M = np.asarray(bounding_box(w.ifs), dtype=float)
    slack = 1e-9 * (1.0 + M)
    if np.any(np.abs(pts) > M + slack):
        raise AssertionError("sampled point outside the bounding box")
    return DiscreteMeasure(pts, np.full(count, 1.0 / count))


# ----------------------------------------------------------------------------
# entropy curves


@dataclass
class EntropyCurve:
    rows: list = field(default_factory=list)  # (n, H, H/n)
    target: float | None = None
    mode: str = "exact"
    chi: list = field(default_factory=list)

    def to_csv(self) -> str:
        return _csv_text(["n", "H", "H_over_n"], self.rows)


def _curve_kappa(w: WeightedIFS) -> float:
    chi = np.sort(lyapunov_exponents(w), kind="stable")
    dim_L, _ = lyapunov_dimension(w)
    return kappa_value(chi, min(dim_L, w.d))


def entropy_curve(
    w: WeightedIFS,
    n_max: int,
    mode: str = "exact",
    *,
    depth: int | None = None,
    count: int = 10**5,
    seed: int = 0,
    miller_madow: bool = False,
    budget: int = DEFAULT_WORD_BUDGET,
) -> EntropyCurve:
    """Rows ``(n, H(proxy, E_n), H/n)`` for ``n = 1..n_max`` with κ as target.

    ``exact`` uses the word measure of depth ``n`` at row ``n``;
    ``montecarlo`` uses one sample of word depth ``depth`` (default
    ``2 n_max``) for every row.
    """
    if n_max < 1:
        raise ValueError("n_max must be positive")
    chi = lyapunov_exponents(w)
    curve = EntropyCurve(target=_curve_kappa(w), mode=mode, chi=chi.tolist())
    spec = PartitionSpec(tuple(chi), 0)
    if mode == "exact":
        if w.size**n_max > budget:
            raise BudgetExceeded(f"{w.size}^{n_max} words exceed budget {budget}")
        ifs = w.ifs.as_float()
        pts = np.zeros((1, w.d))
        mass = np.ones(1)
        for n in range(1, n_max + 1):
            pts = (ifs.slopes[:, None, :] * pts[None, :, :] + ifs.offsets[:, None, :]).reshape(-1, w.d)
            mass = (w.p[:, None] * mass[None, :]).ravel()
            keep = mass > 0
            m = DiscreteMeasure(pts[keep], mass[keep] / mass[keep].sum(), merge=False)
            H = entropy(m, spec.at(n))
            curve.rows.append((n, H, H / n))
    elif mode == "montecarlo":
        depth = 2 * n_max if depth is None else depth
        if depth < 2 * n_max:
            raise ValueError("montecarlo depth must be at least 2*n_max")
        m = sample_measure(w, depth, count, seed)
        for n in range(1, n_max + 1):
            part = spec.at(n)
            H = entropy(m, part)
            if miller_madow:
                occupied = len(np.unique(part.keys(m.points), axis=0))
                H += (occupied - 1) / (2 * count * math.log(2))
            curve.rows.append((n, H, H / n))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return curve


# ----------------------------------------------------------------------------
# covering counts


def _cover_count(ifs: DiagonalIFS, levels: Sequence[int], budget: int) -> int:
    """Cells of the level-``levels`` grid met by word images of the bounding box.

    Words are expanded until ``|r_{u,j}| <= 2^{-levels_j}`` in every coordinate.
    """
    r, a = ifs.float_arrays()
    M = np.asarray(bounding_box(ifs), dtype=float)
    d = ifs.d
    h = np.array([math.ldexp(1.0, -lv) for lv in levels])
    done_s, done_a = [], []
    S = np.ones((1, d))
    A = np.zeros((1, d))
    nodes = 0
    while len(S):
        # the root is always expanded
        nodes += len(S) * ifs.size
        if nodes > budget:
            raise BudgetExceeded(f"word cover exceeded {budget} nodes")
        A = (A[:, None, :] + S[:, None, :] * a[None, :, :]).reshape(-1, d)
        S = (S[:, None, :] * r[None, :, :]).reshape(-1, d)
        fin = np.all(np.abs(S) <= h, axis=1)
        done_s.append(S[fin])
        done_a.append(A[fin])
        S, A = S[~fin], A[~fin]
    S = np.concatenate(done_s)
    A = np.concatenate(done_a)
    half = np.abs(S) * M
    lo = np.floor((A - half) / h).astype(np.int64)
    hi = np.floor((A + half) / h).astype(np.int64)
    span = (hi - lo).max(axis=0) + 1
    base = lo.min(axis=0)
    width = hi.max(axis=0) - base + 1
    keys = []
    for offs in np.ndindex(*span):
        k = lo + np.asarray(offs)
        ok = np.all(k <= hi, axis=1)
        flat = np.zeros(int(ok.sum()), dtype=np.int64)
        for j in range(d):
            flat = flat * width[j] + (k[ok, j] - base[j])
        keys.append(flat)
    return int(len(np.unique(np.concatenate(keys))))


def _word_cover_lower_bound(ifs: DiagonalIFS, levels: Sequence[int]) -> float:
    """Nodes the word cover must visit at least: the full tree to the shallowest leaf."""
    r, _ = ifs.float_arrays()
    need = []
    for j, lv in enumerate(levels):
        rmax = float(np.abs(r[:, j]).max())
        need.append(math.ceil(lv / -math.log2(rmax)) if lv > 0 else 1)
    # every word needs at least this many letters
    depth = max(1, max(need)) if ifs.size > 0 else 1
    return float(ifs.size) ** depth


def box_count(
    ifs: DiagonalIFS,
    n: int,
    method: str = "auto",
    budget: int = DEFAULT_WORD_BUDGET,
    max_cells: int = DEFAULT_MAX_CELLS,
) -> int:
    """Number of level-``n`` dyadic cells covering the attractor.

    ``words`` covers each word image of the bounding box (words expanded
    until ``max_j |r_{u,j}| <= 2^-n``) by the cells it meets. ``raster``
    closes the set of fixed-point cells under the system acting on cells
    (see :mod:`diagaffine._raster`). ``auto`` takes the word cover whenever
    it fits the budget and falls back to the raster otherwise.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    levels = (n,) * ifs.d
    return _count(ifs, levels, method, budget, max_cells)


def _count(ifs, levels, method, budget, max_cells) -> int:
    if method not in ("auto", "words", "raster"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto" and _word_cover_lower_bound(ifs, levels) <= budget:
        try:
            return _cover_count(ifs, levels, budget)
        except BudgetExceeded:
            pass
    elif method == "words":
        return _cover_count(ifs, levels, budget)
    r, a = ifs.float_arrays()
    M = np.asarray(bounding_box(ifs), dtype=float)
    return _raster.raster_closure_count(r, a, M, levels, max_cells)


def count_method(ifs: DiagonalIFS, n: int, budget: int = DEFAULT_WORD_BUDGET) -> str:
    """The method ``auto`` would pick at level ``n`` (before any fallback)."""
    return "words" if _word_cover_lower_bound(ifs, (n,) * ifs.d) <= budget else "raster"


def nonconformal_count(
    w: WeightedIFS,
    n: float,
    method: str = "words",
    budget: int = DEFAULT_WORD_BUDGET,
    max_cells: int = DEFAULT_MAX_CELLS,
) -> int:
    """Number of ``E_n(χ)`` cells hit by the word cover."""
    chi = lyapunov_exponents(w)
    levels = tuple(level(c, n) for c in chi)
    return _count(w.ifs, levels, method, budget, max_cells)


@dataclass
class BoxCountSeries:
    rows: list = field(default_factory=list)  # (n, N_n)
    slope_estimate: float = float("nan")
    method: str = "auto"

    def to_csv(self) -> str:
        return _csv_text(["n", "count", "log2_count"], [(n, c, math.log2(c)) for n, c in self.rows])


@dataclass
class BoxDimFit:
    slope: float
    intercept: float
    residuals: list

    def __float__(self):
        return self.slope


def box_dim_fit(series: BoxCountSeries, window: tuple[int, int] | None = None) -> BoxDimFit:
    """Least-squares line through ``(n, log2 N_n)`` for ``n`` in ``window``."""
    if window is None:
        window = (DEFAULT_WINDOW_START, max(n for n, _ in series.rows))
    a, b = window
    pts = [(n, math.log2(c)) for n, c in series.rows if a <= n <= b]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 rows in window {window}, have {len(pts)}")
    x = np.array([p[0] for p in pts], dtype=float)
    y = np.array([p[1] for p in pts])
    slope, intercept = np.polyfit(x, y, 1)
    res = y - (slope * x + intercept)
    return BoxDimFit(float(slope), float(intercept), res.tolist())


def box_dim_estimate(series: BoxCountSeries, window: tuple[int, int] | None = None) -> float:
    return box_dim_fit(series, window).slope


def box_count_series(
    ifs: DiagonalIFS,
    levels: Sequence[int],
    method: str = "auto",
    budget: int = DEFAULT_WORD_BUDGET,
    max_cells: int = DEFAULT_MAX_CELLS,
) -> BoxCountSeries:
    series = BoxCountSeries(method=method)
    for n in levels:
        series.rows.append((int(n), box_count(ifs, n, method, budget, max_cells)))
    window_rows = [n for n, _ in series.rows if n >= DEFAULT_WINDOW_START]
    if len(window_rows) >= 3:
        series.slope_estimate = box_dim_estimate(series, (DEFAULT_WINDOW_START, max(window_rows)))
    return series


# ----------------------------------------------------------------------------
# exploratory experiments


@dataclass
class SliceReport:
    rows: list = field(default_factory=list)  # (j, q, h_q)
    fractions: list = field(default_factory=list)
    chi: list = field(default_factory=list)
    eps: float = 0.0

    def to_csv(self) -> str:
        return _csv_text(["j", "q", "h_q", "above"], [(j, q, h, int(h > self.chi[j] - self.eps)) for j, q, h in self.rows])


def slice_entropy_experiment(
    theta: DiscreteMeasure,
    chi: Sequence[float],
    k: int,
    mstep: int,
    n: int,
    eps: float,
    coords: Sequence[int] | None = None,
    lattice_level: int | Sequence[int] | None = None,
    budget: int = 10**7,
) -> SliceReport:
    """Fraction of levels ``q`` where the conditional slice entropy of ``θ^{*k}`` is near ``χ_j``.

    ``h_q = (1/m) H(θ^{*k}, E_{q+m} | E_q ∨ π_{[d]∖{j}}^{-1} E_{q+m})`` for
    ``q = 1..n``. No threshold is asserted.
    """
    conv = self_convolve(theta, k, budget=budget, lattice_level=lattice_level)
    coords = range(theta.d) if coords is None else coords
    rep = SliceReport(chi=list(map(float, chi)), eps=eps)
    fr = [0.0] * theta.d
    for j in coords:
        hits = 0
        for q in range(1, n + 1):
            h = cond_entropy_with_projection(conv, j, q, mstep, chi) / mstep
            rep.rows.append((j, q, h))
            hits += h > chi[j] - eps
        fr[j] = hits / n
    rep.fractions = fr
    return rep


@dataclass
class EntropyIncreaseReport:
    n: int
    kappa: float
    theta_rate: float
    proxy_rate: float
    convolved_rate: float

    @property
    def excess(self) -> float:
        return self.convolved_rate - self.kappa


def entropy_increase_experiment(
    w: WeightedIFS,
    theta: DiscreteMeasure,
    n: int,
    proxy_depth: int,
    budget: int = 10**7,
) -> EntropyIncreaseReport:
    """``(1/n) H(θ * μ_proxy, E_n) - κ`` with ``μ_proxy`` the word measure of depth ``proxy_depth``."""
    mu = exact_word_measure(w, proxy_depth, budget=budget).as_float()
    chi = lyapunov_exponents(w)
    spec = PartitionSpec(tuple(chi), n)
    conv = convolve(theta.as_float(), mu, budget=budget)
    return EntropyIncreaseReport(
        n=n,
        kappa=_curve_kappa(w),
        theta_rate=entropy(theta, spec) / n,
        proxy_rate=entropy(mu, spec) / n,
        convolved_rate=entropy(conv, spec) / n,
    )
