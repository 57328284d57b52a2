"""Affinity dimension, Lyapunov dimension and related functionals.

All logarithms are base 2.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .ifs_core import (
    DEFAULT_WORD_BUDGET,
    BudgetExceeded,
    DiagonalIFS,
    WeightedIFS,
    lyapunov_exponents,
)

MAX_PERM_DIM = 8
# relative slack when comparing pressure sums across permutations
_PERM_TIE_RTOL = 1e-12


def _permutations(d: int) -> np.ndarray:
    if d > MAX_PERM_DIM:
        raise ValueError(f"d = {d} is too large for permutation enumeration (max {MAX_PERM_DIM})")
    return np.array(list(itertools.permutations(range(d))), dtype=np.intp).reshape(-1, d)


def _log_phi(logs: np.ndarray, perms: np.ndarray, s: float) -> np.ndarray:
    """``log2 φ_σ^s(i)`` for every permutation (rows) and map (columns)."""
    nmaps, d = logs.shape
    if s >= d:
        return np.broadcast_to((s / d) * logs.sum(axis=1), (perms.shape[0], nmaps))
    m = int(math.floor(s))
    # logs[:, perms] has shape (nmaps, nperm, d)
    chosen = logs[:, perms]
    out = chosen[:, :, :m].sum(axis=2) + (s - m) * chosen[:, :, m]
    return out.T


def pressure(ifs: DiagonalIFS, s: float) -> tuple[float, tuple[int, ...]]:
    """``max_σ Σ_i φ_σ^s(i)`` and the lexicographically smallest maximizing σ."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    logs = -ifs.abs_log_slopes()
    perms = _permutations(ifs.d)
    sums = np.exp2(_log_phi(logs, perms, s)).sum(axis=1)
    best = sums.max()
    k = int(np.flatnonzero(sums >= best * (1 - _PERM_TIE_RTOL))[0])
    return float(best), tuple(int(v) for v in perms[k])


def affinity_dimension(ifs: DiagonalIFS, tol: float = 1e-12) -> float:
    """The unique ``s >= 0`` with ``pressure(ifs, s) == 1``, by bisection."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if ifs.size == 1:
        return 0.0
    lo, hi = 0.0, 1.0
    while pressure(ifs, hi)[0] >= 1.0:
        lo, hi = hi, 2 * hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pressure(ifs, mid)[0] >= 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def closed_form_example_dim(rbar: Sequence[float]) -> float:
    """Affinity dimension of ``x -> diag(rbar) x ± (1,...,1)`` in closed form."""
    r = [float(v) for v in rbar]
    if not r or any(not 0 < v < 1 for v in r) or any(a <= b for a, b in zip(r, r[1:])):
        raise ValueError("rbar must be strictly decreasing with entries in (0, 1)")
    d = len(r)
    m, prod = 0, 1.0
    for v in r:
        if prod * v >= 0.5:
            m += 1
            prod *= v
        else:
            break
    logs = [math.log(v) for v in r]
    if m < d:
        return m + (math.log(2) + sum(logs[:m])) / (-logs[m])
    return d * math.log(2) / (-sum(logs))


def _m_and_dim(chi_sorted: np.ndarray, H: float) -> tuple[float, int]:
    d = len(chi_sorted)
    csum = np.concatenate([[0.0], np.cumsum(chi_sorted)])
    m = int(np.flatnonzero(csum <= H).max())
    if m < d:
        return m + (H - csum[m]) / chi_sorted[m], m
    return d * H / csum[d], m


def lyapunov_dimension(w: WeightedIFS) -> tuple[float, int]:
    """``(dim_L(Φ, p), m(Φ, p))``.

    Exponents are sorted ascending with ties broken by coordinate index.
    """
    chi = np.sort(lyapunov_exponents(w), kind="stable")
    return _m_and_dim(chi, w.entropy())


def natural_weights(ifs: DiagonalIFS, tol: float = 1e-13) -> tuple[np.ndarray, tuple[int, ...], float]:
    """Weights ``p_i = φ_σ*^s*(i)`` at ``s* = dim_A``.

    Returns ``(p, σ*, s*)``; ``p`` is renormalised to remove the bisection
    residual (at most ``~tol`` in relative size).
    """
    s = affinity_dimension(ifs, tol=tol)
    _, perm = pressure(ifs, s)
    logs = -ifs.abs_log_slopes()
    p = np.exp2(_log_phi(logs, np.array([perm], dtype=np.intp), s)[0])
    return p / p.sum(), perm, s


def kappa_value(chi: Sequence[float], dim_mu: float) -> float:
    """``χ_d dim μ - Σ_{j<d}(χ_d - χ_j)`` for ascending ``chi``."""
    chi = np.asarray(chi, dtype=float)
    top = chi[-1]
    return float(top * dim_mu - (top - chi[:-1]).sum())


def lyapunov_max_profile(chis: Sequence[float], H: float) -> tuple[float, np.ndarray]:
    """Maximum of ``Σ y_k/χ_k`` over ``{0 <= y_k <= χ_k, Σ y_k <= H}`` and its maximizer."""
    chis = np.asarray(chis, dtype=float)
    if H < 0:
        raise ValueError("H must be nonnegative")
    if H >= chis.sum():
        raise ValueError("need H < sum(chis)")
    # fill the smallest exponents first: they pay the most per unit of entropy
    order = np.argsort(chis, kind="stable")
    c = chis[order]
    csum = np.concatenate([[0.0], np.cumsum(c)])
    m = int(np.flatnonzero(csum <= H).max())
    y = np.zeros_like(chis)
    y[order[:m]] = c[:m]
    y[order[m]] = H - csum[m]
    return float(m + y[order[m]] / c[m]), y


def iterate_system(
    w: WeightedIFS,
    n: int,
    weights: Sequence[float] | None = None,
    budget: int = DEFAULT_WORD_BUDGET,
) -> WeightedIFS:
    """The system ``{φ_u}_{u ∈ Λ^n}`` with product weights (or ``weights``).

    Words are ordered lexicographically.
    """
    if n < 1:
        raise ValueError("n must be positive")
    ifs = w.ifs
    if ifs.size**n > budget:
        raise BudgetExceeded(f"{ifs.size}^{n} maps exceed budget {budget}")
    slopes, offsets, p = ifs.slopes, ifs.offsets, np.asarray(w.p)
    for _ in range(n - 1):
        # prepend to each word u a letter i: φ_i ∘ φ_u
        slopes_new = (ifs.slopes[:, None, :] * slopes[None, :, :]).reshape(-1, ifs.d)
        offsets_new = (ifs.slopes[:, None, :] * offsets[None, :, :] + ifs.offsets[:, None, :]).reshape(-1, ifs.d)
        p = (w.p[:, None] * p[None, :]).reshape(-1)
        slopes, offsets = slopes_new, offsets_new
    new_ifs = DiagonalIFS(slopes, offsets, exact=ifs.exact)
    if weights is not None:
        return WeightedIFS(new_ifs, weights)
    return WeightedIFS(new_ifs, p / p.sum())


def clt_zero_sum_mass(p: Sequence[float], c: Sequence, n: int) -> float:
    """``p^{×n}{u : Σ_k c_{u_k} = 0}``, computed by exact convolution of the sums.

    Values ``c`` are converted to exact rationals so that zero sums are
    detected without rounding.
    """
    cs = [Fraction(v) if not isinstance(v, float) else Fraction(v) for v in c]
    dist = {Fraction(0): 1.0}
    for _ in range(n):
        nxt: dict = {}
        for x, q in dist.items():
            for ci, pi in zip(cs, p):
                if pi > 0:
                    key = x + ci
                    nxt[key] = nxt.get(key, 0.0) + q * pi
        dist = nxt
    return float(dist.get(Fraction(0), 0.0))


@dataclass
class DimensionReport:
    chi: list
    entropy_p: float
    dim_A: float
    dim_L: float
    m_phi_p: int
    kappa: float
    natural_weights: list
    maximizing_permutation: list
    predicted_dim_H: float = field(default=0.0)
    predicted_dim_mu: float = field(default=0.0)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def dimension_report(w: WeightedIFS, tol: float = 1e-12) -> DimensionReport:
    """Everything the dimension theory predicts for one weighted system."""
    chi = np.sort(lyapunov_exponents(w), kind="stable")
    dim_L, m = lyapunov_dimension(w)
    dim_A = affinity_dimension(w.ifs, tol=tol)
    p_nat, perm, _ = natural_weights(w.ifs)
    d = w.d
    return DimensionReport(
        chi=chi.tolist(),
        entropy_p=w.entropy(),
        dim_A=dim_A,
        dim_L=dim_L,
        m_phi_p=m,
        kappa=kappa_value(chi, min(dim_L, d)),
        natural_weights=p_nat.tolist(),
        maximizing_permutation=list(perm),
        predicted_dim_H=min(dim_A, d),
        predicted_dim_mu=min(dim_L, d),
    )
