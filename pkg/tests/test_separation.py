import math
from fractions import Fraction as F

import numpy as np
import pytest

from diagaffine import AffineMap1, BudgetExceeded, DiagonalIFS, WeightedIFS, compose, example_system, iterate_system
from diagaffine.separation import (
    exact_overlap_search,
    min_level_distance,
    pm10_root_check,
    pm_one_template,
    rho,
    separation_profile,
)

from conftest import GOLDEN


def real_root(coeffs):
    roots = [z.real for z in np.roots(coeffs) if abs(z.imag) < 1e-12 and 0 < z.real < 1]
    assert len(roots) == 1
    return roots[0]


CUBIC = real_root([1, 0, 1, -1])  # x^3 + x - 1
TRIB = real_root([1, 1, 1, -1])  # x^3 + x^2 + x - 1


def test_rho_examples():
    assert rho(AffineMap1(0.5, 1), AffineMap1(0.5, -1)) == 2
    assert rho(AffineMap1(0.5, 1), AffineMap1(0.4, 1)) == math.inf
    psi = AffineMap1(0.3, 0.7)
    assert rho(psi, psi) == 0
    a, b = AffineMap1(F(1, 3), F(1, 2)), AffineMap1(F(1, 3), F(-1, 5))
    assert rho(a, b) == rho(b, a) == F(7, 10)


def test_no_overlaps_for_halves():
    assert exact_overlap_search(example_system([F(1, 2)]), 12) is None
    assert exact_overlap_search(example_system([0.5]), 12) is None


def test_golden_overlap():
    hit = exact_overlap_search(example_system([GOLDEN]), 3)
    assert hit is not None
    u1, u2, length = hit
    assert length == 3 and {u1, u2} == {(1, 0, 0), (0, 1, 1)}


def test_overlap_witness_recomposes():
    ifs = example_system([GOLDEN])
    u1, u2, _ = exact_overlap_search(ifs, 5)
    a, b = compose(ifs, u1).coords[0], compose(ifs, u2).coords[0]
    assert abs(a.slope - b.slope) < 1e-12 and abs(a.offset - b.offset) < 1e-12


def test_exact_overlap_with_rationals():
    # 1/2 ∘ shifts: t/2 and t/2 + 1/2 and t/2 + 1 overlap (φ_0 φ_2 = φ_1 φ_0)
    ifs = DiagonalIFS([[F(1, 2)]] * 3, [[0], [F(1, 2)], [1]])
    u1, u2, L = exact_overlap_search(ifs, 3)
    assert L == 2
    assert compose(ifs, u1) == compose(ifs, u2)


def test_single_map_has_no_overlap():
    assert exact_overlap_search(DiagonalIFS([[0.5]], [[1.0]]), 10) is None


def test_overlap_budget():
    with pytest.raises(BudgetExceeded):
        exact_overlap_search(example_system([0.5]), 30)


def test_overlap_requires_line(carpet):
    with pytest.raises(ValueError):
        exact_overlap_search(carpet.ifs, 3)


def test_separation_profile_examples():
    prof = separation_profile(example_system([0.5]), [4])
    assert prof.min_rho[0] == pytest.approx(0.25)
    assert prof.c_values[0] == pytest.approx(0.25**0.25)
    assert prof.c_values[0] == pytest.approx(0.707107, abs=1e-6)
    assert separation_profile(example_system([GOLDEN]), [3]).c_values == [0.0]
    distinct = DiagonalIFS([[0.5], [0.4]], [[1.0], [-1.0]])
    assert separation_profile(distinct, [1]).c_values == [math.inf]


def test_min_level_distance_by_brute_force():
    ifs = DiagonalIFS([[0.5], [0.5], [0.3]], [[1.0], [-0.7], [0.2]])
    import itertools

    best = math.inf
    words = list(itertools.product(range(3), repeat=3))
    maps = [compose(ifs, u).coords[0] for u in words]
    for i in range(len(maps)):
        for j in range(i + 1, len(maps)):
            if maps[i].slope == maps[j].slope:
                best = min(best, abs(maps[i].offset - maps[j].offset))
    assert min_level_distance(ifs, 3) == pytest.approx(best, abs=1e-15)


def test_pm10_examples():
    assert pm10_root_check(F(1, 2), 12) is None
    assert pm10_root_check(0.5, 12) is None
    assert pm10_root_check(GOLDEN, 8) == (-1, 1, 1)
    assert pm10_root_check(CUBIC, 8) == (-1, 1, 0, 1)
    # 0.543689 is the root of x^3 + x^2 + x - 1
    assert TRIB == pytest.approx(0.543689, abs=1e-6)
    assert pm10_root_check(TRIB, 8) == (-1, 1, 1, 1)


def test_pm10_meet_in_the_middle():
    # a degree-18 polynomial with a root in (0, 1); brute force handles degree <= 16
    c = [-1] + [0] * 16 + [1, 1]
    r = real_root(c[::-1])
    wit = pm10_root_check(r, 18)
    assert wit is not None and len(wit) == 19
    assert abs(np.polyval(wit[::-1], r)) < 1e-10


def test_pm10_guards():
    with pytest.raises(BudgetExceeded):
        pm10_root_check(0.5, 31)
    with pytest.raises(ValueError):
        pm10_root_check(1.5, 3)


@pytest.mark.parametrize("r", [GOLDEN, CUBIC, TRIB])
def test_root_witness_gives_overlap(r):
    wit = pm10_root_check(r, 8)
    degree = len(wit) - 1
    hit = exact_overlap_search(example_system([r]), degree + 1)
    assert hit is not None and hit[2] <= degree + 1


def test_template_detection(carpet):
    assert pm_one_template(carpet.ifs, 0) == 0.6
    assert pm_one_template(DiagonalIFS([[0.5], [0.4]], [[1], [-1]]), 0) is None


def test_iterated_system_inherits_no_overlaps(halves):
    m, n = 3, 2
    assert exact_overlap_search(halves.ifs, m * n) is None
    it = iterate_system(halves, n).ifs
    assert exact_overlap_search(it, m) is None
