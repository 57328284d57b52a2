"""Shared fixtures and the acceptance summary printed at the end of a run."""
import math

import numpy as np
import pytest

from diagaffine import DiagonalIFS, WeightedIFS, example_system

GOLDEN = (math.sqrt(5) - 1) / 2

_acceptance: list[tuple[int, bool, str]] = []


def record(criterion: int, ok: bool, detail: str) -> None:
    _acceptance.append((criterion, bool(ok), detail))


@pytest.fixture
def report():
    return record


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for crit, ok, detail in sorted(_acceptance):
        terminalreporter.write_line(f"criterion {crit:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def halves():
    """t -> t/2 ± 1 with uniform weights."""
    return WeightedIFS(example_system([0.5]))


@pytest.fixture
def golden():
    return WeightedIFS(DiagonalIFS([[GOLDEN], [GOLDEN]], [[1.0], [-1.0]]))


@pytest.fixture
def carpet():
    return WeightedIFS(example_system([0.6, 0.3]))


def random_system(rng: np.random.Generator, d: int, k: int, signed: bool = True) -> DiagonalIFS:
    r = rng.uniform(0.05, 0.95, size=(k, d))
    if signed:
        r *= rng.choice([-1.0, 1.0], size=(k, d))
    a = rng.uniform(-1.0, 1.0, size=(k, d))
    return DiagonalIFS(r, a)


def random_measure(rng: np.random.Generator, d: int, atoms: int | None = None, scale: float = 2.0):
    from diagaffine.measures import DiscreteMeasure

    atoms = int(rng.integers(1, 40)) if atoms is None else atoms
    pts = rng.uniform(-scale, scale, size=(atoms, d))
    # some atoms on a coarse grid so that cells are shared
    snap = rng.random(atoms) < 0.3
    pts[snap] = np.round(pts[snap] * 4) / 4
    q = rng.random(atoms) + 0.01
    return DiscreteMeasure(pts, q / q.sum())


def random_partition(rng: np.random.Generator, d: int, chi, depth: int = 2):
    """A partition built from E_n's, projection pull-backs and joins."""
    from diagaffine.measures import Join, PartitionSpec, Pullback, Trivial

    kind = rng.integers(0, 4 if depth > 0 else 2)
    n = int(rng.integers(0, 7))
    if kind == 0:
        return PartitionSpec(chi, n)
    if kind == 1:
        J = [j for j in range(d) if rng.random() < 0.5]
        return Pullback(PartitionSpec(chi, n), J) if J or rng.random() < 0.3 else Trivial()
    if kind == 2:
        return Join(random_partition(rng, d, chi, depth - 1), random_partition(rng, d, chi, depth - 1))
    return PartitionSpec(chi, n)
