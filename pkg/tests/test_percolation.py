# tests/test_percolation.py
"""
Tests for the triangular-lattice crossing event
"""

import numpy as np
import pytest

from src.core.config import MONTE_CARLO_CONFIG
from src.core.exceptions import ArityError, CapacityError, DomainError
from src.analysis.percolation import (TriangularGrid, UnionFind, crossing, crossing_batch,
                                      crossing_probability, crossing_stability, crossing_table,
                                      exact_spectrum_small, low_degree_trend)


# ===============================================
# Lattice
# ===============================================

def test_small_grid_neighbours():
    grid = TriangularGrid.build(2)
    assert sorted(grid.neighbors_of(0).tolist()) == [1, 2]
    assert sorted(grid.neighbors_of(1).tolist()) == [0, 2, 3]
    assert [grid.degree(s) for s in range(4)] == [2, 3, 3, 2]
    assert grid.left_boundary.tolist() == [0, 2]
    assert grid.right_boundary.tolist() == [1, 3]


@pytest.mark.parametrize("n, max_degree", [(1, 0), (2, 3), (3, 6), (6, 6)])
def test_grid_is_symmetric(n, max_degree):
    grid = TriangularGrid.build(n)
    assert grid.is_symmetric()
    assert max(grid.degree(s) for s in range(grid.sites)) == max_degree


def test_grid_rejects_empty_side():
    with pytest.raises(DomainError):
        TriangularGrid.build(0)


def test_union_find():
    uf = UnionFind(5)
    assert uf.unite(0, 1)
    assert uf.unite(3, 4)
    assert not uf.unite(1, 0)
    assert uf.find(0) == uf.find(1)
    assert uf.find(1) != uf.find(3)


# ===============================================
# Crossing
# ===============================================

@pytest.mark.parametrize("config, expected", [
    ([1, 1, -1, -1], 1),      # top row
    ([1, -1, -1, 1], -1),     # corners are not adjacent
    ([-1, 1, 1, -1], 1),      # anti-diagonal edge
    ([-1, -1, -1, -1], -1),
])
def test_crossing_on_two_by_two(config, expected):
    assert crossing(TriangularGrid.build(2), config) == expected


def test_single_site_crosses_when_open():
    grid = TriangularGrid.build(1)
    assert crossing(grid, [1]) == 1
    assert crossing(grid, [-1]) == -1


def test_batch_kernel_agrees_with_union_find(rng):
    grid = TriangularGrid.build(5)
    configs = np.where(rng.random((300, grid.sites)) < 0.5, 1, -1)
    batch = crossing_batch(grid, configs)
    assert batch.tolist() == [crossing(grid, c) for c in configs]


def test_crossing_rejects_wrong_length():
    with pytest.raises(ArityError):
        crossing(TriangularGrid.build(2), [1, 1, 1])


def _dfs_crossing(grid, open_sites):
    """Reference search from the open left column"""
    stack = [int(s) for s in grid.left_boundary if open_sites[s]]
    seen = set(stack)
    right = set(grid.right_boundary.tolist())
    while stack:
        site = stack.pop()
        if site in right:
            return 1
        for other in grid.neighbors_of(site).tolist():
            if open_sites[other] and other not in seen:
                seen.add(other)
                stack.append(other)
    return -1


@pytest.mark.parametrize("n", [2, 3])
def test_crossing_table_matches_search(n):
    grid = TriangularGrid.build(n)
    table = crossing_table(grid)
    for index in range(1 << grid.sites):
        open_sites = [(index >> i) & 1 == 1 for i in range(grid.sites)]
        assert table.values[index] == _dfs_crossing(grid, open_sites), index


def test_opening_a_site_never_breaks_a_crossing(rng):
    grid = TriangularGrid.build(5)
    for _ in range(300):
        config = np.where(rng.random(grid.sites) < 0.5, 1, -1)
        closed = np.flatnonzero(config < 0)
        if closed.size == 0:
            continue
        opened = config.copy()
        opened[rng.choice(closed)] = 1
        assert crossing(grid, opened) >= crossing(grid, config)


def test_open_left_column_alone_does_not_cross():
    assert crossing(TriangularGrid.build(2), [1, -1, 1, -1]) == -1


# ===============================================
# Exact spectra
# ===============================================

@pytest.mark.parametrize("n", [2, 3, 4])
def test_exact_crossing_is_balanced(n):
    grid = TriangularGrid.build(n)
    profile = exact_spectrum_small(grid)
    assert profile.mean == pytest.approx(0.0, abs=1e-12)
    assert profile.variance == pytest.approx(1.0, abs=1e-12)
    assert sum(profile.weights) == pytest.approx(1.0, abs=1e-12)
    assert profile.cumulative[0] == 0.0
    assert profile.normalized_cumulative[-1] == pytest.approx(1.0, abs=1e-12)
    assert len(profile.weights) == grid.sites + 1


def test_crossing_table_matches_direct_evaluation():
    grid = TriangularGrid.build(2)
    table = crossing_table(grid)
    # site 0 and site 1 open: index 0b0011
    assert table.values[3] == 1.0
    assert table.values[0b1001] == -1.0


def test_exact_spectrum_capacity():
    with pytest.raises(CapacityError):
        exact_spectrum_small(TriangularGrid.build(5))


def test_low_degree_trend_rows():
    profiles = [exact_spectrum_small(TriangularGrid.build(n)) for n in (3, 2)]
    rows = low_degree_trend(profiles, 2)
    assert [row["n"] for row in rows] == [2, 3]
    for row in rows:
        assert 0.0 <= row["normalized_mass"] <= 1.0 + 1e-12
        assert row["ratio"] == pytest.approx(row["normalized_mass"] / row["reference"])
    with pytest.raises(DomainError):
        low_degree_trend(profiles, 0)


def test_low_degree_mass_grows_to_variance_on_three_by_three():
    profile = exact_spectrum_small(TriangularGrid.build(3))
    cumulative = profile.cumulative
    assert all(b >= a - 1e-15 for a, b in zip(cumulative, cumulative[1:]))
    assert cumulative[1] < cumulative[2] < profile.variance


def test_normalized_degree_one_mass_shrinks_with_side():
    three = exact_spectrum_small(TriangularGrid.build(3))
    four = exact_spectrum_small(TriangularGrid.build(4))
    assert four.normalized_cumulative[1] < three.normalized_cumulative[1]


# ===============================================
# Monte Carlo
# ===============================================

def test_full_correlation_is_one():
    estimate = crossing_stability(TriangularGrid.build(4), 1.0, seed=2, samples=500)
    assert estimate.estimate == 1.0


def test_crossing_probability_near_half():
    estimate = crossing_probability(TriangularGrid.build(6), 0.5, seed=9, samples=40000)
    assert estimate.covers(0.5, sigmas=4.0)


@pytest.mark.parametrize("p, expected", [(0.0, 0.0), (1.0, 1.0)])
def test_crossing_probability_at_extremes(p, expected):
    assert crossing_probability(TriangularGrid.build(3), p, seed=1, samples=200).estimate == expected


def test_stability_between_zero_and_one_at_half():
    grid = TriangularGrid.build(4)
    low = crossing_stability(grid, 0.2, seed=4, samples=20000)
    high = crossing_stability(grid, 0.9, seed=4, samples=20000)
    assert low.estimate < high.estimate
    assert -0.05 < low.estimate < 1.0


def test_monte_carlo_ignores_worker_count(monkeypatch):
    monkeypatch.setitem(MONTE_CARLO_CONFIG, "block_size", 500)
    grid = TriangularGrid.build(5)
    serial = crossing_stability(grid, 0.7, seed=13, samples=3000, workers=1)
    threaded = crossing_stability(grid, 0.7, seed=13, samples=3000, workers=3)
    assert serial.estimate == threaded.estimate


@pytest.mark.parametrize("kwargs", [{"rho": 1.5}, {"rho": 0.5, "samples": 1}])
def test_stability_argument_checks(kwargs):
    args = {"seed": 0, "samples": 100, **kwargs}
    with pytest.raises(DomainError):
        crossing_stability(TriangularGrid.build(2), **args)


@pytest.mark.parametrize("n", [8, 16, pytest.param(32, marks=pytest.mark.slow)])
def test_critical_crossing_probability_is_half(n):
    estimate = crossing_probability(TriangularGrid.build(n), 0.5, seed=31, samples=100000)
    assert estimate.covers(0.5, sigmas=3.0)


def test_independent_copies_give_squared_bias():
    grid = TriangularGrid.build(3)
    p = 0.6
    table = crossing_table(grid)
    opened = ((np.arange(table.values.size)[:, None] >> np.arange(grid.sites)) & 1).sum(axis=1)
    weights = p ** opened * (1.0 - p) ** (grid.sites - opened)
    crossing_prob = float(weights @ (table.values > 0))
    estimate = crossing_stability(grid, 0.0, seed=6, samples=200000, p=p)
    assert estimate.covers((2.0 * crossing_prob - 1.0) ** 2, sigmas=4.0)


@pytest.mark.slow
def test_stability_decreases_with_grid_side():
    estimates = [crossing_stability(TriangularGrid.build(n), 0.9, seed=41, samples=10 ** 6)
                 for n in (8, 16, 32)]
    for larger, smaller in zip(estimates, estimates[1:]):
        gap = larger.estimate - smaller.estimate
        assert gap > 3.0 * np.hypot(larger.std_error, smaller.std_error)
