# tests/test_fourier.py
"""
Tests for Fourier expansion, distance to linear functions and noise stability
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.core.exceptions import ArityError, DomainError, NotMultilinearError
from src.analysis import catalog
from src.analysis.fourier import (FourierExpansion, FunctionTable, basis_table, check_lemma_multilinear,
                                  check_low_degree_bound, check_resilience, degree_weights,
                                  distance_to_lin, expand, low_degree_correlation, low_degree_mass,
                                  parity_tree_bound, stability, subset_mask)
from src.analysis.product_space import FiniteDistribution, ProductSpace, joint_expectation

coefficient_vectors = st.lists(st.floats(-2.0, 2.0, allow_nan=False), min_size=8, max_size=8)
correlations = st.floats(0.0, 1.0, allow_nan=False)


def maj3_expansion():
    return expand(FunctionTable.from_callable(ProductSpace.uniform_cube(3), catalog.majority))


def exact_correlation(table: FunctionTable, rho) -> float:
    """Corr(f(X), f(Y)) by summation over the joint atoms"""
    rhos = np.broadcast_to(np.asarray(rho, dtype=float), (table.n,))
    coupled = ProductSpace(pairs=[
        ProductSpace.from_marginals([d], r).pairs[0] for d, r in zip(table.space.x_marginals, rhos)])
    centered = table.values - table.mean
    return joint_expectation(centered, centered, coupled) / table.variance


# ===============================================
# Majority of three
# ===============================================

def test_maj3_coefficients():
    F = maj3_expansion()
    for i in range(3):
        assert F.coefficient([i]) == pytest.approx(0.5)
    assert F.coefficient([0, 1, 2]) == pytest.approx(-0.5)
    assert F.nonzero(1e-12).keys() == {1, 2, 4, 7}


def test_maj3_stability_and_distance():
    F = maj3_expansion()
    assert stability(F, 0.5) == pytest.approx(0.40625, abs=1e-12)
    assert distance_to_lin(F) == pytest.approx(0.25, abs=1e-12)
    report = check_lemma_multilinear(F, 0.5)
    assert report.bound == pytest.approx(0.4375, abs=1e-12)
    assert report.holds
    assert report.floor is None   # degree three


def test_maj3_low_degree_bound():
    report = check_low_degree_bound(maj3_expansion(), 1, 0.5)
    assert report.M == pytest.approx(math.sqrt(0.75), abs=1e-12)
    assert report.bound == pytest.approx(math.sqrt(2.0) * math.sqrt(0.40625), abs=1e-12)
    assert report.holds and report.slack > 0


# ===============================================
# Benchmarks with known spectra
# ===============================================

@pytest.mark.parametrize("n", [2, 3, 5])
def test_parity_stability_is_rho_to_the_n(n):
    F = expand(FunctionTable.from_callable(ProductSpace.uniform_cube(n), catalog.parity))
    assert distance_to_lin(F) == pytest.approx(1.0)
    assert stability(F, 0.7) == pytest.approx(0.7 ** n, abs=1e-12)


def test_dictator_is_linear():
    F = expand(FunctionTable.from_callable(ProductSpace.uniform_cube(4), catalog.dictator))
    assert distance_to_lin(F) == 0.0
    assert stability(F, 0.3) == pytest.approx(0.3)


def test_constant_function_is_degenerate():
    F = expand(FunctionTable(ProductSpace.uniform_cube(3), np.full(8, 2.5)))
    assert F.mean == pytest.approx(2.5)
    assert stability(F, 0.5) == 0.0
    assert distance_to_lin(F) == 0.0
    assert low_degree_correlation(F, 1) == 0.0


def test_tribes_mean():
    table = FunctionTable.from_callable(ProductSpace.uniform_cube(4), lambda x: catalog.tribes(x, 2))
    # P(some pair all +1) = 1 - (3/4)^2
    assert table.mean == pytest.approx(2 * (1 - 0.75 ** 2) - 1)


def test_parity_tree_bound():
    report = parity_tree_bound(3, 0.9)
    assert report["depth"] == 1
    assert report["exact"] == pytest.approx(0.729)
    assert report["tree_bound"] == pytest.approx(0.81)
    assert report["exact"] <= report["tree_bound"]


def test_resilience():
    parity3 = expand(FunctionTable.from_callable(ProductSpace.uniform_cube(3), catalog.parity))
    assert check_resilience(parity3, 2)
    assert not check_resilience(maj3_expansion(), 1)


# ===============================================
# General product spaces
# ===============================================

def test_expansion_reconstructs_and_satisfies_parseval(rng):
    dists = [FiniteDistribution(support=[0.0, 1.0], probs=[0.3, 0.7]),
             FiniteDistribution(support=[-2.0, 3.0], probs=[0.6, 0.4]),
             FiniteDistribution(support=[1.0, 4.0], probs=[0.5, 0.5])]
    space = ProductSpace.from_marginals(dists)
    table = FunctionTable(space, rng.normal(size=8))
    F = expand(table)
    assert np.allclose(F.to_table().values, table.values, atol=1e-12)
    assert F.parseval_error(table) < 1e-12
    assert F.mean == pytest.approx(table.mean)
    assert F.variance == pytest.approx(table.variance)
    points = space.x_points()
    assert np.allclose(F.evaluate(points), table.values, atol=1e-12)


def test_basis_functions_are_orthonormal():
    dists = [FiniteDistribution(support=[0.0, 1.0], probs=[0.3, 0.7]),
             FiniteDistribution(support=[-2.0, 3.0], probs=[0.6, 0.4])]
    space = ProductSpace.from_marginals(dists)
    probs = space.x_probabilities()
    subsets = [[], [0], [1], [0, 1]]
    for a in subsets:
        for b in subsets:
            inner = probs @ (basis_table(space, a).values * basis_table(space, b).values)
            assert inner == pytest.approx(1.0 if a == b else 0.0, abs=1e-12)


def test_three_point_support_multilinear_function():
    dist = FiniteDistribution.uniform([0.0, 1.0, 2.0])
    space = ProductSpace.from_marginals([dist, FiniteDistribution.fair_bit()])
    table = FunctionTable.from_callable(space, lambda x: 2.0 * x[:, 0] * x[:, 1] + 1.0)
    F = expand(table)
    assert F.coefficient([0, 1]) == pytest.approx(2.0 * math.sqrt(2.0 / 3.0))
    assert F.coefficient([1]) == pytest.approx(2.0)
    assert distance_to_lin(F) == pytest.approx(F.coefficient([0, 1]) ** 2 / F.variance)


def test_non_multilinear_table_is_rejected():
    space = ProductSpace.from_marginals([FiniteDistribution.uniform([0.0, 1.0, 2.0])])
    table = FunctionTable.from_callable(space, lambda x: x[:, 0] ** 2)
    with pytest.raises(NotMultilinearError) as excinfo:
        expand(table)
    assert excinfo.value.residual > 1e-6


def test_stability_matches_joint_summation(rng):
    dists = [FiniteDistribution(support=[0.0, 1.0], probs=[0.3, 0.7]),
             FiniteDistribution(support=[-2.0, 3.0], probs=[0.6, 0.4]),
             FiniteDistribution(support=[1.0, 4.0], probs=[0.5, 0.5])]
    table = FunctionTable(ProductSpace.from_marginals(dists), rng.normal(size=8))
    F = expand(table)
    assert stability(F, 0.6) == pytest.approx(exact_correlation(table, 0.6), abs=1e-12)
    rhos = [0.2, 0.9, 0.5]
    assert stability(F, rhos) == pytest.approx(exact_correlation(table, rhos), abs=1e-12)


def test_heterogeneous_rho_bound_uses_largest():
    F = maj3_expansion()
    report = check_lemma_multilinear(F, [0.2, 0.5, 0.4])
    assert report.rho == 0.5
    assert report.floor is None
    assert report.stability < stability(F, 0.5)
    assert report.holds


def test_argument_checks():
    F = maj3_expansion()
    with pytest.raises(ArityError):
        stability(F, [0.5, 0.5])
    with pytest.raises(DomainError):
        low_degree_correlation(F, 0)
    with pytest.raises(DomainError):
        check_low_degree_bound(F, 1, 1.0)
    with pytest.raises(ArityError):
        FunctionTable(ProductSpace.uniform_cube(2), np.zeros(3))


def test_sparse_coefficients():
    space = ProductSpace.uniform_cube(3)
    F = FourierExpansion.from_coefficients(space, {subset_mask([0]): 1.0, subset_mask([1, 2]): 2.0})
    assert degree_weights(F).tolist() == pytest.approx([0.0, 1.0, 4.0, 0.0])
    assert low_degree_mass(F, 1) == pytest.approx(1.0)
    assert low_degree_mass(F, 2) == pytest.approx(math.sqrt(5.0))
    assert distance_to_lin(F) == pytest.approx(0.8)


# ===============================================
# Randomised bounds
# ===============================================

@settings(max_examples=100, deadline=None)
@given(coefficient_vectors, correlations)
def test_multilinear_lemma_holds(coeffs, rho):
    F = FourierExpansion.from_coefficients(ProductSpace.uniform_cube(3), dict(enumerate(coeffs)))
    report = check_lemma_multilinear(F, rho)
    assert report.holds
    assert 0.0 <= report.stability <= 1.0 + 1e-12


@settings(max_examples=100, deadline=None)
@given(coefficient_vectors, st.floats(0.05, 0.95), st.integers(1, 3))
def test_low_degree_bound_holds(coeffs, rho, D):
    F = FourierExpansion.from_coefficients(ProductSpace.uniform_cube(3), dict(enumerate(coeffs)))
    assert check_low_degree_bound(F, D, rho).holds


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-3.0, 3.0, allow_nan=False), min_size=4, max_size=4), correlations)
def test_degree_two_functions_meet_the_floor(coeffs, rho):
    F = FourierExpansion.from_coefficients(ProductSpace.uniform_cube(2), dict(enumerate(coeffs)))
    report = check_lemma_multilinear(F, rho)
    assert report.floor is not None
    if F.variance > 1e-9:
        assert report.stability >= report.floor - 1e-9


def test_lemma_on_random_mixed_supports(rng):
    for trial in range(200):
        n = int(rng.integers(1, 5))
        dists = []
        for _ in range(n):
            size = int(rng.integers(2, 4))
            support = np.sort(rng.choice(np.arange(-4, 5), size=size, replace=False)).astype(float)
            probs = rng.random(size) + 0.1
            dists.append(FiniteDistribution(support=support.tolist(), probs=(probs / probs.sum()).tolist()))
        space = ProductSpace.from_marginals(dists)
        F = FourierExpansion.from_coefficients(space, dict(enumerate(rng.normal(size=1 << n))))
        table = F.to_table()
        for rho in (0.0, 0.25, 0.5, 0.75, 1.0):
            report = check_lemma_multilinear(F, rho)
            assert report.holds, (trial, rho)
            assert report.stability == pytest.approx(exact_correlation(table, rho), abs=1e-9)
        for D in (1, 2):
            assert check_low_degree_bound(F, D, 0.5).holds, trial


def test_dictator_low_degree_bound_is_tight():
    F = expand(FunctionTable.from_callable(ProductSpace.uniform_cube(3), catalog.dictator))
    report = check_low_degree_bound(F, 1, 0.5)
    assert report.slack == pytest.approx(0.0, abs=1e-9)
