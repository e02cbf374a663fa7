# tests/test_efron_stein.py
"""
Tests for the Efron-Stein decomposition and Markov contraction
"""

import numpy as np
import pytest

from src.core.config import ENUMERATION_CONFIG
from src.core.exceptions import CapacityError, DomainError
from src.analysis import catalog
from src.analysis.efron_stein import decompose, es_degree_mass, markov_contract_check
from src.analysis.fourier import FourierExpansion, FunctionTable, basis_table, expand
from src.analysis.product_space import FiniteDistribution, ProductSpace


def test_random_table_satisfies_invariants(mixed_space, rng):
    table = FunctionTable(mixed_space, rng.normal(size=mixed_space.x_states))
    decomposition = decompose(table)
    errors = decomposition.check(table)
    assert set(errors) == {"reconstruction", "orthogonality", "conditional_vanishing", "slice_constancy"}
    assert max(errors.values()) < 1e-9
    assert decomposition.variance == pytest.approx(table.variance, abs=1e-12)
    assert decomposition.components[0] == pytest.approx(np.full(mixed_space.x_states, table.mean))


def test_cube_components_match_fourier_weights():
    table = FunctionTable.from_callable(ProductSpace.uniform_cube(3), catalog.majority)
    norms = decompose(table).norms_sq()
    coefficients = expand(table).coeffs
    assert norms == pytest.approx(coefficients ** 2, abs=1e-12)


def test_product_on_three_point_grid():
    dist = FiniteDistribution.uniform([-1.0, 0.0, 1.0])
    space = ProductSpace.from_marginals([dist, dist])
    table = FunctionTable.from_callable(space, lambda x: x[:, 0] * x[:, 1])
    norms = decompose(table).norms_sq()
    assert norms[0] == pytest.approx(0.0, abs=1e-15)
    assert norms[1] == pytest.approx(0.0, abs=1e-15)
    assert norms[2] == pytest.approx(0.0, abs=1e-15)
    assert norms[3] == pytest.approx(4.0 / 9.0)


def test_degree_mass():
    table = FunctionTable.from_callable(ProductSpace.uniform_cube(3), catalog.majority)
    decomposition = decompose(table)
    assert es_degree_mass(decomposition, 0) == 0.0
    assert es_degree_mass(decomposition, 1) == pytest.approx(0.75)
    assert es_degree_mass(decomposition, 3) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        es_degree_mass(decomposition, -1)


def test_constant_function_has_no_mass(cube3):
    decomposition = decompose(FunctionTable(cube3, np.full(8, 4.0)))
    assert decomposition.variance == 0.0
    assert es_degree_mass(decomposition, 3) == 0.0


def test_export_shape(cube3, rng):
    decomposition = decompose(FunctionTable(cube3, rng.normal(size=8)))
    compact = decomposition.export()
    assert len(compact) == 8 and set(compact["5"]) == {"norm_sq"}
    full = decomposition.export(full=True)
    assert len(full["5"]["table"]) == 8


def test_markov_contraction_on_mixed_space(mixed_space, rng):
    decomposition = decompose(FunctionTable(mixed_space, rng.normal(size=mixed_space.x_states)))
    report = markov_contract_check(decomposition, mixed_space)
    assert report.holds
    assert report.commutation_error < 1e-9
    assert len(report.entries) == 8
    full = report.entries[7]
    assert full.factor == pytest.approx(0.6 ** 3, abs=1e-9)


def test_markov_contraction_on_exchangeable_space(symmetric_space_factory, rng):
    space = symmetric_space_factory(rng, 3)
    decomposition = decompose(FunctionTable(space, rng.normal(size=space.x_states)))
    report = markov_contract_check(decomposition, space)
    assert report.holds
    assert report.commutation_error < 1e-9
    assert all(entry.contracted_norm <= entry.norm + 1e-12 for entry in report.entries)


def test_markov_contraction_rejects_other_supports(mixed_space, cube3, rng):
    decomposition = decompose(FunctionTable(cube3, rng.normal(size=8)))
    with pytest.raises(DomainError):
        markov_contract_check(decomposition, mixed_space)


def test_coordinate_cap(monkeypatch, cube3):
    monkeypatch.setitem(ENUMERATION_CONFIG, "max_es_coordinates", 2)
    with pytest.raises(CapacityError):
        decompose(FunctionTable(cube3, np.zeros(8)))


def test_multilinear_components_are_fourier_terms(rng):
    dists = [FiniteDistribution(support=[0.0, 1.0], probs=[0.3, 0.7]),
             FiniteDistribution(support=[-1.0, 0.5, 2.0], probs=[0.2, 0.5, 0.3]),
             FiniteDistribution(support=[1.0, 4.0], probs=[0.5, 0.5])]
    space = ProductSpace.from_marginals(dists)
    F = FourierExpansion.from_coefficients(space, dict(enumerate(rng.normal(size=8))))
    decomposition = decompose(F.to_table())
    for mask in range(8):
        subset = [i for i in range(3) if mask >> i & 1]
        expected = F[mask] * basis_table(space, subset).values
        assert np.max(np.abs(decomposition.components[mask] - expected)) < 1e-9


def test_permutation_equivariance(mixed_space, rng):
    table = FunctionTable(mixed_space, rng.normal(size=mixed_space.x_states))
    perm = [2, 0, 1]
    permuted_space = mixed_space.permuted(perm)
    # coordinate i of the permuted grid is coordinate perm[i] of the original
    grid = np.transpose(table.grid(), perm)
    permuted = FunctionTable(permuted_space, grid.ravel(order='F'))

    original = decompose(table)
    moved = decompose(permuted)
    for mask in range(8):
        new_mask = sum(1 << i for i in range(3) if mask >> perm[i] & 1)
        expected = np.transpose(original.components[mask].reshape(mixed_space.x_shape, order='F'), perm)
        assert np.max(np.abs(moved.components[new_mask] - expected.ravel(order='F'))) < 1e-10


def _random_mixed_space(rng):
    dists = []
    for _ in range(3):
        size = int(rng.integers(2, 4))
        probs = rng.random(size) + 0.05
        support = np.sort(rng.choice(np.arange(-6, 7), size=size, replace=False)).astype(float)
        dists.append(FiniteDistribution(support=support.tolist(), probs=(probs / probs.sum()).tolist()))
    return ProductSpace.from_marginals(dists, float(rng.random()))


def test_invariants_on_random_mixed_spaces(rng):
    for trial in range(50):
        space = _random_mixed_space(rng)
        table = FunctionTable(space, rng.normal(size=space.x_states))
        decomposition = decompose(table)
        assert max(decomposition.check(table).values()) < 1e-9, trial
        assert decomposition.variance == pytest.approx(table.variance, abs=1e-9), trial


def test_decomposition_is_linear(rng):
    for _ in range(10):
        space = _random_mixed_space(rng)
        f = rng.normal(size=space.x_states)
        g = rng.normal(size=space.x_states)
        a, b = rng.normal(size=2)
        combined = decompose(FunctionTable(space, a * f + b * g))
        first = decompose(FunctionTable(space, f))
        second = decompose(FunctionTable(space, g))
        for mask in range(8):
            expected = a * first.components[mask] + b * second.components[mask]
            assert np.max(np.abs(combined.components[mask] - expected)) < 1e-10
