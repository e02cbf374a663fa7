# ===============================================
# src/analysis/__init__.py
# ===============================================
"""
Analysis modules for hierstab
Product spaces, Fourier and Efron-Stein expansions, maximal correlation,
hierarchies and the percolation crossing experiments
"""

from .product_space import (
    FiniteDistribution, CorrelatedPair, ProductSpace, make_resampling_coupling,
    build_space, enumerate_joint, joint_expectation, sample
)
from .fourier import (
    FunctionTable, FourierExpansion, expand, distance_to_lin, stability,
    low_degree_mass, low_degree_correlation, check_low_degree_bound, check_lemma_multilinear
)
from .maxcorr import (
    MarkovOperator, maximal_correlation, induced_pair, estimate_induced_pair,
    non_separability, check_nonseparable_lemma
)
from .efron_stein import ESDecomposition, decompose, es_degree_mass, markov_contract_check
from .hierarchy import (
    Component, Leaf, Internal, CertifiedTree, HierarchyCertifier, certify,
    stability_recursive, stability_exact, stability_mc, decay_bounds,
    recursive_majority, parity_tree, cos_arccos_tree, majority_leak_tree
)
from .percolation import (
    TriangularGrid, crossing, crossing_probability, crossing_stability, exact_spectrum_small
)

__all__ = [
    # Product spaces
    'FiniteDistribution', 'CorrelatedPair', 'ProductSpace', 'make_resampling_coupling',
    'build_space', 'enumerate_joint', 'joint_expectation', 'sample',

    # Fourier
    'FunctionTable', 'FourierExpansion', 'expand', 'distance_to_lin', 'stability',
    'low_degree_mass', 'low_degree_correlation', 'check_low_degree_bound',
    'check_lemma_multilinear',

    # Maximal correlation
    'MarkovOperator', 'maximal_correlation', 'induced_pair', 'estimate_induced_pair',
    'non_separability', 'check_nonseparable_lemma',

    # Efron-Stein
    'ESDecomposition', 'decompose', 'es_degree_mass', 'markov_contract_check',

    # Hierarchies
    'Component', 'Leaf', 'Internal', 'CertifiedTree', 'HierarchyCertifier', 'certify',
    'stability_recursive', 'stability_exact', 'stability_mc', 'decay_bounds',
    'recursive_majority', 'parity_tree', 'cos_arccos_tree', 'majority_leak_tree',

    # Percolation
    'TriangularGrid', 'crossing', 'crossing_probability', 'crossing_stability',
    'exact_spectrum_small'
]
