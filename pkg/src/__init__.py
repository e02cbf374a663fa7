# ===============================================
# src/__init__.py
# ===============================================
"""
hierstab - Main package
Harmonic analysis and noise-stability decay for hierarchical functions
"""

__version__ = "1.0.0"
__author__ = "hierstab developers"
__description__ = "Noise stability of hierarchies of low-dimensional components"

# Core imports
from .core.config import get_config, validate_config
from .core.exceptions import CapacityError, DomainError, HierStabError, NumericalError
from .analysis.product_space import FiniteDistribution, CorrelatedPair, ProductSpace

__all__ = [
    'get_config', 'validate_config',
    'HierStabError', 'DomainError', 'CapacityError', 'NumericalError',
    'FiniteDistribution', 'CorrelatedPair', 'ProductSpace',
]
