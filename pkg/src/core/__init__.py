# ===============================================
# src/core/__init__.py
# ===============================================
"""
Core modules for hierstab
Contains configuration, error types and report models
"""

from .config import get_config, validate_config, setup_logging, enumeration_cap, PROJECT_ROOT
from .exceptions import (
    HierStabError, DomainError, ArityError, StructureError, CertificationError,
    NotMultilinearError, CapacityError, NumericalError
)
from .models import (
    # Enums
    ComponentKind, CouplingKind, Command, OutputFormat,

    # Input descriptors
    CouplingDescriptor, PairDescriptor, SpaceDescriptor, FunctionDescriptor, HierarchyDescriptor,

    # Reports
    ReportModel, MonteCarloEstimate, LowDegreeBoundReport, LemmaCheckReport,
    ContractionEntry, MarkovContractReport, NonSeparabilityReport, DecayBoundReport,
    NodeCertificate, DegreeProfile,

    # Configuration Models
    ExperimentConfig,

    # Utility Functions
    parse_probability
)

__all__ = [
    # Configuration
    'get_config', 'validate_config', 'setup_logging', 'enumeration_cap', 'PROJECT_ROOT',

    # Errors
    'HierStabError', 'DomainError', 'ArityError', 'StructureError', 'CertificationError',
    'NotMultilinearError', 'CapacityError', 'NumericalError',

    # Enums
    'ComponentKind', 'CouplingKind', 'Command', 'OutputFormat',

    # Input descriptors
    'CouplingDescriptor', 'PairDescriptor', 'SpaceDescriptor', 'FunctionDescriptor',
    'HierarchyDescriptor',

    # Reports
    'ReportModel', 'MonteCarloEstimate', 'LowDegreeBoundReport', 'LemmaCheckReport',
    'ContractionEntry', 'MarkovContractReport', 'NonSeparabilityReport', 'DecayBoundReport',
    'NodeCertificate', 'DegreeProfile',

    # Configuration Models
    'ExperimentConfig',

    # Utility Functions
    'parse_probability'
]
