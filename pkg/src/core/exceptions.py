# src/core/exceptions.py
"""
Error hierarchy for hierstab
Each error class carries the exit status the command line reports for it
"""


class HierStabError(Exception):
    """Base class for all library errors"""
    exit_code = 1


class DomainError(HierStabError, ValueError):
    """Invalid parameters or inputs (precondition violations)"""
    exit_code = 2


class ArityError(DomainError):
    """Vector length does not match the coordinate count"""


class StructureError(DomainError):
    """Malformed hierarchy: partition overlaps, gaps or bad fan-in"""


class CertificationError(DomainError):
    """A component's certified epsilon falls below the declared one"""

    def __init__(self, message: str, failures=None):
        super().__init__(message)
        self.failures = list(failures or [])


class NotMultilinearError(DomainError):
    """Table is not multilinear over its supports"""

    def __init__(self, message: str, point=None, residual: float = None):
        super().__init__(message)
        self.point = point
        self.residual = residual


class CapacityError(HierStabError):
    """Exact enumeration would exceed the configured cap"""
    exit_code = 3

    def __init__(self, message: str, required: int = None, cap: int = None):
        if required is not None and cap is not None:
            message = (f"{message} ({required} states > cap {cap}); "
                       f"use a Monte Carlo estimator or raise HIERSTAB_CAP")
        super().__init__(message)
        self.required = required
        self.cap = cap


class NumericalError(HierStabError, ArithmeticError):
    """Iterative routine failed to converge"""
    exit_code = 4

    def __init__(self, message: str, residual: float = None):
        if residual is not None:
            message = f"{message} (residual {residual:.3e})"
        super().__init__(message)
        self.residual = residual


__all__ = [
    'HierStabError', 'DomainError', 'ArityError', 'StructureError',
    'CertificationError', 'NotMultilinearError', 'CapacityError', 'NumericalError'
]
