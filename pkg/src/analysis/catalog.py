# src/analysis/catalog.py
"""
Named component functions
Boolean benchmarks on the uniform {-1, +1} cube and the two non-decaying
counterexample components. All functions are vectorised over an (N, n)
array of points.
"""

from typing import Callable, Dict, Optional
import logging

import numpy as np

from ..core.exceptions import ArityError, DomainError
from ..core.models import FunctionDescriptor
from .fourier import FunctionTable
from .product_space import ProductSpace

logger = logging.getLogger(__name__)


def majority(points: np.ndarray) -> np.ndarray:
    """Sign of the coordinate sum (odd arity)"""
    points = np.atleast_2d(points)
    if points.shape[1] % 2 == 0:
        raise ArityError("majority needs an odd number of inputs")
    return np.sign(points.sum(axis=1))


def parity(points: np.ndarray) -> np.ndarray:
    return np.prod(np.atleast_2d(points), axis=1)


def dictator(points: np.ndarray) -> np.ndarray:
    return np.atleast_2d(points)[:, 0].astype(float)


def tribes(points: np.ndarray, width: int = 2) -> np.ndarray:
    """+1 when some block of `width` consecutive inputs is all +1, else -1"""
    points = np.atleast_2d(points)
    n = points.shape[1]
    if width < 1 or n % width:
        raise ArityError(f"tribes width {width} does not divide {n}")
    blocks = points.reshape(points.shape[0], n // width, width)
    return np.where(np.any(np.all(blocks > 0, axis=2), axis=1), 1.0, -1.0)


# ===============================================
# Counterexample components
# ===============================================

def cos_pi(points: np.ndarray) -> np.ndarray:
    """cos(pi x_1); the second input is ignored"""
    return np.cos(np.pi * np.atleast_2d(points)[:, 0])


def arccos_over_pi(points: np.ndarray) -> np.ndarray:
    """arccos(x_1) / pi; the second input is ignored"""
    return np.arccos(np.clip(np.atleast_2d(points)[:, 0], -1.0, 1.0)) / np.pi


def leak_leaf(points: np.ndarray) -> np.ndarray:
    """x_1 + 10 maj(x_1, x_2, x_3) on {-1, +1}^3"""
    points = np.atleast_2d(points)
    return points[:, 0] + 10.0 * majority(points)


def majority_bit(values: np.ndarray) -> np.ndarray:
    """Recover the majority bit b_1 from v = 10 b_1 + b_2"""
    return np.sign(values)


def passthrough_bit(values: np.ndarray) -> np.ndarray:
    """Recover the carried first-input bit b_2 from v = 10 b_1 + b_2"""
    return values - 10.0 * np.sign(values)


def leak_upper(points: np.ndarray) -> np.ndarray:
    """B_2(y_1) + 10 maj(B_1(y_1), B_1(y_2), B_1(y_3)) over child outputs 10 b_1 + b_2"""
    points = np.atleast_2d(points)
    return passthrough_bit(points[:, 0]) + 10.0 * majority(majority_bit(points))


NAMED_FUNCTIONS: Dict[str, Callable[..., np.ndarray]] = {
    "maj3": majority,
    "majority": majority,
    "parity": parity,
    "dictator": dictator,
    "tribes": tribes,
}

DEFAULT_ARITY = {"maj3": 3, "majority": 3, "parity": 2, "dictator": 1, "tribes": 4}


def named_callable(name: str, width: Optional[int] = None) -> Callable[[np.ndarray], np.ndarray]:
    if name not in NAMED_FUNCTIONS:
        raise DomainError(f"unknown function name: {name}")
    if name == "tribes":
        return lambda points: tribes(points, width or 2)
    return NAMED_FUNCTIONS[name]


def build_function(descriptor, space: Optional[ProductSpace] = None) -> FunctionTable:
    """
    Tabulate a function descriptor

    Named functions live on the uniform cube unless a space is given; table
    functions need the space their values are indexed over.

    Args:
        descriptor: FunctionDescriptor or its dict form
        space (ProductSpace): Optional x space

    Returns:
        FunctionTable: Tabulated function
    """
    if not isinstance(descriptor, FunctionDescriptor):
        descriptor = FunctionDescriptor.model_validate(descriptor)

    if descriptor.kind == "table":
        if space is None:
            raise DomainError("a table function needs a space descriptor")
        return FunctionTable(space, np.asarray(descriptor.values, dtype=float), exact=False)

    name = descriptor.name
    n = descriptor.n or (space.n if space is not None else DEFAULT_ARITY[name])
    if name == "maj3" and n != 3:
        raise ArityError("maj3 has exactly three inputs")
    if space is None:
        space = ProductSpace.uniform_cube(n)
    elif space.n != n:
        raise ArityError(f"{name} with n={n} does not match a space of {space.n} coordinates")
    logger.debug("tabulating %s on %d coordinates", name, n)
    return FunctionTable.from_callable(space, named_callable(name, descriptor.width))


__all__ = [
    'majority', 'parity', 'dictator', 'tribes', 'cos_pi', 'arccos_over_pi',
    'leak_leaf', 'leak_upper', 'majority_bit', 'passthrough_bit',
    'NAMED_FUNCTIONS', 'DEFAULT_ARITY', 'named_callable', 'build_function',
]
