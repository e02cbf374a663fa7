# src/analysis/fourier.py
"""
Multilinear Fourier analysis on finite product spaces
Expansion in the orthonormal basis chi_S, distance to linear functions,
exact noise stability and low-degree correlation
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Optional, Sequence, Tuple, Union
import logging
import math

import numpy as np

from ..core.config import FOURIER_CONFIG, TOLERANCES
from ..core.exceptions import ArityError, DomainError, NotMultilinearError
from ..core.models import LemmaCheckReport, LowDegreeBoundReport
from .product_space import ProductSpace

logger = logging.getLogger(__name__)

Rhos = Union[float, Sequence[float], np.ndarray]


@dataclass(frozen=True, eq=False)
class FunctionTable:
    """
    Dense table of f over the x side of a product space

    Values are mixed-radix indexed with coordinate 1 as the fastest digit.
    `exact` is False for user-supplied float tables, which are then checked
    with the looser user tolerance.
    """
    space: ProductSpace
    values: np.ndarray
    exact: bool = True

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        expected = self.space.x_states
        if values.size != expected:
            raise ArityError(f"table has {values.size} values, space needs {expected}")
        if not np.all(np.isfinite(values)):
            raise DomainError("table values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def tolerance(self) -> float:
        return TOLERANCES["exact"] if self.exact else TOLERANCES["user_table"]

    def grid(self) -> np.ndarray:
        """Values as an n-dimensional array, axis i for coordinate i"""
        return self.values.reshape(self.space.x_shape, order='F')

    @property
    def mean(self) -> float:
        return float(self.space.x_probabilities() @ self.values)

    @property
    def variance(self) -> float:
        probs = self.space.x_probabilities()
        mean = float(probs @ self.values)
        return max(0.0, float(probs @ (self.values - mean) ** 2))

    def index_of(self, x: Sequence[float]) -> int:
        """Flat table index of an x vector given by its values"""
        x = np.asarray(x, dtype=float).ravel()
        if x.size != self.n:
            raise ArityError(f"expected {self.n} coordinates, got {x.size}")
        index, stride = 0, 1
        for value, dist in zip(x, self.space.x_marginals):
            index += int(dist.index_of(np.array([value]))[0]) * stride
            stride *= dist.size
        return index

    def value_at(self, x: Sequence[float]) -> float:
        return float(self.values[self.index_of(x)])

    def lookup(self, points: np.ndarray) -> np.ndarray:
        """Vectorised table lookup for an (N, n) array of x values"""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.n:
            raise ArityError(f"expected {self.n} coordinates, got {points.shape[1]}")
        index = np.zeros(points.shape[0], dtype=np.int64)
        stride = 1
        for i, dist in enumerate(self.space.x_marginals):
            index += dist.index_of(points[:, i]) * stride
            stride *= dist.size
        return self.values[index]

    def __add__(self, other: "FunctionTable") -> "FunctionTable":
        return FunctionTable(self.space, self.values + other.values, self.exact and other.exact)

    def scaled(self, factor: float) -> "FunctionTable":
        return FunctionTable(self.space, factor * self.values, self.exact)

    @classmethod
    def from_callable(cls, space: ProductSpace, fn: Callable[[np.ndarray], np.ndarray],
                      exact: bool = True) -> "FunctionTable":
        """Tabulate a function vectorised over an (N, n) array of points"""
        return cls(space, np.asarray(fn(space.x_points()), dtype=float), exact)


@dataclass(frozen=True, eq=False)
class FourierExpansion:
    """
    Coefficients f_hat(S) over the basis chi_S = prod_{i in S} x~_i

    Subsets are bitmasks with bit i standing for coordinate i. Coefficients
    are a dense array of length 2^n up to FOURIER_CONFIG["dense_max_n"]
    coordinates and a dict of nonzero entries above.
    """
    space: ProductSpace
    coeffs: Union[np.ndarray, Dict[int, float]]
    tolerance: float = field(default_factory=lambda: TOLERANCES["exact"])

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def is_dense(self) -> bool:
        return isinstance(self.coeffs, np.ndarray)

    def items(self) -> Tuple[np.ndarray, np.ndarray]:
        """(masks, values) arrays of the stored coefficients"""
        if self.is_dense:
            return np.arange(self.coeffs.size, dtype=np.int64), self.coeffs
        masks = np.fromiter(self.coeffs.keys(), dtype=np.int64, count=len(self.coeffs))
        values = np.fromiter(self.coeffs.values(), dtype=float, count=len(self.coeffs))
        return masks, values

    def __getitem__(self, mask: int) -> float:
        if self.is_dense:
            return float(self.coeffs[mask])
        return float(self.coeffs.get(mask, 0.0))

    def coefficient(self, subset: Iterable[int]) -> float:
        """f_hat(S) for S given as 0-based coordinate indices"""
        return self[subset_mask(subset)]

    def degrees(self) -> np.ndarray:
        masks, _ = self.items()
        return popcount(masks, self.n)

    @property
    def mean(self) -> float:
        return self[0]

    @property
    def variance(self) -> float:
        masks, values = self.items()
        return float(np.sum(values[masks != 0] ** 2))

    @property
    def second_moment(self) -> float:
        _, values = self.items()
        return float(np.sum(values ** 2))

    def nonzero(self, tol: float = 0.0) -> Dict[int, float]:
        masks, values = self.items()
        keep = np.abs(values) > tol
        return {int(m): float(v) for m, v in zip(masks[keep], values[keep])}

    def to_dense(self) -> np.ndarray:
        if self.is_dense:
            return self.coeffs
        dense = np.zeros(1 << self.n)
        for mask, value in self.coeffs.items():
            dense[mask] = value
        return dense

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Sum_S f_hat(S) chi_S(x) at an (N, n) array of x values"""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        normalized = np.empty_like(points)
        for i, dist in enumerate(self.space.x_marginals):
            normalized[:, i] = 0.0 if dist.is_degenerate else \
                (points[:, i] - dist.mean) / math.sqrt(dist.variance)
        masks, values = self.items()
        result = np.zeros(points.shape[0])
        for mask, value in zip(masks, values):
            if value == 0.0:
                continue
            chi = np.ones(points.shape[0])
            for i in range(self.n):
                if mask >> i & 1:
                    chi *= normalized[:, i]
            result += value * chi
        return result

    def to_table(self) -> FunctionTable:
        """Reconstructed table over the space's x grid"""
        grid = self.to_dense().reshape((2,) * self.n, order='F')
        for dist in self.space.x_marginals:
            back = np.column_stack([np.ones(dist.size), dist.normalized_support()])
            grid = np.tensordot(grid, back.T, axes=([0], [0]))
        return FunctionTable(self.space, grid.ravel(order='F'))

    def parseval_error(self, table: FunctionTable) -> float:
        probs = self.space.x_probabilities()
        return abs(self.second_moment - float(probs @ table.values ** 2))

    @classmethod
    def from_coefficients(cls, space: ProductSpace, coeffs: Dict[int, float]) -> "FourierExpansion":
        """Expansion given directly by {mask: coefficient}"""
        if any(mask < 0 or mask >> space.n for mask in coeffs):
            raise DomainError("coefficient mask outside the coordinate range")
        if space.n <= FOURIER_CONFIG["dense_max_n"]:
            dense = np.zeros(1 << space.n)
            for mask, value in coeffs.items():
                dense[mask] = value
            return cls(space, dense)
        return cls(space, {int(m): float(v) for m, v in coeffs.items() if v != 0.0})


# ===============================================
# Helpers
# ===============================================

def subset_mask(subset: Iterable[int]) -> int:
    mask = 0
    for i in subset:
        mask |= 1 << int(i)
    return mask


def popcount(masks: np.ndarray, n: int) -> np.ndarray:
    masks = np.asarray(masks, dtype=np.int64)
    counts = np.zeros(masks.shape, dtype=np.int64)
    for i in range(n):
        counts += (masks >> i) & 1
    return counts


def _subset_weights(masks: np.ndarray, rhos: np.ndarray) -> np.ndarray:
    """prod_{i in S} rho_i for every mask"""
    weights = np.ones(masks.shape)
    for i, rho in enumerate(rhos):
        weights[((masks >> i) & 1).astype(bool)] *= rho
    return weights


def _as_rhos(rhos: Rhos, n: int) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(rhos, dtype=float))
    if arr.size == 1:
        arr = np.full(n, float(arr[0]))
    if arr.size != n:
        raise ArityError(f"expected {n} per-coordinate correlations, got {arr.size}")
    return arr


def _butterfly(values: np.ndarray) -> np.ndarray:
    """In-place Walsh-Hadamard transform scaled to E[f chi_S] on the uniform cube"""
    n = int(values.size).bit_length() - 1
    for i in range(n):
        h = 1 << i
        a = values.reshape(-1, 2, h)
        lo = a[:, 0, :].copy()
        hi = a[:, 1, :]
        a[:, 0, :] = (lo + hi) / 2.0
        a[:, 1, :] = (hi - lo) / 2.0
    return values


def _check_degenerate(table: FunctionTable) -> None:
    grid = table.grid()
    for i, dist in enumerate(table.space.x_marginals):
        if dist.is_degenerate and dist.size > 1:
            spread = np.ptp(grid, axis=i).max()
            if spread > TOLERANCES["slice_constancy"] * max(1.0, np.abs(grid).max()):
                raise DomainError(f"f depends on coordinate {i}, which has zero variance")


# ===============================================
# Operations
# ===============================================

def expand(table: FunctionTable) -> FourierExpansion:
    """
    Fourier expansion f_hat(S) = E[f chi_S]

    Args:
        table (FunctionTable): Function to expand

    Returns:
        FourierExpansion: Dense coefficient array

    Raises:
        NotMultilinearError: f is not multilinear over supports with more than two points
    """
    space = table.space
    if space.n > FOURIER_CONFIG["dense_max_n"]:
        raise DomainError(f"dense expansion supports at most {FOURIER_CONFIG['dense_max_n']} coordinates")
    _check_degenerate(table)

    if space.is_uniform_cube():
        coeffs = _butterfly(np.array(table.values, dtype=float))
        return FourierExpansion(space, coeffs, table.tolerance)

    grid = table.grid()
    for dist in space.x_marginals:
        p = dist.probs_array()
        basis = np.vstack([p, p * dist.normalized_support()])
        grid = np.tensordot(grid, basis.T, axes=([0], [0]))
    expansion = FourierExpansion(space, grid.ravel(order='F'), table.tolerance)

    if max(space.x_shape) > 2:
        residual = np.abs(expansion.to_table().values - table.values)
        worst = int(np.argmax(residual))
        if residual[worst] > TOLERANCES["user_table"]:
            point = space.x_points()[worst].tolist()
            raise NotMultilinearError(
                f"f is not multilinear over its supports: residual {residual[worst]:.3e} at x={point}",
                point=point, residual=float(residual[worst]))
    logger.debug("expanded table of %d values over %d coordinates", table.values.size, space.n)
    return expansion


def distance_to_lin(F: FourierExpansion) -> float:
    """Share of the variance carried by |S| >= 2; 0 for constant f"""
    variance = F.variance
    if variance <= TOLERANCES["variance_floor"]:
        return 0.0
    masks, values = F.items()
    high = popcount(masks, F.n) >= 2
    return float(min(1.0, np.sum(values[high] ** 2) / variance))


def stability(F: FourierExpansion, rhos: Rhos) -> float:
    """
    (1 / Var f) * sum_{S != {}} (prod_{i in S} rho_i) f_hat(S)^2

    Args:
        F (FourierExpansion): Expansion of f
        rhos: One correlation for all coordinates or one per coordinate

    Returns:
        float: Noise stability, 0 for constant f
    """
    rhos = _as_rhos(rhos, F.n)
    variance = F.variance
    if variance <= TOLERANCES["variance_floor"]:
        return 0.0
    masks, values = F.items()
    nonempty = masks != 0
    weights = _subset_weights(masks[nonempty], rhos)
    return float(np.sum(weights * values[nonempty] ** 2) / variance)


def degree_weights(F: FourierExpansion) -> np.ndarray:
    """Fourier weight sum_{|S|=k} f_hat(S)^2 for k = 0..n"""
    masks, values = F.items()
    return np.bincount(popcount(masks, F.n), weights=values ** 2, minlength=F.n + 1)


def low_degree_mass(F: FourierExpansion, D: int) -> float:
    """sqrt(sum_{1<=|S|<=D} f_hat(S)^2), unnormalised"""
    if D < 0:
        raise DomainError(f"degree must be non-negative, got {D}")
    weights = degree_weights(F)
    return float(math.sqrt(np.sum(weights[1:D + 1])))


def low_degree_correlation(F: FourierExpansion, D: int) -> float:
    """Largest correlation of f with a multilinear function of degree <= D"""
    if not 1 <= D <= F.n:
        raise DomainError(f"D must lie in [1, {F.n}], got {D}")
    variance = F.variance
    if variance <= TOLERANCES["variance_floor"]:
        return 0.0
    return float(min(1.0, low_degree_mass(F, D) / math.sqrt(variance)))


def check_low_degree_bound(F: FourierExpansion, D: int, rho: float) -> LowDegreeBoundReport:
    """
    Compare M = low_degree_correlation(F, D) with rho^(-D/2) sqrt(stability(F, rho))

    Args:
        F (FourierExpansion): Expansion of f
        D (int): Degree bound
        rho (float): Correlation in (0, 1)

    Returns:
        LowDegreeBoundReport: M, bound and slack
    """
    if not 0.0 < rho < 1.0:
        raise DomainError(f"rho must lie in (0, 1), got {rho}")
    M = low_degree_correlation(F, D)
    bound = rho ** (-D / 2.0) * math.sqrt(max(0.0, stability(F, rho)))
    slack = bound - M
    tol = F.tolerance
    return LowDegreeBoundReport(D=D, rho=rho, M=M, bound=bound, slack=slack,
                                holds=slack >= -tol, tolerance=tol)


def check_lemma_multilinear(F: FourierExpansion, rho: Rhos) -> LemmaCheckReport:
    """
    Check stability <= (1 - eps) rho + eps rho^2 with eps = distance_to_lin(F)

    With per-coordinate correlations the stability uses each rho_i and the
    bound uses rho = max_i rho_i. The lower floor (1 - eps) rho is reported
    when all rho_i agree and f has degree <= 2.
    """
    rhos = _as_rhos(rho, F.n)
    if np.any(rhos < 0.0) or np.any(rhos > 1.0):
        raise DomainError("correlations must lie in [0, 1]")
    top = float(rhos.max())
    s = stability(F, rhos)
    eps = distance_to_lin(F)
    bound = (1.0 - eps) * top + eps * top ** 2

    floor = None
    masks, values = F.items()
    max_degree = int(popcount(masks[values != 0], F.n).max(initial=0))
    if np.all(rhos == top) and max_degree <= 2:
        floor = (1.0 - eps) * top

    tol = F.tolerance
    return LemmaCheckReport(stability=s, epsilon=eps, rho=top, bound=bound, floor=floor,
                            holds=s <= bound + tol, tolerance=tol)


def check_resilience(F: FourierExpansion, t: int) -> bool:
    """True when all Fourier weight at 1 <= |S| <= t vanishes"""
    weights = degree_weights(F)
    scale = max(1.0, F.second_moment)
    return bool(np.sum(weights[1:t + 1]) <= F.tolerance * scale)


def parity_tree_bound(n: int, rho: float) -> Dict[str, float]:
    """
    Exact parity stability rho^n against the bound from a tree of 2-bit parities

    A tree of depth floor(log2 n) only certifies rho^(2^depth), which is far
    weaker than the true value once n is not a power of two.
    """
    if n < 2:
        raise DomainError("parity trees need at least two bits")
    depth = int(math.floor(math.log2(n)))
    return {"n": n, "depth": depth, "exact": rho ** n, "tree_bound": rho ** (2 ** depth)}


def basis_table(space: ProductSpace, subset: Iterable[int]) -> FunctionTable:
    """chi_S tabulated over the x grid"""
    values = np.ones(space.x_states)
    points = space.x_points()
    for i in subset:
        dist = space.x_marginals[i]
        values *= (points[:, i] - dist.mean) / math.sqrt(dist.variance) if not dist.is_degenerate else 0.0
    return FunctionTable(space, values)


__all__ = [
    'FunctionTable', 'FourierExpansion', 'subset_mask', 'popcount', 'expand',
    'distance_to_lin', 'stability', 'degree_weights', 'low_degree_mass',
    'low_degree_correlation', 'check_low_degree_bound', 'check_lemma_multilinear',
    'check_resilience', 'parity_tree_bound', 'basis_table',
]
