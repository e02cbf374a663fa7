# src/analysis/product_space.py
"""
Finite product probability spaces for hierstab
Distributions, correlated coordinate pairs, the rho-resampling coupling,
exact joint enumeration and reproducible sampling
"""

from itertools import product
from typing import Iterator, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
from pydantic import (BaseModel, ConfigDict, Field, PrivateAttr, field_serializer,
                      field_validator, model_validator)

from ..core.config import MONTE_CARLO_CONFIG, TOLERANCES, enumeration_cap
from ..core.exceptions import CapacityError, DomainError
from ..core.models import CouplingKind, SpaceDescriptor, parse_probability
from ..utils.rng import block_generator, block_sizes

logger = logging.getLogger(__name__)


class FiniteDistribution(BaseModel):
    """Finite-support law of a real random variable"""
    model_config = ConfigDict(frozen=True)

    support: Tuple[float, ...] = Field(..., min_length=1, description="Strictly increasing values")
    probs: Tuple[float, ...] = Field(..., min_length=1, description="Positive probabilities")
    mean: float = Field(0.0, description="Cached E[X]")
    variance: float = Field(0.0, ge=0.0, description="Cached Var(X)")

    @model_validator(mode='before')
    @classmethod
    def fill_moments(cls, data):
        if not isinstance(data, dict):
            return data
        data = dict(data)
        support = [float(s) for s in data.get('support', ())]
        probs = [parse_probability(p) for p in data.get('probs', ())]
        data['support'], data['probs'] = tuple(support), tuple(probs)
        if support and len(support) == len(probs):
            mean = math.fsum(s * p for s, p in zip(support, probs))
            variance = max(0.0, math.fsum(p * (s - mean) ** 2 for s, p in zip(support, probs)))
            data.setdefault('mean', mean)
            data.setdefault('variance', variance)
        return data

    @model_validator(mode='after')
    def check_invariants(self):
        tol = TOLERANCES["probability_sum"]
        if len(self.support) != len(self.probs):
            raise ValueError('support and probs must have the same length')
        if not all(math.isfinite(s) for s in self.support):
            raise ValueError('support values must be finite')
        if any(p <= 0.0 for p in self.probs):
            raise ValueError('probabilities must be positive')
        if abs(math.fsum(self.probs) - 1.0) > tol:
            raise ValueError(f'probabilities sum to {math.fsum(self.probs)!r}, not 1')
        if any(b <= a for a, b in zip(self.support, self.support[1:])):
            raise ValueError('support must be strictly increasing')
        mean = math.fsum(s * p for s, p in zip(self.support, self.probs))
        variance = math.fsum(p * (s - mean) ** 2 for s, p in zip(self.support, self.probs))
        scale = max(1.0, max(abs(s) for s in self.support)) ** 2
        if abs(self.mean - mean) > tol * math.sqrt(scale) or abs(self.variance - max(variance, 0.0)) > tol * scale:
            raise ValueError('cached moments do not match support/probs')
        return self

    # ---- constructors ----

    @classmethod
    def uniform(cls, values: Sequence[float]) -> "FiniteDistribution":
        values = sorted(float(v) for v in values)
        return cls(support=values, probs=[1.0 / len(values)] * len(values))

    @classmethod
    def fair_bit(cls) -> "FiniteDistribution":
        """Uniform law on {-1, +1}"""
        return cls(support=(-1.0, 1.0), probs=(0.5, 0.5))

    @classmethod
    def from_samples(cls, values: np.ndarray, weights: Optional[np.ndarray] = None,
                     decimals: Optional[int] = None) -> "FiniteDistribution":
        """
        Law of a finite array of values (optionally weighted)

        Values equal after rounding to `decimals` digits are merged.
        """
        decimals = TOLERANCES["value_decimals"] if decimals is None else decimals
        values = np.round(np.asarray(values, dtype=float).ravel(), decimals)
        weights = np.ones_like(values) if weights is None else np.asarray(weights, dtype=float).ravel()
        support, inverse = np.unique(values, return_inverse=True)
        mass = np.bincount(inverse, weights=weights, minlength=len(support))
        keep = mass > 0
        mass = mass[keep] / mass[keep].sum()
        return cls(support=support[keep].tolist(), probs=mass.tolist())

    # ---- derived quantities ----

    @property
    def size(self) -> int:
        return len(self.support)

    @property
    def is_degenerate(self) -> bool:
        return self.variance <= TOLERANCES["variance_floor"]

    def support_array(self) -> np.ndarray:
        return np.asarray(self.support, dtype=float)

    def probs_array(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=float)

    def normalized_support(self) -> np.ndarray:
        """x~ = (x - E[X]) / sqrt(Var X); zeros for a degenerate law"""
        if self.is_degenerate:
            return np.zeros(self.size)
        return (self.support_array() - self.mean) / math.sqrt(self.variance)

    def index_of(self, values: np.ndarray, decimals: Optional[int] = None) -> np.ndarray:
        """Support indices of `values`; raises DomainError for values off the support"""
        decimals = TOLERANCES["value_decimals"] if decimals is None else decimals
        support = np.round(self.support_array(), decimals)
        values = np.round(np.asarray(values, dtype=float), decimals)
        idx = np.clip(np.searchsorted(support, values), 0, self.size - 1)
        bad = support[idx] != values
        if np.any(bad):
            raise DomainError(f"value {values[bad].ravel()[0]!r} is not in support {self.support}")
        return idx


class CorrelatedPair(BaseModel):
    """Joint law of one coordinate pair (X_i, Y_i)"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    joint: np.ndarray = Field(..., description="Joint pmf, rows index x, columns index y")
    x_marginal: FiniteDistribution
    y_marginal: FiniteDistribution
    pearson: float = Field(0.0, ge=-1.0, le=1.0)
    degenerate: bool = False

    _maxcorr: Optional[float] = PrivateAttr(None)

    @field_validator('joint', mode='before')
    @classmethod
    def as_array(cls, v):
        arr = np.array([[parse_probability(p) for p in row] for row in v], dtype=float) \
            if isinstance(v, (list, tuple)) else np.array(v, dtype=float)
        if arr.ndim != 2:
            raise ValueError('joint must be a matrix')
        arr.setflags(write=False)
        return arr

    @field_serializer('joint')
    def serialize_joint(self, joint: np.ndarray):
        return joint.tolist()

    @model_validator(mode='after')
    def check_invariants(self):
        tol = TOLERANCES["probability_sum"]
        joint = self.joint
        if joint.shape != (self.x_marginal.size, self.y_marginal.size):
            raise ValueError(f'joint shape {joint.shape} does not match marginal supports')
        if np.any(joint < 0) or not np.all(np.isfinite(joint)):
            raise ValueError('joint entries must be finite and non-negative')
        if abs(joint.sum() - 1.0) > tol:
            raise ValueError(f'joint sums to {joint.sum()!r}, not 1')
        if np.max(np.abs(joint.sum(axis=1) - self.x_marginal.probs_array())) > tol:
            raise ValueError('row sums differ from the x marginal')
        if np.max(np.abs(joint.sum(axis=0) - self.y_marginal.probs_array())) > tol:
            raise ValueError('column sums differ from the y marginal')
        if abs(self.pearson - pearson_from_joint(joint, self.x_marginal, self.y_marginal)) > tol:
            raise ValueError('pearson does not match the joint')
        return self

    @classmethod
    def from_joint(cls, joint, x_support: Sequence[float],
                   y_support: Optional[Sequence[float]] = None) -> "CorrelatedPair":
        """
        Build a pair from an explicit joint pmf, deriving marginals and pearson

        Args:
            joint: Matrix of probabilities, rows index x_support
            x_support: X values (strictly increasing)
            y_support: Y values (defaults to x_support)

        Returns:
            CorrelatedPair: Validated pair
        """
        joint = np.array([[parse_probability(p) for p in row] for row in joint], dtype=float)
        y_support = x_support if y_support is None else y_support
        x_marginal = FiniteDistribution(support=list(x_support), probs=joint.sum(axis=1).tolist())
        y_marginal = FiniteDistribution(support=list(y_support), probs=joint.sum(axis=0).tolist())
        pearson = pearson_from_joint(joint, x_marginal, y_marginal)
        return cls(joint=joint, x_marginal=x_marginal, y_marginal=y_marginal, pearson=pearson,
                   degenerate=x_marginal.is_degenerate or y_marginal.is_degenerate)

    @property
    def maxcorr(self) -> float:
        """Maximal (HGR) correlation, computed on first access"""
        if self._maxcorr is None:
            from .maxcorr import maximal_correlation
            self._maxcorr = maximal_correlation(self)
        return self._maxcorr

    @property
    def joint_states(self) -> int:
        return self.joint.size

    def transposed(self) -> "CorrelatedPair":
        """The same coupling with the roles of X and Y exchanged"""
        return CorrelatedPair(joint=self.joint.T.copy(), x_marginal=self.y_marginal,
                              y_marginal=self.x_marginal, pearson=self.pearson,
                              degenerate=self.degenerate)


def pearson_from_joint(joint: np.ndarray, x_marginal: FiniteDistribution,
                       y_marginal: FiniteDistribution) -> float:
    """Corr(X, Y) from a joint pmf; 0 when either side has zero variance"""
    if x_marginal.is_degenerate or y_marginal.is_degenerate:
        return 0.0
    xs = x_marginal.support_array() - x_marginal.mean
    ys = y_marginal.support_array() - y_marginal.mean
    cov = float(xs @ np.asarray(joint, dtype=float) @ ys)
    value = cov / math.sqrt(x_marginal.variance * y_marginal.variance)
    return float(min(1.0, max(-1.0, value)))


class ProductSpace(BaseModel):
    """Product of independent coordinate pairs"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    pairs: Tuple[CorrelatedPair, ...] = Field(..., min_length=1)

    @property
    def n(self) -> int:
        return len(self.pairs)

    @property
    def x_marginals(self) -> List[FiniteDistribution]:
        return [pair.x_marginal for pair in self.pairs]

    @property
    def y_marginals(self) -> List[FiniteDistribution]:
        return [pair.y_marginal for pair in self.pairs]

    @property
    def x_shape(self) -> Tuple[int, ...]:
        return tuple(pair.x_marginal.size for pair in self.pairs)

    @property
    def y_shape(self) -> Tuple[int, ...]:
        return tuple(pair.y_marginal.size for pair in self.pairs)

    @property
    def pearsons(self) -> np.ndarray:
        return np.array([pair.pearson for pair in self.pairs])

    @property
    def maxcorrs(self) -> np.ndarray:
        return np.array([pair.maxcorr for pair in self.pairs])

    @property
    def joint_states(self) -> int:
        return math.prod(pair.joint_states for pair in self.pairs)

    @property
    def x_states(self) -> int:
        return math.prod(self.x_shape)

    def is_uniform_cube(self) -> bool:
        """All x marginals are the fair bit on {-1, +1}"""
        return all(d.support == (-1.0, 1.0) and d.probs == (0.5, 0.5) for d in self.x_marginals)

    def swapped(self) -> "ProductSpace":
        return ProductSpace(pairs=[pair.transposed() for pair in self.pairs])

    def permuted(self, perm: Sequence[int]) -> "ProductSpace":
        """Coordinate i of the result is coordinate perm[i] of this space"""
        return ProductSpace(pairs=[self.pairs[p] for p in perm])

    def x_probabilities(self) -> np.ndarray:
        """P(X = x) over the x index space, coordinate 1 fastest"""
        probs = np.ones(1)
        for dist in self.x_marginals:
            probs = np.outer(dist.probs_array(), probs).ravel()
        return probs

    def x_points(self) -> np.ndarray:
        """Matrix of x values, one row per point of the x index space"""
        idx = np.indices(self.x_shape).reshape(self.n, -1, order='F').T
        values = np.empty(idx.shape, dtype=float)
        for i, dist in enumerate(self.x_marginals):
            values[:, i] = dist.support_array()[idx[:, i]]
        return values

    @classmethod
    def from_marginals(cls, dists: Sequence[FiniteDistribution], rho: float = 1.0) -> "ProductSpace":
        """Space whose pairs are rho-resampling couplings of `dists`"""
        return cls(pairs=[make_resampling_coupling(d, rho) for d in dists])

    @classmethod
    def uniform_cube(cls, n: int, rho: float = 1.0) -> "ProductSpace":
        return cls.from_marginals([FiniteDistribution.fair_bit()] * n, rho)


# ===============================================
# Operations
# ===============================================

def make_resampling_coupling(dist: FiniteDistribution, rho: float) -> CorrelatedPair:
    """
    Y = X with probability rho, otherwise an independent copy

    Args:
        dist (FiniteDistribution): Common marginal
        rho (float): Resampling parameter in [0, 1]

    Returns:
        CorrelatedPair: Pair with both marginals equal to dist
    """
    if not 0.0 <= rho <= 1.0 or not math.isfinite(rho):
        raise DomainError(f"rho must lie in [0, 1], got {rho!r}")
    p = dist.probs_array()
    joint = rho * np.diag(p) + (1.0 - rho) * np.outer(p, p)
    pearson = 0.0 if dist.is_degenerate else float(rho)
    return CorrelatedPair(joint=joint, x_marginal=dist, y_marginal=dist, pearson=pearson,
                          degenerate=dist.is_degenerate)


def build_space(descriptor) -> ProductSpace:
    """
    Build a ProductSpace from a JSON space descriptor (dict or SpaceDescriptor)
    """
    if not isinstance(descriptor, SpaceDescriptor):
        descriptor = SpaceDescriptor.model_validate(descriptor)
    pairs = []
    for i, pd in enumerate(descriptor.pairs):
        try:
            if pd.coupling.kind == CouplingKind.RESAMPLE:
                dist = FiniteDistribution(support=pd.support, probs=pd.probs)
                pairs.append(make_resampling_coupling(dist, pd.coupling.rho))
            else:
                pair = CorrelatedPair.from_joint(pd.coupling.joint, pd.support, pd.y_support)
                expected = np.asarray(pd.probs)
                if np.max(np.abs(pair.x_marginal.probs_array() - expected)) > TOLERANCES["probability_sum"]:
                    raise DomainError("explicit joint rows do not sum to probs")
                pairs.append(pair)
        except ValueError as e:
            raise DomainError(f"pair {i}: {e}") from e
    return ProductSpace(pairs=pairs)


def check_capacity(states: int, what: str, cap: Optional[int] = None) -> None:
    cap = enumeration_cap() if cap is None else cap
    if states > cap:
        raise CapacityError(f"{what} too large to enumerate", required=states, cap=cap)


def enumerate_joint(space: ProductSpace, cap: Optional[int] = None
                    ) -> Iterator[Tuple[Tuple[int, ...], Tuple[int, ...], float]]:
    """
    Every joint atom (x index vector, y index vector, probability) once

    Mixed-radix order with coordinate 1 fastest; within a coordinate the x
    index varies fastest.

    Args:
        space (ProductSpace): Space to enumerate
        cap (int): Optional override of the joint state cap

    Yields:
        Tuple: (x indices, y indices, probability)
    """
    check_capacity(space.joint_states, "joint space", cap)
    per_coordinate = []
    for pair in space.pairs:
        kx, ky = pair.joint.shape
        per_coordinate.append([(a, b, float(pair.joint[a, b])) for b in range(ky) for a in range(kx)])

    for combo in product(*reversed(per_coordinate)):
        atoms = combo[::-1]
        prob = 1.0
        for _, _, p in atoms:
            prob *= p
        yield tuple(a for a, _, _ in atoms), tuple(b for _, b, _ in atoms), prob


def joint_expectation(x_values: np.ndarray, y_values: np.ndarray, space: ProductSpace,
                      cap: Optional[int] = None) -> float:
    """
    E[a(X) b(Y)] summed over all joint atoms

    The sum over atoms is carried out one coordinate at a time, which is the
    same finite sum reorganised by the product structure.

    Args:
        x_values: Table of a over the x index space (coordinate 1 fastest)
        y_values: Table of b over the y index space
        space (ProductSpace): Joint law

    Returns:
        float: The expectation
    """
    check_capacity(space.joint_states, "joint space", cap)
    acc = np.asarray(x_values, dtype=float).reshape(space.x_shape, order='F')
    for pair in space.pairs:
        acc = np.tensordot(acc, pair.joint, axes=([0], [0]))
    b = np.asarray(y_values, dtype=float).reshape(space.y_shape, order='F')
    return float(np.sum(acc * b))


def _sample_block(space: ProductSpace, seed: int, block: int, size: int
                  ) -> Tuple[np.ndarray, np.ndarray]:
    x = np.empty((size, space.n))
    y = np.empty((size, space.n))
    for i, pair in enumerate(space.pairs):
        rng = block_generator(seed, block, i)
        kx = pair.joint.shape[0]
        cdf = np.cumsum(pair.joint.ravel(order='F'))
        atoms = np.minimum(np.searchsorted(cdf, rng.random(size), side='right'), cdf.size - 1)
        x[:, i] = pair.x_marginal.support_array()[atoms % kx]
        y[:, i] = pair.y_marginal.support_array()[atoms // kx]
    return x, y


def sample(space: ProductSpace, seed: int, count: int, worker_index: int = 0,
           worker_count: int = 1) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """
    I.i.d. draws from the product of the pair joints, as a stream of blocks

    Block b, coordinate i always uses the same Philox stream, so the union of
    the sub-streams of all workers equals the serial stream.

    Args:
        space (ProductSpace): Space to sample
        seed (int): 64-bit seed
        count (int): Total number of draws (>= 1)
        worker_index (int): This worker's index
        worker_count (int): Number of workers sharing the stream

    Yields:
        Tuple[np.ndarray, np.ndarray]: (x block, y block), each of shape (size, n)
    """
    if count < 1:
        raise DomainError(f"count must be >= 1, got {count}")
    if not 0 <= worker_index < worker_count:
        raise DomainError("worker_index must lie in [0, worker_count)")
    for block, size in enumerate(block_sizes(count)):
        if block % worker_count == worker_index:
            yield _sample_block(space, seed, block, size)


# ===============================================
# Leaf samplers (Monte Carlo plug-ins)
# ===============================================

class DiscreteLeafSampler:
    """Leaves drawn from finite marginals"""

    def __init__(self, dists: Sequence[FiniteDistribution]):
        self.dists = list(dists)
        self.n = len(self.dists)
        self._cdfs = [np.cumsum(d.probs_array()) for d in self.dists]

    @classmethod
    def from_space(cls, space: ProductSpace) -> "DiscreteLeafSampler":
        return cls(space.x_marginals)

    def draw_coordinate(self, i: int, rng: np.random.Generator, size: int) -> np.ndarray:
        cdf = self._cdfs[i]
        idx = np.minimum(np.searchsorted(cdf, rng.random(size), side='right'), cdf.size - 1)
        return self.dists[i].support_array()[idx]


class UniformLeafSampler:
    """Continuous leaves, i.i.d. uniform on [low, high]"""

    def __init__(self, n: int, low: float = 0.0, high: float = 1.0):
        self.n = int(n)
        self.low, self.high = float(low), float(high)

    def draw_coordinate(self, i: int, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.uniform(self.low, self.high, size)


def resampled_draws(sampler, rho: float, seed: int, block: int, size: int
                    ) -> Tuple[np.ndarray, np.ndarray]:
    """
    One block of rho-resampled leaf pairs: Y_i = X_i w.p. rho, else a fresh draw

    Args:
        sampler: DiscreteLeafSampler or UniformLeafSampler
        rho (float): Resampling probability
        seed (int): Experiment seed
        block (int): Block index
        size (int): Draws in the block

    Returns:
        Tuple[np.ndarray, np.ndarray]: (x, y), each of shape (size, n)
    """
    x = np.empty((size, sampler.n))
    y = np.empty((size, sampler.n))
    for i in range(sampler.n):
        rng = block_generator(seed, block, i)
        x[:, i] = sampler.draw_coordinate(i, rng, size)
        fresh = sampler.draw_coordinate(i, rng, size)
        keep = rng.random(size) < rho
        y[:, i] = np.where(keep, x[:, i], fresh)
    return x, y


__all__ = [
    'FiniteDistribution', 'CorrelatedPair', 'ProductSpace', 'pearson_from_joint',
    'make_resampling_coupling', 'build_space', 'check_capacity', 'enumerate_joint',
    'joint_expectation', 'sample', 'DiscreteLeafSampler', 'UniformLeafSampler',
    'resampled_draws',
]
