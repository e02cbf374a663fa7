# src/analysis/percolation.py
"""
Critical site percolation on the triangular lattice
Left-to-right crossing indicator on an n x n rhombus, Monte Carlo crossing
probability and noise stability, and exact Fourier degree profiles
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence
import logging
import math

import numpy as np
from numba import njit

from ..core.config import MONTE_CARLO_CONFIG, PERCOLATION_CONFIG
from ..core.exceptions import ArityError, CapacityError, DomainError
from ..core.models import DegreeProfile, MonteCarloEstimate
from ..utils.rng import block_generator, run_blocks
from .fourier import FourierExpansion, FunctionTable, degree_weights, expand
from .product_space import ProductSpace

logger = logging.getLogger(__name__)

# Square grid plus the (-1, +1) / (+1, -1) diagonal
NEIGHBOR_OFFSETS = ((0, -1), (0, 1), (-1, 0), (1, 0), (-1, 1), (1, -1))


@dataclass(frozen=True, eq=False)
class TriangularGrid:
    """
    n x n rhombus of the triangular lattice

    Site (r, c) has index r * n + c. Neighbours are stored in CSR form:
    the neighbours of site s are neighbors[starts[s]:starts[s + 1]].
    """
    n: int
    starts: np.ndarray
    neighbors: np.ndarray
    left_boundary: np.ndarray
    right_boundary: np.ndarray

    @classmethod
    def build(cls, n: int) -> "TriangularGrid":
        if n < 1:
            raise DomainError(f"grid side must be >= 1, got {n}")
        starts = [0]
        neighbors: List[int] = []
        for r in range(n):
            for c in range(n):
                for dr, dc in NEIGHBOR_OFFSETS:
                    rr, cc = r + dr, c + dc
                    if 0 <= rr < n and 0 <= cc < n:
                        neighbors.append(rr * n + cc)
                starts.append(len(neighbors))
        rows = np.arange(n)
        return cls(
            n=n,
            starts=np.asarray(starts, dtype=np.int64),
            neighbors=np.asarray(neighbors, dtype=np.int64),
            left_boundary=rows * n,
            right_boundary=rows * n + (n - 1),
        )

    @property
    def sites(self) -> int:
        return self.n * self.n

    def neighbors_of(self, site: int) -> np.ndarray:
        return self.neighbors[self.starts[site]:self.starts[site + 1]]

    def degree(self, site: int) -> int:
        return int(self.starts[site + 1] - self.starts[site])

    def is_symmetric(self) -> bool:
        return all(site in self.neighbors_of(int(other))
                   for site in range(self.sites) for other in self.neighbors_of(site))


class UnionFind:
    """Disjoint sets with path compression and union by rank"""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, element: int) -> int:
        root = element
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[element] != root:
            self.parent[element], element = root, self.parent[element]
        return root

    def unite(self, first: int, second: int) -> bool:
        a, b = self.find(first), self.find(second)
        if a == b:
            return False
        if self.rank[a] < self.rank[b]:
            a, b = b, a
        self.parent[b] = a
        if self.rank[a] == self.rank[b]:
            self.rank[a] += 1
        return True


def _check_config(grid: TriangularGrid, config: np.ndarray) -> np.ndarray:
    config = np.asarray(config)
    if config.shape[-1] != grid.sites:
        raise ArityError(f"configuration has {config.shape[-1]} sites, grid has {grid.sites}")
    return config


def crossing(grid: TriangularGrid, config: Sequence[int]) -> int:
    """
    +1 when open sites connect the left column to the right column, else -1

    Args:
        grid (TriangularGrid): Lattice
        config: N values in {-1, +1}, +1 meaning open

    Returns:
        int: Crossing indicator
    """
    config = _check_config(grid, np.asarray(config).ravel())
    N = grid.sites
    left, right = N, N + 1
    uf = UnionFind(N + 2)
    is_open = config > 0
    for site in range(N):
        if not is_open[site]:
            continue
        for other in grid.neighbors_of(site):
            if other > site and is_open[other]:
                uf.unite(site, int(other))
    for site in grid.left_boundary:
        if is_open[site]:
            uf.unite(int(site), left)
    for site in grid.right_boundary:
        if is_open[site]:
            uf.unite(int(site), right)
    return 1 if uf.find(left) == uf.find(right) else -1


@njit(cache=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while x != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True)
def _union(parent, rank, a, b):
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra == rb:
        return
    if rank[ra] < rank[rb]:
        parent[ra] = rb
    elif rank[ra] > rank[rb]:
        parent[rb] = ra
    else:
        parent[rb] = ra
        rank[ra] += 1


@njit(cache=True)
def _crossing_kernel(is_open, starts, neighbors, left_set, right_set):
    count, N = is_open.shape
    out = np.empty(count, dtype=np.int8)
    parent = np.empty(N + 2, dtype=np.int64)
    rank = np.empty(N + 2, dtype=np.int64)
    for k in range(count):
        for s in range(N + 2):
            parent[s] = s
            rank[s] = 0
        for s in range(N):
            if is_open[k, s]:
                for j in range(starts[s], starts[s + 1]):
                    nb = neighbors[j]
                    if nb > s and is_open[k, nb]:
                        _union(parent, rank, s, nb)
        for s in left_set:
            if is_open[k, s]:
                _union(parent, rank, s, N)
        for s in right_set:
            if is_open[k, s]:
                _union(parent, rank, s, N + 1)
        out[k] = 1 if _find(parent, N) == _find(parent, N + 1) else -1
    return out


def crossing_batch(grid: TriangularGrid, configs: np.ndarray) -> np.ndarray:
    """Crossing indicator for every row of a (B, N) array (+1 / True = open)"""
    configs = _check_config(grid, np.atleast_2d(configs))
    is_open = np.ascontiguousarray(configs > 0, dtype=np.uint8)
    return _crossing_kernel(is_open, grid.starts, grid.neighbors,
                            grid.left_boundary, grid.right_boundary).astype(np.int64)


# ===============================================
# Monte Carlo estimators
# ===============================================

def _estimate(values: np.ndarray, std_error: float, seed: int) -> MonteCarloEstimate:
    z = MONTE_CARLO_CONFIG["confidence_z"]
    mean = float(values.mean())
    return MonteCarloEstimate(estimate=mean, ci_low=mean - z * std_error, ci_high=mean + z * std_error,
                              std_error=std_error, samples=int(values.size), seed=seed)


def crossing_probability(grid: TriangularGrid, p: float, seed: int, samples: int,
                         workers: Optional[int] = None) -> MonteCarloEstimate:
    """
    P[crossing = +1] with sites open independently with probability p

    Args:
        grid (TriangularGrid): Lattice
        p (float): Opening probability
        seed (int): Experiment seed
        samples (int): Number of configurations

    Returns:
        MonteCarloEstimate: Estimate with a Wald interval
    """
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    if samples < 1:
        raise DomainError("samples must be >= 1")

    def block(b: int, size: int) -> np.ndarray:
        rng = block_generator(seed, b, 0)
        return crossing_batch(grid, rng.random((size, grid.sites)) < p) > 0

    hits = np.concatenate(run_blocks(block, samples, workers, desc="crossing")).astype(float)
    phat = float(hits.mean())
    return _estimate(hits, math.sqrt(phat * (1.0 - phat) / samples), seed)


def crossing_stability(grid: TriangularGrid, rho: float, seed: int, samples: int,
                       p: Optional[float] = None, workers: Optional[int] = None) -> MonteCarloEstimate:
    """
    E[f(X) f(Y)] with each site of Y kept from X w.p. rho and redrawn otherwise

    Args:
        grid (TriangularGrid): Lattice
        rho (float): Resampling probability
        seed (int): Experiment seed
        samples (int): Number of configuration pairs
        p (float): Opening probability (critical 1/2 by default)

    Returns:
        MonteCarloEstimate: Estimate with a CLT interval
    """
    p = PERCOLATION_CONFIG["default_p"] if p is None else p
    if not 0.0 <= rho <= 1.0:
        raise DomainError(f"rho must lie in [0, 1], got {rho}")
    if samples < 2:
        raise DomainError("samples must be >= 2")

    def block(b: int, size: int) -> np.ndarray:
        shape = (size, grid.sites)
        x = block_generator(seed, b, 0).random(shape) < p
        fresh = block_generator(seed, b, 1).random(shape) < p
        keep = block_generator(seed, b, 2).random(shape) < rho
        y = np.where(keep, x, fresh)
        return crossing_batch(grid, x) * crossing_batch(grid, y)

    products = np.concatenate(run_blocks(block, samples, workers, desc="stability")).astype(float)
    std_error = float(products.std(ddof=1) / math.sqrt(samples))
    estimate = _estimate(products, std_error, seed)
    logger.info("crossing stability n=%d rho=%.3g: %.5f +/- %.2e", grid.n, rho,
                estimate.estimate, std_error)
    return estimate


# ===============================================
# Exact spectra
# ===============================================

def crossing_table(grid: TriangularGrid) -> FunctionTable:
    """Crossing indicator over all 2^N configurations (bit i set = site i open)"""
    N = grid.sites
    limit = PERCOLATION_CONFIG["exact_max_sites"]
    if N > limit:
        raise CapacityError("exact spectrum needs a full 2^N table", required=N, cap=limit)
    index = np.arange(1 << N, dtype=np.int64)[:, None]
    configs = ((index >> np.arange(N)) & 1).astype(np.uint8)
    return FunctionTable(ProductSpace.uniform_cube(N), crossing_batch(grid, configs).astype(float))


def spectrum_expansion(grid: TriangularGrid) -> FourierExpansion:
    return expand(crossing_table(grid))


def exact_spectrum_small(grid: TriangularGrid) -> DegreeProfile:
    """
    Walsh-Hadamard degree profile of the crossing indicator

    Args:
        grid (TriangularGrid): Lattice with at most PERCOLATION_CONFIG["exact_max_sites"] sites

    Returns:
        DegreeProfile: Weight per degree, cumulative low-degree mass W(D) and sqrt(W(D))
    """
    expansion = spectrum_expansion(grid)
    weights = degree_weights(expansion)
    variance = expansion.variance
    cumulative = np.cumsum(weights)
    cumulative = np.concatenate([[0.0], cumulative[1:] - weights[0]])
    normalized = cumulative / variance if variance > 0 else np.zeros_like(cumulative)
    logger.info("exact spectrum n=%d: variance %.6f, W(1)=%.6f", grid.n, variance, cumulative[1])
    return DegreeProfile(
        n=grid.n, sites=grid.sites, mean=expansion.mean, variance=variance,
        weights=weights.tolist(), cumulative=cumulative.tolist(),
        normalized_cumulative=normalized.tolist(),
        low_degree_mass=np.sqrt(np.clip(cumulative, 0.0, None)).tolist(),
    )


def low_degree_trend(profiles: Sequence[DegreeProfile], D: int) -> List[Dict[str, float]]:
    """
    Normalised W(D) per grid size next to the reference shape n^(-1/2) D^(2/3)

    Finite sizes are far from the asymptotic regime, so the rows are reported
    for inspection only.
    """
    if D < 1:
        raise DomainError(f"D must be >= 1, got {D}")
    rows = []
    for profile in sorted(profiles, key=lambda pr: pr.n):
        degree = min(D, profile.sites)
        reference = profile.n ** -0.5 * degree ** (2.0 / 3.0)
        measured = profile.normalized_cumulative[degree]
        rows.append({"n": profile.n, "D": degree, "normalized_mass": measured,
                     "reference": reference, "ratio": measured / reference})
    return rows


__all__ = [
    'TriangularGrid', 'UnionFind', 'crossing', 'crossing_batch', 'crossing_probability',
    'crossing_stability', 'crossing_table', 'spectrum_expansion', 'exact_spectrum_small',
    'low_degree_trend',
]
