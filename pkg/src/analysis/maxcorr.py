# src/analysis/maxcorr.py
"""
Maximal (Hirschfeld-Gebelein-Renyi) correlation
Markov operators, induced output pairs and the non-separability of a function
"""

from dataclasses import dataclass
from typing import Callable, Optional, Tuple
import logging
import math

import numpy as np
import scipy.linalg as la

from ..core.config import (ENUMERATION_CONFIG, MONTE_CARLO_CONFIG, SPECTRAL_CONFIG,
                           TOLERANCES)
from ..core.exceptions import CapacityError, DomainError, NumericalError
from ..core.models import LemmaCheckReport, MonteCarloEstimate, NonSeparabilityReport
from ..utils.rng import run_blocks
from .fourier import FunctionTable
from .product_space import CorrelatedPair, ProductSpace, _sample_block, check_capacity

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MarkovOperator:
    """Conditional expectation T g(y) = E[g(X) | Y = y] of one pair"""
    pair: CorrelatedPair
    matrix: np.ndarray

    @classmethod
    def from_pair(cls, pair: CorrelatedPair) -> "MarkovOperator":
        joint = np.asarray(pair.joint)
        return cls(pair, (joint / joint.sum(axis=0)).T)

    def apply(self, values: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(values, dtype=float)

    def adjoint(self) -> "MarkovOperator":
        return MarkovOperator.from_pair(self.pair.transposed())

    def stochasticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix.sum(axis=1) - 1.0)))

    def mean_zero_norm(self) -> float:
        """Operator norm from mean-zero L2(X) to L2(Y)"""
        return maximal_correlation(self.pair)


def markov_apply(space: ProductSpace, values: np.ndarray) -> np.ndarray:
    """
    Apply the product Markov operator to a table over the x grid

    Args:
        space (ProductSpace): Joint law of (X, Y)
        values: Table over the x index space (coordinate 1 fastest)

    Returns:
        np.ndarray: E[g(X) | Y = y] over the y index space
    """
    acc = np.asarray(values, dtype=float).reshape(space.x_shape, order='F')
    for pair in space.pairs:
        acc = np.tensordot(acc, MarkovOperator.from_pair(pair).matrix.T, axes=([0], [0]))
    return acc.ravel(order='F')


def _normalized_joint(pair: CorrelatedPair) -> np.ndarray:
    px = pair.x_marginal.probs_array()
    py = pair.y_marginal.probs_array()
    return np.asarray(pair.joint) / np.sqrt(np.outer(px, py))


# ===============================================
# Maximal correlation
# ===============================================

def maximal_correlation(pair: CorrelatedPair) -> float:
    """
    Second singular value of Q_ab = P(a, b) / sqrt(P_X(a) P_Y(b))

    Dense SVD for small supports, deflated power iteration above
    SPECTRAL_CONFIG["dense_svd_max_support"].

    Args:
        pair (CorrelatedPair): Coordinate pair

    Returns:
        float: Maximal correlation in [0, 1]; 0 for degenerate marginals
    """
    if pair.x_marginal.is_degenerate or pair.y_marginal.is_degenerate:
        return 0.0
    if max(pair.joint.shape) > SPECTRAL_CONFIG["dense_svd_max_support"]:
        return maximal_correlation_power(pair)
    singular = la.svdvals(_normalized_joint(pair))
    return float(min(1.0, max(0.0, singular[1]))) if singular.size > 1 else 0.0


def maximal_correlation_power(pair: CorrelatedPair, tol: Optional[float] = None,
                              max_sweeps: Optional[int] = None) -> float:
    """
    sup E[f(X) (Tf)(Y)] over unit-variance mean-zero f, by power iteration

    Iterates Q^T Q with the leading pair (sqrt of the y marginal, eigenvalue 1)
    deflated; the square root of the top remaining eigenvalue is the maximal
    correlation.

    Raises:
        NumericalError: residual above tolerance after max_sweeps
    """
    if pair.x_marginal.is_degenerate or pair.y_marginal.is_degenerate:
        return 0.0
    tol = SPECTRAL_CONFIG["power_tol"] if tol is None else tol
    max_sweeps = SPECTRAL_CONFIG["max_sweeps"] if max_sweeps is None else max_sweeps

    Q = _normalized_joint(pair)
    lead = np.sqrt(pair.y_marginal.probs_array())
    M = Q.T @ Q - np.outer(lead, lead)

    rng = np.random.default_rng(0)
    u = rng.normal(size=lead.size)
    u -= (u @ lead) * lead
    u /= np.linalg.norm(u)

    residual = math.inf
    for sweep in range(max_sweeps):
        w = M @ u
        lam = float(u @ w)
        residual = float(np.linalg.norm(w - lam * u))
        if residual < tol:
            logger.debug("power iteration converged after %d sweeps", sweep + 1)
            return float(math.sqrt(min(1.0, max(0.0, lam))))
        w -= (w @ lead) * lead
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        u = w / norm
    raise NumericalError(f"power iteration did not converge in {max_sweeps} sweeps", residual=residual)


# ===============================================
# Induced pairs
# ===============================================

def _value_classes(values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    rounded = np.round(np.asarray(values, dtype=float), TOLERANCES["value_decimals"])
    support, inverse = np.unique(rounded, return_inverse=True)
    if support.size > ENUMERATION_CONFIG["max_range_size"]:
        raise CapacityError("output range too large", required=support.size,
                            cap=ENUMERATION_CONFIG["max_range_size"])
    return support, inverse


def induced_pair(f: FunctionTable, g: FunctionTable, space: ProductSpace) -> CorrelatedPair:
    """
    Joint law of (f(X), g(Y)) with output values merged after rounding

    Args:
        f (FunctionTable): Function over the x side
        g (FunctionTable): Function over the y side
        space (ProductSpace): Joint law of (X, Y)

    Returns:
        CorrelatedPair: Pushforward pair over range(f) x range(g)
    """
    if f.values.size != space.x_states or g.values.size != math.prod(space.y_shape):
        raise DomainError("f and g must be tabulated over the x and y sides of the space")
    check_capacity(space.joint_states, "joint space")
    f_support, f_class = _value_classes(f.values)
    g_support, g_class = _value_classes(g.values)

    onehot_f = np.zeros((f.values.size, f_support.size))
    onehot_f[np.arange(f.values.size), f_class] = 1.0
    onehot_g = np.zeros((g.values.size, g_support.size))
    onehot_g[np.arange(g.values.size), g_class] = 1.0

    acc = onehot_f.reshape(space.x_shape + (f_support.size,), order='F')
    for pair in space.pairs:
        acc = np.tensordot(acc, np.asarray(pair.joint), axes=([0], [0]))
    rhs = onehot_g.reshape(space.y_shape + (g_support.size,), order='F')
    axes = list(range(1, space.n + 1))
    joint = np.tensordot(acc, rhs, axes=(axes, list(range(space.n))))
    joint = np.clip(joint, 0.0, None)
    joint /= joint.sum()
    return CorrelatedPair.from_joint(joint, f_support.tolist(), g_support.tolist())


def estimate_induced_pair(f: Callable[[np.ndarray], np.ndarray], g: Callable[[np.ndarray], np.ndarray],
                          space: ProductSpace, seed: int, samples: int, batches: int = 20,
                          workers: Optional[int] = None) -> Tuple[CorrelatedPair, MonteCarloEstimate]:
    """
    Monte Carlo fallback for induced_pair when the joint is too large to enumerate

    The empirical joint of (f(X), g(Y)) is built from `samples` draws; the
    confidence interval on its maximal correlation comes from batch means.

    Args:
        f, g: Functions vectorised over (N, n) arrays
        space (ProductSpace): Joint law
        seed (int): Experiment seed
        samples (int): Number of draws
        batches (int): Batches for the interval

    Returns:
        Tuple[CorrelatedPair, MonteCarloEstimate]: Empirical pair and its maxcorr estimate
    """
    if samples < batches * 10:
        raise DomainError(f"need at least {batches * 10} samples for {batches} batches")

    def block(b: int, size: int):
        x, y = _sample_block(space, seed, b, size)
        return np.asarray(f(x), dtype=float), np.asarray(g(y), dtype=float)

    results = run_blocks(block, samples, workers, desc="induced pair")
    fx = np.round(np.concatenate([r[0] for r in results]), TOLERANCES["value_decimals"])
    gy = np.round(np.concatenate([r[1] for r in results]), TOLERANCES["value_decimals"])

    def empirical(a: np.ndarray, b: np.ndarray) -> CorrelatedPair:
        a_support, a_class = np.unique(a, return_inverse=True)
        b_support, b_class = np.unique(b, return_inverse=True)
        counts = np.zeros((a_support.size, b_support.size))
        np.add.at(counts, (a_class, b_class), 1.0)
        return CorrelatedPair.from_joint(counts / counts.sum(), a_support.tolist(), b_support.tolist())

    pair = empirical(fx, gy)
    per_batch = np.array([empirical(a, b).maxcorr for a, b in
                          zip(np.array_split(fx, batches), np.array_split(gy, batches))])
    std_error = float(per_batch.std(ddof=1) / math.sqrt(batches))
    z = MONTE_CARLO_CONFIG["confidence_z"]
    estimate = pair.maxcorr
    report = MonteCarloEstimate(estimate=estimate, ci_low=estimate - z * std_error,
                                ci_high=estimate + z * std_error, std_error=std_error,
                                samples=samples, seed=seed, degenerate=pair.degenerate)
    return pair, report


# ===============================================
# Non-separability
# ===============================================

def non_separability(f: FunctionTable, space: Optional[ProductSpace] = None) -> NonSeparabilityReport:
    """
    1 minus the squared maximal correlation between L2(f(X)) and L2(X_1)+...+L2(X_n)

    For g over range(f), the first-order Efron-Stein component of g(f) on
    coordinate i is C_i g with C_i[a, k] = P(f = r_k | X_i = a). The top
    eigenvalue of sum_i C_i^T diag(p_i) C_i on the mean-zero subspace of
    L2(f(X)) is the squared correlation.

    Args:
        f (FunctionTable): Function to measure
        space (ProductSpace): Space of f (defaults to f.space)

    Returns:
        NonSeparabilityReport: epsilon, corr_to_separable and the extremal witness
    """
    space = f.space if space is None else space
    check_capacity(space.x_states, "x space")
    support, classes = _value_classes(f.values)
    K = support.size
    if K == 1:
        logger.info("constant function: non-separability reported as degenerate")
        return NonSeparabilityReport(epsilon=0.0, corr_to_separable=1.0, witness={}, degenerate=True)

    probs = space.x_probabilities()
    q = np.bincount(classes, weights=probs, minlength=K)
    index = np.indices(space.x_shape).reshape(space.n, -1, order='F')

    A = np.zeros((K, K))
    for i, dist in enumerate(space.x_marginals):
        p_i = dist.probs_array()
        mass = np.bincount(index[i] * K + classes, weights=probs, minlength=dist.size * K)
        C = mass.reshape(dist.size, K) / p_i[:, None]
        A += C.T @ (p_i[:, None] * C)

    root = np.sqrt(q)
    Q_inv = 1.0 / root
    B = Q_inv[:, None] * A * Q_inv[None, :]
    # orthonormal basis of root's complement; the constant direction is excluded
    U = la.qr(np.column_stack([root, np.eye(K)]), mode='economic')[0][:, 1:K]
    reduced = U.T @ B @ U
    eigenvalues, vectors = la.eigh((reduced + reduced.T) / 2.0)
    lam = float(min(1.0, max(0.0, eigenvalues[-1])))

    witness = Q_inv * (U @ vectors[:, -1])
    witness /= math.sqrt(float(q @ witness ** 2))
    first = np.flatnonzero(np.abs(witness) > 1e-12)
    if first.size and witness[first[0]] < 0:
        witness = -witness

    return NonSeparabilityReport(
        epsilon=1.0 - lam,
        corr_to_separable=math.sqrt(lam),
        witness={f"{value:.12g}": float(w) for value, w in zip(support, witness)},
        degenerate=False,
    )


def check_nonseparable_lemma(f: FunctionTable, space: ProductSpace) -> LemmaCheckReport:
    """
    Compare the induced-pair maximal correlation with (1 - eps) rho + eps rho^2

    eps comes from non_separability and rho is the largest pair maximal
    correlation. The y side must carry the same supports as the x side so f
    can be evaluated on both.
    """
    if [d.support for d in space.x_marginals] != [d.support for d in space.y_marginals]:
        raise DomainError("x and y supports differ; f cannot be applied to Y")
    report = non_separability(f, space)
    eps = report.epsilon
    rho = float(space.maxcorrs.max())
    f_on_y = FunctionTable(space.swapped(), f.values, f.exact)
    measured = induced_pair(f, f_on_y, space).maxcorr
    bound = (1.0 - eps) * rho + eps * rho ** 2
    tol = f.tolerance
    return LemmaCheckReport(stability=measured, epsilon=eps, rho=rho, bound=bound,
                            holds=measured <= bound + tol, tolerance=tol)


__all__ = [
    'MarkovOperator', 'markov_apply', 'maximal_correlation', 'maximal_correlation_power',
    'induced_pair', 'estimate_induced_pair', 'non_separability', 'check_nonseparable_lemma',
]
