# src/analysis/hierarchy.py
"""
Hierarchical functions for hierstab
Trees of components over disjoint input blocks: certification, evaluation,
recursive / exact / Monte Carlo stability and the decay bound calculator
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union
import logging
import math

import numpy as np

from ..core.config import ANALYTIC_CONFIG, MONTE_CARLO_CONFIG, TOLERANCES
from ..core.exceptions import (ArityError, CertificationError, DomainError,
                               StructureError)
from ..core.models import (ComponentKind, DecayBoundReport, FunctionDescriptor,
                           HierarchyDescriptor, MonteCarloEstimate, NodeCertificate)
from ..utils.rng import run_blocks
from . import catalog
from .fourier import FourierExpansion, FunctionTable, distance_to_lin, expand, stability
from .maxcorr import induced_pair, non_separability
from .product_space import (DiscreteLeafSampler, FiniteDistribution, ProductSpace,
                            UniformLeafSampler, check_capacity, joint_expectation,
                            make_resampling_coupling, resampled_draws)

logger = logging.getLogger(__name__)


# ===============================================
# Tree types
# ===============================================

@dataclass(frozen=True, eq=False)
class Component:
    """
    Function of the m child outputs, vectorised over an (N, m) array

    Table components carry the FunctionTable they were built from; looking up
    a value outside its supports raises DomainError. Analytic components are
    plain floating point functions with no finite support.
    """
    name: str
    arity: int
    fn: Callable[[np.ndarray], np.ndarray]
    analytic: bool = False
    table: Optional[FunctionTable] = None

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.arity:
            raise ArityError(f"{self.name} takes {self.arity} inputs, got {points.shape[1]}")
        return np.asarray(self.fn(points), dtype=float)

    def tabulate(self, space: ProductSpace) -> FunctionTable:
        if space.n != self.arity:
            raise ArityError(f"{self.name} takes {self.arity} inputs, space has {space.n}")
        if self.table is not None:
            return FunctionTable(space, self.table.lookup(space.x_points()), self.table.exact)
        return FunctionTable.from_callable(space, self.fn)

    @classmethod
    def from_table(cls, table: FunctionTable, name: str = "table") -> "Component":
        return cls(name=name, arity=table.n, fn=table.lookup, table=table)

    @classmethod
    def named(cls, name: str, arity: int, width: Optional[int] = None) -> "Component":
        return cls(name=name, arity=arity, fn=catalog.named_callable(name, width))


@dataclass(frozen=True, eq=False)
class Leaf:
    """Input wire carrying coordinate `index`"""
    index: int

    def leaves(self) -> List[int]:
        return [self.index]


@dataclass(frozen=True, eq=False)
class Internal:
    component: Component
    children: Tuple["HierarchyNode", ...]
    declared_epsilon: float = 1e-6
    kind: ComponentKind = ComponentKind.MULTILINEAR

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 2:
            raise StructureError("an internal node needs at least two children")
        if self.component.arity != len(self.children):
            raise StructureError(f"component {self.component.name} takes {self.component.arity} "
                                 f"inputs but has {len(self.children)} children")
        if not 0.0 < self.declared_epsilon <= 1.0:
            raise DomainError(f"declared epsilon must lie in (0, 1], got {self.declared_epsilon}")

    def leaves(self) -> List[int]:
        return [i for child in self.children for i in child.leaves()]


HierarchyNode = Union[Leaf, Internal]


def leaf_count(node: HierarchyNode) -> int:
    return len(node.leaves())


def is_analytic(node: HierarchyNode) -> bool:
    if isinstance(node, Leaf):
        return False
    return node.component.analytic or any(is_analytic(c) for c in node.children)


def check_partition(node: HierarchyNode, n: Optional[int] = None) -> int:
    """Leaves must cover 0..n-1 exactly once; returns n"""
    leaves = node.leaves()
    n = len(leaves) if n is None else n
    seen = set()
    for i in leaves:
        if i in seen:
            raise StructureError(f"leaf {i} is used by more than one child")
        if not 0 <= i < n:
            raise StructureError(f"leaf {i} is outside 0..{n - 1}")
        seen.add(i)
    if len(seen) != n:
        missing = sorted(set(range(n)) - seen)
        raise StructureError(f"leaves {missing} are not consumed by any component")
    return n


# ===============================================
# Evaluation
# ===============================================

def evaluate_batch(node: HierarchyNode, points: np.ndarray) -> np.ndarray:
    """Bottom-up evaluation at an (N, n) array of leaf values"""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if isinstance(node, Leaf):
        if node.index >= points.shape[1]:
            raise ArityError(f"leaf {node.index} outside an input of width {points.shape[1]}")
        return points[:, node.index]
    inputs = np.column_stack([evaluate_batch(child, points) for child in node.children])
    return node.component(inputs)


def evaluate(node: HierarchyNode, x: Sequence[float]) -> float:
    """f(x) for one input vector"""
    x = np.asarray(x, dtype=float).ravel()
    n = leaf_count(node)
    if x.size != n:
        raise ArityError(f"expected {n} inputs, got {x.size}")
    return float(evaluate_batch(node, x[None, :])[0])


def tabulate(node: HierarchyNode, space: Optional[ProductSpace] = None) -> FunctionTable:
    """Table of the composed function over the leaf space"""
    space = ProductSpace.uniform_cube(leaf_count(node)) if space is None else space
    check_capacity(space.x_states, "leaf space")
    return FunctionTable(space, evaluate_batch(node, space.x_points()))


# ===============================================
# Certification
# ===============================================

@dataclass(eq=False)
class CertifiedTree:
    """Certification results, keyed by node path ("root", "root.0", ...)"""
    root: HierarchyNode
    space: Optional[ProductSpace]
    certificates: List[NodeCertificate] = field(default_factory=list)
    tables: Dict[str, FunctionTable] = field(default_factory=dict)
    expansions: Dict[str, FourierExpansion] = field(default_factory=dict)
    outputs: Dict[str, FiniteDistribution] = field(default_factory=dict)

    @property
    def depth(self) -> int:
        return self.certificates[-1].depth if self.certificates else 0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.certificates)

    @property
    def epsilon(self) -> float:
        """Smallest certified epsilon over all components"""
        return min((c.certified_epsilon for c in self.certificates), default=1.0)

    def failures(self) -> List[NodeCertificate]:
        return [c for c in self.certificates if not c.passed]

    def certificate(self, path: str) -> NodeCertificate:
        for c in self.certificates:
            if c.path == path:
                return c
        raise KeyError(path)


class HierarchyCertifier:
    """
    Certifies every component of a tree bottom-up

    For each internal node the child output laws (pushforwards of the leaf
    space) form the component's input space. Multilinear components are
    certified by distance_to_lin, general ones by non_separability. Analytic
    components are measured on a uniform grid over their domain.
    """

    def __init__(self, space: Optional[ProductSpace] = None, strict: bool = True):
        self.space = space
        self.strict = strict
        self.stats = {
            'components_certified': 0,
            'components_failed': 0,
            'analytic_components': 0,
        }

    def certify(self, root: HierarchyNode) -> CertifiedTree:
        n = check_partition(root, self.space.n if self.space is not None else None)
        if self.space is None and not is_analytic(root):
            self.space = ProductSpace.uniform_cube(n)
        tree = CertifiedTree(root=root, space=self.space)
        self._visit(root, "root", tree)

        failures = tree.failures()
        if failures:
            names = ", ".join(f"{c.path} ({c.certified_epsilon:.6g} < {c.declared_epsilon:.6g})"
                              for c in failures)
            logger.warning("certification failed at %s", names)
            if self.strict:
                raise CertificationError(f"certified epsilon below declared at {names}", failures)
        logger.info("certified %d components, depth %d, min epsilon %.6g",
                    len(tree.certificates), tree.depth, tree.epsilon)
        return tree

    def _visit(self, node: HierarchyNode, path: str, tree: CertifiedTree) -> int:
        if isinstance(node, Leaf):
            if tree.space is not None:
                tree.outputs[path] = tree.space.x_marginals[node.index]
            return 0

        depths = [self._visit(child, f"{path}.{k}", tree) for k, child in enumerate(node.children)]
        depth = 1 + min(depths)

        if node.component.analytic:
            certified, detail = self._certify_analytic(node)
        else:
            child_dists = [tree.outputs.get(f"{path}.{k}") for k in range(len(node.children))]
            if any(d is None for d in child_dists):
                raise StructureError(f"{path}: finite component {node.component.name} over analytic inputs")
            child_space = ProductSpace.from_marginals(child_dists)
            check_capacity(child_space.x_states, f"{path} input space")
            table = node.component.tabulate(child_space)
            tree.tables[path] = table
            tree.outputs[path] = FiniteDistribution.from_samples(
                table.values, weights=child_space.x_probabilities())
            certified, detail = self._certify_table(node, table, path, tree)

        passed = certified >= node.declared_epsilon - TOLERANCES["exact"]
        self.stats['components_certified'] += 1
        if not passed:
            self.stats['components_failed'] += 1
        tree.certificates.append(NodeCertificate(
            path=path, kind=node.kind, declared_epsilon=node.declared_epsilon,
            certified_epsilon=certified, depth=depth, passed=passed, detail=detail))
        return depth

    def _certify_table(self, node: Internal, table: FunctionTable, path: str,
                       tree: CertifiedTree) -> Tuple[float, str]:
        if node.kind == ComponentKind.MULTILINEAR:
            expansion = expand(table)
            tree.expansions[path] = expansion
            return distance_to_lin(expansion), "distance to linear"
        report = non_separability(table)
        if report.degenerate:
            return 0.0, "constant component"
        return report.epsilon, "non-separability"

    def _certify_analytic(self, node: Internal) -> Tuple[float, str]:
        self.stats['analytic_components'] += 1
        low, high = ANALYTIC_CONFIG["domain"]
        grid = FiniteDistribution.uniform(np.linspace(low, high, ANALYTIC_CONFIG["grid_points"]))
        grid_space = ProductSpace.from_marginals([grid] * node.component.arity)
        table = FunctionTable.from_callable(grid_space, node.component.fn)
        report = non_separability(table)
        certified = 0.0 if report.degenerate else report.epsilon
        return certified, f"non-separability on a {ANALYTIC_CONFIG['grid_points']}-point grid"


def certify(node: HierarchyNode, space: Optional[ProductSpace] = None, strict: bool = True) -> CertifiedTree:
    """
    Certify a hierarchy (convenience wrapper around HierarchyCertifier)

    Args:
        node: Root of the tree
        space (ProductSpace): Leaf space; the uniform cube when omitted
        strict (bool): Raise CertificationError when a component falls short

    Returns:
        CertifiedTree: Per-node certificates, tables and output laws
    """
    return HierarchyCertifier(space, strict).certify(node)


# ===============================================
# Stability
# ===============================================

def stability_recursive(tree: Union[CertifiedTree, HierarchyNode], rho: float,
                        space: Optional[ProductSpace] = None) -> float:
    """
    Propagate wire correlations bottom-up

    Leaves carry rho. A multilinear node outputs the exact product formula
    sum_S (prod_{i in S} rho_i) f_hat(S)^2 / Var at its children's values; a
    general node outputs the maximal correlation of its induced pair under
    resampling couplings at those values, which only bounds the truth.

    Args:
        tree: Certified tree, or a root node (certified non-strictly here)
        rho (float): Leaf correlation in [0, 1]
        space (ProductSpace): Leaf space when a bare node is given

    Returns:
        float: Value propagated to the root
    """
    if not 0.0 <= rho <= 1.0:
        raise DomainError(f"rho must lie in [0, 1], got {rho}")
    if not isinstance(tree, CertifiedTree):
        tree = certify(tree, space, strict=False)

    def visit(node: HierarchyNode, path: str) -> float:
        if isinstance(node, Leaf):
            return rho
        values = [visit(child, f"{path}.{k}") for k, child in enumerate(node.children)]
        if node.component.analytic:
            raise DomainError(f"{path}: analytic components only support stability_mc")
        if node.kind == ComponentKind.MULTILINEAR:
            expansion = tree.expansions.get(path) or expand(tree.tables[path])
            return stability(expansion, values)
        table = tree.tables[path]
        child_space = ProductSpace(pairs=[make_resampling_coupling(d, v) for d, v in
                                          zip(table.space.x_marginals, values)])
        on_y = FunctionTable(child_space.swapped(), table.values, table.exact)
        return induced_pair(table, on_y, child_space).maxcorr

    return float(visit(tree.root, "root"))


def stability_exact(node: HierarchyNode, rho: float, space: Optional[ProductSpace] = None) -> float:
    """
    Corr(f(X), f(Y)) by summation over the joint atoms of the rho-resampled leaf space
    """
    space = ProductSpace.uniform_cube(leaf_count(node)) if space is None else space
    coupled = ProductSpace.from_marginals(space.x_marginals, rho)
    table = tabulate(node, space)
    variance = table.variance
    if variance <= TOLERANCES["variance_floor"]:
        return 0.0
    centered = table.values - table.mean
    return float(joint_expectation(centered, centered, coupled) / variance)


def _pearson_with_ci(a: np.ndarray, b: np.ndarray, seed: int) -> MonteCarloEstimate:
    """Sample correlation with a delta-method interval"""
    samples = a.size
    sa, sb = a.std(), b.std()
    floor = math.sqrt(TOLERANCES["variance_floor"])
    if sa <= floor or sb <= floor:
        return MonteCarloEstimate(estimate=0.0, ci_low=0.0, ci_high=0.0, std_error=0.0,
                                  samples=samples, seed=seed, degenerate=True)
    za = (a - a.mean()) / sa
    zb = (b - b.mean()) / sb
    r = float(np.mean(za * zb))
    influence = za * zb - r * (za ** 2 + zb ** 2) / 2.0
    std_error = float(influence.std(ddof=1) / math.sqrt(samples))
    z = MONTE_CARLO_CONFIG["confidence_z"]
    return MonteCarloEstimate(estimate=r, ci_low=max(-1.0, r - z * std_error),
                              ci_high=min(1.0, r + z * std_error), std_error=std_error,
                              samples=samples, seed=seed)


def stability_mc(node: HierarchyNode, rho: float, seed: int, samples: int,
                 space: Optional[ProductSpace] = None, sampler=None,
                 workers: Optional[int] = None) -> MonteCarloEstimate:
    """
    Monte Carlo Corr(f(X), f(Y)) under rho-resampling of the leaves

    Blocks draw from fixed Philox streams, so the estimate depends only on the
    seed. Analytic trees draw leaves uniformly from ANALYTIC_CONFIG["domain"].

    Args:
        node: Root of the tree
        rho (float): Resampling probability in [0, 1]
        seed (int): Experiment seed
        samples (int): Number of pairs (at least MONTE_CARLO_CONFIG["min_hierarchy_samples"])
        space (ProductSpace): Finite leaf laws (uniform bits by default)
        sampler: Custom leaf sampler plug-in
        workers (int): Worker threads

    Returns:
        MonteCarloEstimate: Estimate with a 95% interval
    """
    minimum = MONTE_CARLO_CONFIG["min_hierarchy_samples"]
    if samples < minimum:
        raise DomainError(f"stability_mc needs at least {minimum} samples, got {samples}")
    if not 0.0 <= rho <= 1.0:
        raise DomainError(f"rho must lie in [0, 1], got {rho}")
    n = check_partition(node)
    if sampler is None:
        if space is not None:
            sampler = DiscreteLeafSampler.from_space(space)
        elif is_analytic(node):
            sampler = UniformLeafSampler(n, *ANALYTIC_CONFIG["domain"])
        else:
            sampler = DiscreteLeafSampler([FiniteDistribution.fair_bit()] * n)

    def block(b: int, size: int):
        x, y = resampled_draws(sampler, rho, seed, b, size)
        return evaluate_batch(node, x), evaluate_batch(node, y)

    results = run_blocks(block, samples, workers, desc="stability_mc")
    a = np.concatenate([r[0] for r in results])
    b = np.concatenate([r[1] for r in results])
    estimate = _pearson_with_ci(a, b, seed)
    logger.info("stability_mc rho=%.4g samples=%d -> %.6f +/- %.2e",
                rho, samples, estimate.estimate, estimate.std_error)
    return estimate


# ===============================================
# Decay bounds
# ===============================================

def decay_bounds(epsilon: float, delta: Optional[float], rho: float, d: int,
                 resilient_t: Optional[int] = None, exact: Optional[float] = None,
                 exact_or_mc: Optional[MonteCarloEstimate] = None) -> DecayBoundReport:
    """
    Decay of g^d(rho) with g(x) = (1 - eps) x + eps x^2

    alpha = (eps - delta) / eps is the largest point with g(x) <= (1 - delta) x
    below it. N is the number of steps the iteration needs, started at rho,
    to fall to alpha. The packaged constant C = 1/log(1 + eps alpha) +
    1/log(1/(1 - alpha)) satisfies C log(1/(1 - rho)) >= N, so the closed
    form (1 - delta)^(d - C log(1/(1 - rho))) dominates g^d(rho) for every d.

    Args:
        epsilon (float): Non-linearity in (0, 1]
        delta (float): Rate parameter in (0, epsilon); epsilon / 2 when None
        rho (float): Leaf correlation in [0, 1)
        d (int): Depth
        resilient_t (int): Also report rho^((t+1)^d)
        exact (float): Exact stability to attach
        exact_or_mc (MonteCarloEstimate): Measured stability to attach

    Returns:
        DecayBoundReport: All bounds for this (epsilon, delta, rho, d)
    """
    delta = epsilon / 2.0 if delta is None else delta
    if not 0.0 < epsilon <= 1.0:
        raise DomainError(f"epsilon must lie in (0, 1], got {epsilon}")
    if not 0.0 < delta < epsilon:
        raise DomainError(f"delta must lie in (0, epsilon), got {delta}")
    if not 0.0 <= rho < 1.0:
        raise DomainError(f"rho must lie in [0, 1), got {rho}")
    if d < 1:
        raise DomainError(f"depth must be >= 1, got {d}")

    def g(x: float) -> float:
        return (1.0 - epsilon) * x + epsilon * x * x

    alpha = (epsilon - delta) / epsilon
    growth = math.log1p(epsilon * alpha)
    if rho <= alpha:
        N = 0
    else:
        N = max(0, math.ceil(math.log((1.0 - alpha) / (1.0 - rho)) / growth))
    C = 1.0 / growth + 1.0 / math.log(1.0 / (1.0 - alpha))

    steps, x = 0, rho
    while x > alpha and steps < N:
        x = g(x)
        steps += 1

    iterate = rho
    for _ in range(d):
        iterate = g(iterate)

    exponent = d - C * math.log(1.0 / (1.0 - rho))
    closed_form = (1.0 - delta) ** exponent

    return DecayBoundReport(
        d=d, epsilon=epsilon, delta=delta, rho=rho, alpha=alpha, N=N,
        steps_to_alpha=steps, C=C, iterate_bound=iterate, closed_form=closed_form,
        tightness_floor=(1.0 - epsilon) ** d * rho,
        doubly_exponential=rho ** (2 ** d) if epsilon == 1.0 else None,
        resilient_t=resilient_t,
        resilient=rho ** ((resilient_t + 1) ** d) if resilient_t is not None else None,
        exact=exact, exact_or_mc=exact_or_mc,
    )


# ===============================================
# Builders
# ===============================================

def _balanced(depth: int, fan_in: int, make: Callable[[int, List[HierarchyNode]], Internal]) -> HierarchyNode:
    """Complete tree; `make(level, children)` builds the node `level` steps above the leaves"""
    if depth < 1:
        raise DomainError(f"depth must be >= 1, got {depth}")
    nodes: List[HierarchyNode] = [Leaf(i) for i in range(fan_in ** depth)]
    for level in range(1, depth + 1):
        nodes = [make(level, nodes[k:k + fan_in]) for k in range(0, len(nodes), fan_in)]
    return nodes[0]


def recursive_majority(depth: int, declared_epsilon: float = 0.25,
                       kind: ComponentKind = ComponentKind.MULTILINEAR) -> HierarchyNode:
    """Maj3 of Maj3 of ... over 3^depth bits"""
    maj3 = Component.named("maj3", 3)
    return _balanced(depth, 3, lambda level, ch: Internal(maj3, ch, declared_epsilon, kind))


def parity_tree(depth: int, declared_epsilon: float = 1.0,
                kind: ComponentKind = ComponentKind.MULTILINEAR) -> HierarchyNode:
    """2-bit parities over 2^depth bits"""
    xor = Component.named("parity", 2)
    return _balanced(depth, 2, lambda level, ch: Internal(xor, ch, declared_epsilon, kind))


def cos_arccos_tree(depth: int, declared_epsilon: float = 0.01) -> HierarchyNode:
    """
    cos(pi x_1) just above the leaves, arccos(x_1)/pi one level up, alternating

    At every even depth the tree outputs its first input exactly.
    """
    cos = Component("cos_pi", 2, catalog.cos_pi, analytic=True)
    arccos = Component("arccos_over_pi", 2, catalog.arccos_over_pi, analytic=True)
    return _balanced(depth, 2, lambda level, ch: Internal(
        cos if level % 2 else arccos, ch, declared_epsilon, ComponentKind.GENERAL))


def majority_leak_tree(depth: int, declared_epsilon: float = 0.25,
                       kind: ComponentKind = ComponentKind.GENERAL) -> HierarchyNode:
    """
    x_1 + 10 maj(x_1, x_2, x_3) at the leaves, then B_2(y_1) + 10 maj(B_1(y)) above

    The root computes x_1 + 10 * recursive_majority(x), so the first input
    keeps a fixed share of the output whatever the depth.
    """
    leaf = Component("leak_leaf", 3, catalog.leak_leaf)
    upper = Component("leak_upper", 3, catalog.leak_upper)
    return _balanced(depth, 3, lambda level, ch: Internal(
        leaf if level == 1 else upper, ch, declared_epsilon, kind))


def majority_leak_floor(depth: int, rho: float) -> Dict[str, float]:
    """
    Analytic lower bounds on the stability of majority_leak_tree(depth)

    The output is x_1 + 10 M with M the depth-d recursive majority, whose
    degree-one coefficients are all 2^-d. Every Fourier term contributes
    non-negatively, so the degree-one part alone gives rho W_1 / Var.
    """
    c = 0.5 ** depth
    variance = 101.0 + 20.0 * c
    x1_coefficient = 1.0 + 10.0 * c
    degree_one = x1_coefficient ** 2 + (3 ** depth - 1) * (10.0 * c) ** 2
    return {
        "depth": depth,
        "rho": rho,
        "variance": variance,
        "x1_coefficient": x1_coefficient,
        "degree_one_weight": degree_one,
        "x1_channel_floor": rho * x1_coefficient ** 2 / variance,
        "degree_one_floor": rho * degree_one / variance,
        "limit_floor": rho / 101.0,
    }


def hierarchy_from_descriptor(descriptor, space: Optional[ProductSpace] = None) -> HierarchyNode:
    """
    Build a tree from its JSON descriptor

    Table components are indexed over their children's output supports, which
    are pushed forward from the leaf space (uniform bits when omitted).

    Args:
        descriptor: HierarchyDescriptor or its dict form
        space (ProductSpace): Leaf space

    Returns:
        HierarchyNode: Root node
    """
    if not isinstance(descriptor, HierarchyDescriptor):
        descriptor = HierarchyDescriptor.model_validate(descriptor)

    def count(d: HierarchyDescriptor) -> int:
        return 1 if d.leaf is not None else sum(count(c) for c in d.children)

    space = ProductSpace.uniform_cube(count(descriptor)) if space is None else space

    def build(d: HierarchyDescriptor) -> Tuple[HierarchyNode, FiniteDistribution]:
        if d.leaf is not None:
            if d.leaf >= space.n:
                raise StructureError(f"leaf {d.leaf} outside a space of {space.n} coordinates")
            return Leaf(d.leaf), space.x_marginals[d.leaf]
        built = [build(c) for c in d.children]
        children = [node for node, _ in built]
        child_space = ProductSpace.from_marginals([dist for _, dist in built])
        component = _component_from(d.component, child_space)
        table = component.tabulate(child_space)
        output = FiniteDistribution.from_samples(table.values, weights=child_space.x_probabilities())
        return Internal(component, children, d.epsilon, d.kind), output

    root, _ = build(descriptor)
    check_partition(root, space.n)
    return root


def _component_from(fd: FunctionDescriptor, child_space: ProductSpace) -> Component:
    if fd.kind == "table":
        return Component.from_table(catalog.build_function(fd, child_space))
    arity = fd.n or child_space.n
    if arity != child_space.n:
        raise StructureError(f"{fd.name} with n={arity} has {child_space.n} children")
    return Component.named(fd.name, arity, fd.width)


__all__ = [
    'Component', 'Leaf', 'Internal', 'HierarchyNode', 'leaf_count', 'is_analytic',
    'check_partition', 'evaluate', 'evaluate_batch', 'tabulate', 'CertifiedTree',
    'HierarchyCertifier', 'certify', 'stability_recursive', 'stability_exact',
    'stability_mc', 'decay_bounds', 'recursive_majority', 'parity_tree',
    'cos_arccos_tree', 'majority_leak_tree', 'majority_leak_floor',
    'hierarchy_from_descriptor',
]
