# src/analysis/efron_stein.py
"""
Efron-Stein decomposition of functions on finite product spaces
Components f_S, their norms, degree mass and the Markov contraction check
"""

from dataclasses import dataclass
from typing import Dict, Optional
import logging

import numpy as np

from ..core.config import ENUMERATION_CONFIG, TOLERANCES
from ..core.exceptions import CapacityError, DomainError
from ..core.models import ContractionEntry, MarkovContractReport
from .fourier import FunctionTable, popcount
from .maxcorr import markov_apply
from .product_space import ProductSpace, check_capacity

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ESDecomposition:
    """
    Components f_S stored as full-size tables, row `mask` of `components`

    Each row is constant along the coordinates outside S.
    """
    space: ProductSpace
    components: np.ndarray

    @property
    def n(self) -> int:
        return self.space.n

    def component(self, mask: int) -> FunctionTable:
        return FunctionTable(self.space, self.components[mask])

    def tables(self) -> Dict[int, FunctionTable]:
        return {mask: self.component(mask) for mask in range(self.components.shape[0])}

    def norms_sq(self) -> np.ndarray:
        """E[f_S^2] for every mask"""
        return (self.components ** 2) @ self.space.x_probabilities()

    @property
    def variance(self) -> float:
        return float(self.norms_sq()[1:].sum())

    def reconstruct(self) -> np.ndarray:
        return self.components.sum(axis=0)

    def check(self, table: Optional[FunctionTable] = None) -> Dict[str, float]:
        """
        Largest violations of the decomposition invariants

        Returns:
            Dict: reconstruction, orthogonality, conditional_vanishing and
                slice_constancy errors
        """
        probs = self.space.x_probabilities()
        shape = self.space.x_shape
        errors = {"orthogonality": 0.0, "conditional_vanishing": 0.0, "slice_constancy": 0.0}
        if table is not None:
            errors["reconstruction"] = float(np.max(np.abs(self.reconstruct() - table.values)))

        gram = self.components @ (probs[:, None] * self.components.T)
        errors["orthogonality"] = float(np.max(np.abs(gram - np.diag(np.diag(gram)))))

        marginals = self.space.x_marginals
        for mask in range(self.components.shape[0]):
            grid = self.components[mask].reshape(shape, order='F')
            for i in range(self.n):
                if mask >> i & 1:
                    p = marginals[i].probs_array().reshape([-1 if k == i else 1 for k in range(self.n)])
                    averaged = np.abs((grid * p).sum(axis=i)).max()
                    errors["conditional_vanishing"] = max(errors["conditional_vanishing"], float(averaged))
                else:
                    spread = float(np.ptp(grid, axis=i).max()) if shape[i] > 1 else 0.0
                    errors["slice_constancy"] = max(errors["slice_constancy"], spread)
        return errors

    def export(self, full: bool = False) -> Dict[str, dict]:
        """{mask: {"norm_sq": v}} with the component tables when `full`"""
        norms = self.norms_sq()
        out = {}
        for mask, norm in enumerate(norms):
            entry = {"norm_sq": float(norm)}
            if full:
                entry["table"] = self.components[mask].tolist()
            out[str(mask)] = entry
        return out


def decompose(table: FunctionTable) -> ESDecomposition:
    """
    Efron-Stein components f_S = sum_{T subset S} (-1)^{|S \\ T|} E[f | X_T]

    Conditional expectations are exact weighted averages over fibres. They are
    built top-down from the full set by averaging out one coordinate at a
    time, then turned into components by a Moebius transform over the subset
    lattice.

    Args:
        table (FunctionTable): Function to decompose

    Returns:
        ESDecomposition: Full-size component tables

    Raises:
        CapacityError: 2^n component tables would exceed the enumeration cap
    """
    space = table.space
    n = space.n
    if n > ENUMERATION_CONFIG["max_es_coordinates"]:
        raise CapacityError("too many coordinates for a dense decomposition",
                            required=n, cap=ENUMERATION_CONFIG["max_es_coordinates"])
    check_capacity((1 << n) * space.x_states, "component tables")

    shape = space.x_shape
    weights = [d.probs_array().reshape([-1 if k == i else 1 for k in range(n)])
               for i, d in enumerate(space.x_marginals)]
    full = (1 << n) - 1

    conditional = {full: table.grid()}
    for mask in range(full - 1, -1, -1):
        j = (~mask & full).bit_length() - 1       # highest coordinate not in mask
        parent = conditional[mask | 1 << j]
        conditional[mask] = (parent * weights[j]).sum(axis=j, keepdims=True)

    components = np.empty((1 << n, space.x_states))
    for mask, reduced in conditional.items():
        components[mask] = np.broadcast_to(reduced, shape).ravel(order='F')
    del conditional

    for i in range(n):
        h = 1 << i
        lattice = components.reshape(-1, 2, h, space.x_states)
        lattice[:, 1] -= lattice[:, 0]

    logger.debug("decomposed %d values into %d components", space.x_states, 1 << n)
    return ESDecomposition(space, components)


def es_degree_mass(decomposition: ESDecomposition, Dmax: int) -> float:
    """sum_{1<=|S|<=Dmax} ||f_S||^2 / Var f; 0 for constant f"""
    if Dmax < 0:
        raise DomainError(f"Dmax must be non-negative, got {Dmax}")
    norms = decomposition.norms_sq()
    variance = float(norms[1:].sum())
    if variance <= TOLERANCES["variance_floor"]:
        return 0.0
    degrees = popcount(np.arange(norms.size), decomposition.n)
    keep = (degrees >= 1) & (degrees <= Dmax)
    return float(min(1.0, norms[keep].sum() / variance))


def markov_contract_check(decomposition: ESDecomposition, space: ProductSpace) -> MarkovContractReport:
    """
    Verify ||T f_S|| <= (prod_{i in S} rho_i) ||f_S|| for every S

    T f_S = E[f_S(X) | Y] is summed over the joint atoms coordinate by
    coordinate, and the norm of T f_S is taken under the Y marginal. Also
    measures how far the decomposition of T f is from T applied to each f_S.

    Args:
        decomposition (ESDecomposition): Decomposition of f over the x side of space
        space (ProductSpace): Joint law with per-pair maximal correlations

    Returns:
        MarkovContractReport: One entry per subset plus the commutation error
    """
    if [d.support for d in space.x_marginals] != [d.support for d in decomposition.space.x_marginals]:
        raise DomainError("decomposition and space have different x supports")
    check_capacity(space.joint_states, "joint space")

    rhos = space.maxcorrs
    y_space = space.swapped()
    x_probs = space.x_probabilities()
    y_probs = y_space.x_probabilities()
    tol = TOLERANCES["exact"]

    entries = []
    contracted = np.empty((decomposition.components.shape[0], y_probs.size))
    for mask, values in enumerate(decomposition.components):
        moved = markov_apply(space, values)
        contracted[mask] = moved
        norm = float(np.sqrt(max(0.0, x_probs @ values ** 2)))
        moved_norm = float(np.sqrt(max(0.0, y_probs @ moved ** 2)))
        factor = float(np.prod([rhos[i] for i in range(space.n) if mask >> i & 1]))
        entries.append(ContractionEntry(subset=mask, norm=norm, contracted_norm=moved_norm,
                                        factor=factor, slack=factor * norm - moved_norm))

    moved_total = FunctionTable(y_space, contracted.sum(axis=0))
    commutation = float(np.max(np.abs(decompose(moved_total).components - contracted)))
    holds = all(entry.slack >= -tol for entry in entries)
    logger.info("markov contraction over %d subsets: holds=%s, commutation error %.2e",
                len(entries), holds, commutation)
    return MarkovContractReport(entries=entries, commutation_error=commutation, holds=holds, tolerance=tol)


__all__ = ['ESDecomposition', 'decompose', 'es_degree_mass', 'markov_contract_check']
