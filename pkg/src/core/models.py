# src/core/models.py
"""
Pydantic data models for hierstab
Defines JSON descriptors, report objects and experiment configuration
"""

from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class ComponentKind(str, Enum):
    """How a hierarchy component is certified"""
    MULTILINEAR = "multilinear"
    GENERAL = "general"


class CouplingKind(str, Enum):
    """Coupling descriptors accepted for a coordinate pair"""
    RESAMPLE = "resample"
    EXPLICIT = "explicit"


class Command(str, Enum):
    """Command line sub-commands"""
    ANALYZE = "analyze"
    HIERARCHY = "hierarchy"
    DECAY = "decay"
    MAXCORR = "maxcorr"
    ES = "es"
    PERCOLATION = "percolation"
    DEMO = "demo"


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"


def parse_probability(value: Union[str, float, int]) -> float:
    """Parse a probability given as a double or a decimal / fraction string"""
    if isinstance(value, str):
        return float(Fraction(value.strip()))
    return float(value)


# ===============================================
# Descriptors
# ===============================================

class CouplingDescriptor(BaseModel):
    """Coupling of one coordinate pair (X_i, Y_i)"""
    kind: CouplingKind = Field(..., description="resample or explicit")
    rho: Optional[float] = Field(None, ge=0.0, le=1.0, description="Resampling probability")
    joint: Optional[List[List[float]]] = Field(None, description="Joint pmf, rows index x")

    @field_validator('joint', mode='before')
    @classmethod
    def parse_joint(cls, v):
        if v is None:
            return v
        return [[parse_probability(p) for p in row] for row in v]

    @model_validator(mode='after')
    def check_kind_fields(self):
        if self.kind == CouplingKind.RESAMPLE and self.rho is None:
            raise ValueError('resample coupling requires "rho"')
        if self.kind == CouplingKind.EXPLICIT and not self.joint:
            raise ValueError('explicit coupling requires "joint"')
        return self


class PairDescriptor(BaseModel):
    """One coordinate of a product space"""
    support: List[float] = Field(..., min_length=1)
    probs: List[float] = Field(..., min_length=1)
    y_support: Optional[List[float]] = Field(None, description="Y support for explicit joints")
    coupling: CouplingDescriptor

    @field_validator('probs', mode='before')
    @classmethod
    def parse_probs(cls, v):
        return [parse_probability(p) for p in v]

    @model_validator(mode='after')
    def check_lengths(self):
        if len(self.support) != len(self.probs):
            raise ValueError('support and probs must have the same length')
        return self


class SpaceDescriptor(BaseModel):
    """{"pairs": [...]}"""
    pairs: List[PairDescriptor] = Field(..., min_length=1)


class FunctionDescriptor(BaseModel):
    """{"kind":"table","values":[...]} or {"kind":"named","name":...,"n":k}"""
    kind: Literal["table", "named"]
    values: Optional[List[float]] = None
    name: Optional[Literal["maj3", "majority", "parity", "dictator", "tribes"]] = None
    n: Optional[int] = Field(None, ge=1)
    width: Optional[int] = Field(None, ge=1, description="Tribe width for tribes")

    @model_validator(mode='after')
    def check_kind_fields(self):
        if self.kind == "table" and not self.values:
            raise ValueError('table function requires "values"')
        if self.kind == "named" and self.name is None:
            raise ValueError('named function requires "name"')
        return self

    @classmethod
    def from_flag(cls, flag: str) -> "FunctionDescriptor":
        """Parse the command line shorthand ``named:maj3`` or ``named:parity:4``"""
        parts = flag.split(":")
        if len(parts) < 2 or parts[0] != "named":
            raise ValueError(f'function flag must look like "named:<name>[:n]": {flag}')
        n = int(parts[2]) if len(parts) > 2 else None
        return cls(kind="named", name=parts[1], n=n)


class HierarchyDescriptor(BaseModel):
    """Nested {"component": {...}, "children": [...]} with leaves {"leaf": i}"""
    leaf: Optional[int] = Field(None, ge=0)
    component: Optional[FunctionDescriptor] = None
    children: List["HierarchyDescriptor"] = Field(default_factory=list)
    kind: ComponentKind = ComponentKind.MULTILINEAR
    epsilon: float = Field(1e-6, gt=0.0, le=1.0, description="Declared epsilon")

    @model_validator(mode='after')
    def check_node(self):
        if self.leaf is not None:
            if self.component is not None or self.children:
                raise ValueError('a leaf carries no component or children')
        elif self.component is None or len(self.children) < 2:
            raise ValueError('an internal node needs a component and at least two children')
        return self


HierarchyDescriptor.model_rebuild()


# ===============================================
# Reports
# ===============================================

class ReportModel(BaseModel):
    """Base for all report objects"""
    model_config = ConfigDict(populate_by_name=True)

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)


class MonteCarloEstimate(ReportModel):
    """Monte Carlo estimate with a 95% confidence interval"""
    estimate: float
    ci_low: float
    ci_high: float
    std_error: float
    samples: int
    seed: int
    degenerate: bool = False

    @property
    def ci_width(self) -> float:
        return self.ci_high - self.ci_low

    def covers(self, value: float, sigmas: float = 3.0) -> bool:
        """True when value lies within `sigmas` standard errors of the estimate"""
        return abs(value - self.estimate) <= sigmas * self.std_error


class LowDegreeBoundReport(ReportModel):
    D: int
    rho: float
    M: float = Field(..., description="Max correlation with degree <= D functions")
    bound: float
    slack: float
    holds: bool
    tolerance: float


class LemmaCheckReport(ReportModel):
    stability: float
    epsilon: float
    rho: float
    bound: float
    floor: Optional[float] = None
    holds: bool
    tolerance: float


class ContractionEntry(ReportModel):
    subset: int
    norm: float
    contracted_norm: float
    factor: float
    slack: float


class MarkovContractReport(ReportModel):
    entries: List[ContractionEntry]
    commutation_error: float
    holds: bool
    tolerance: float


class NonSeparabilityReport(ReportModel):
    epsilon: float
    corr_to_separable: float
    witness: Dict[str, float] = Field(default_factory=dict)
    degenerate: bool = False


class DecayBoundReport(ReportModel):
    d: int
    epsilon: float
    delta: float
    rho: float
    alpha: float
    N: int = Field(..., description="Step count from the proof")
    steps_to_alpha: int = Field(..., description="Measured iterations until g^k(rho) <= alpha")
    C: float
    iterate_bound: float
    closed_form: float
    tightness_floor: float
    doubly_exponential: Optional[float] = None
    resilient_t: Optional[int] = None
    resilient: Optional[float] = None
    exact_or_mc: Optional[MonteCarloEstimate] = None
    exact: Optional[float] = None
    constant_source: str = "proof-derived"


class NodeCertificate(ReportModel):
    path: str
    kind: ComponentKind
    declared_epsilon: float
    certified_epsilon: float
    depth: int
    passed: bool
    detail: str = ""


class DegreeProfile(ReportModel):
    n: int
    sites: int
    mean: float
    variance: float
    weights: List[float] = Field(..., description="Fourier weight by degree 0..N")
    cumulative: List[float] = Field(..., description="W(D) for D = 0..N")
    normalized_cumulative: List[float]
    low_degree_mass: List[float] = Field(..., description="sqrt(W(D)) for D = 0..N")


# ===============================================
# Experiment configuration
# ===============================================

class ExperimentConfig(BaseModel):
    """Validated parameters of one command line invocation"""
    command: Command
    inputs: Dict[str, Path] = Field(default_factory=dict)
    out: Optional[Path] = None
    seed: int = Field(0, ge=0, lt=2 ** 64)
    format: OutputFormat = OutputFormat.JSON
    workers: int = Field(1, ge=1)
    params: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode='after')
    def check_parameters(self):
        p = self.params
        rhos = p.get('rho')
        for rho in (rhos if isinstance(rhos, list) else [rhos]):
            if rho is not None and not 0.0 <= float(rho) <= 1.0:
                raise ValueError(f'rho must lie in [0, 1]: {rho}')
        eps = p.get('eps')
        if eps is not None and not 0.0 < float(eps) <= 1.0:
            raise ValueError(f'eps must lie in (0, 1]: {eps}')
        delta = p.get('delta')
        if delta is not None and eps is not None and not 0.0 < float(delta) < float(eps):
            raise ValueError(f'delta must lie in (0, eps): {delta}')
        for depth in p.get('depths') or []:
            if int(depth) < 1:
                raise ValueError(f'depths must be >= 1: {depth}')
        samples = p.get('samples')
        if samples is not None and int(samples) < 1:
            raise ValueError(f'samples must be >= 1: {samples}')

        if self.command == Command.DECAY and (eps is None or rhos is None):
            raise ValueError('decay needs --eps and --rho')
        if self.command == Command.HIERARCHY and 'tree' not in self.inputs and not p.get('builder'):
            raise ValueError('hierarchy needs --tree or --builder')
        if self.command == Command.DEMO and not p.get('name'):
            raise ValueError('demo needs --name')
        return self


__all__ = [
    'ComponentKind', 'CouplingKind', 'Command', 'OutputFormat', 'parse_probability',
    'CouplingDescriptor', 'PairDescriptor', 'SpaceDescriptor', 'FunctionDescriptor',
    'HierarchyDescriptor',
    'ReportModel', 'MonteCarloEstimate', 'LowDegreeBoundReport', 'LemmaCheckReport',
    'ContractionEntry', 'MarkovContractReport', 'NonSeparabilityReport',
    'DecayBoundReport', 'NodeCertificate', 'DegreeProfile',
    'ExperimentConfig',
]
