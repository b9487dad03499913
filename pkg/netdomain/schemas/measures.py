"""Measure engine schemas."""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from netdomain.core.constants import (
    DEFAULT_MEMORY, DEFAULT_WALL_TIME, EXACT_MAX_NODES, SAMPLE_SOURCES,
)
from netdomain.core.enums import CostClass, MeasureKind, MissingReason


class MeasureSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: str = Field(..., pattern=r"^[a-z][a-z0-9_]*$")
    kind: MeasureKind
    cost_class: CostClass
    needs_seed: bool = False
    description: str = ""


class Budget(BaseModel):
    """Per-measure limits. wall_time == 0 means the measure is never attempted."""
    model_config = ConfigDict(frozen=True)

    wall_time: float = Field(default=DEFAULT_WALL_TIME, ge=0)
    memory: int = Field(default=DEFAULT_MEMORY, gt=0)


class BudgetPolicy(BaseModel):
    """Resolves a Budget per measure: per-measure override, then cost class, then default."""
    default: Budget = Budget()
    cheap: Optional[Budget] = None
    polynomial: Optional[Budget] = None
    expensive: Optional[Budget] = None
    overrides: Dict[str, Budget] = {}

    def for_spec(self, spec: MeasureSpec) -> Budget:
        if spec.id in self.overrides:
            return self.overrides[spec.id]
        by_class = getattr(self, spec.cost_class.value)
        return by_class if by_class is not None else self.default


class SamplingConfig(BaseModel):
    exact_max_nodes: int = Field(default=EXACT_MAX_NODES, ge=1)
    sample_sources: int = Field(default=SAMPLE_SOURCES, ge=1)


class AggregateSet(BaseModel):
    mean: float
    min: float
    max: float
    m1: float
    m2: float
    m3: float
    m4: float

    def as_list(self) -> List[float]:
        return [self.mean, self.min, self.max, self.m1, self.m2, self.m3, self.m4]


@dataclass(frozen=True)
class MeasureResult:
    """Exactly one of value / missing_reason is set."""
    value: Union[float, np.ndarray, None] = None
    missing_reason: Optional[MissingReason] = None
    sampled: bool = False

    def __post_init__(self):
        if (self.value is None) == (self.missing_reason is None):
            raise ValueError("MeasureResult needs exactly one of value or missing_reason")

    @property
    def missing(self) -> bool:
        return self.missing_reason is not None

    @classmethod
    def of(cls, value, sampled: bool = False) -> "MeasureResult":
        return cls(value=value, sampled=sampled)

    @classmethod
    def absent(cls, reason: MissingReason) -> "MeasureResult":
        return cls(missing_reason=reason)


@dataclass
class FeatureVector:
    """One network's row: values aligned to catalog columns, NaN where missing."""
    columns: List[str]
    values: np.ndarray
    missing: np.ndarray
    reasons: Dict[str, MissingReason] = field(default_factory=dict)
    sampled: List[str] = field(default_factory=list)

    def as_dict(self) -> Dict[str, Optional[float]]:
        return {
            c: (None if m else float(v))
            for c, v, m in zip(self.columns, self.values, self.missing)
        }


class FeatureSidecar(BaseModel):
    """JSON sidecar written next to the feature CSV."""
    catalog_version: str
    columns: List[str]
    measures: List[MeasureSpec]
    budgets: BudgetPolicy
    sampling: SamplingConfig
    seed: int
    missing: Dict[str, Dict[str, MissingReason]]
    sampled: Dict[str, List[str]]

    @model_validator(mode="after")
    def _columns_unique(self):
        if len(set(self.columns)) != len(self.columns):
            raise ValueError("Feature columns must be unique")
        return self
