"""Dataset schemas: manifest rows, policy settings, the feature matrix and its audit trail."""
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Set

import pandas as pd
from pydantic import BaseModel, Field, field_validator

from netdomain.core.constants import (
    CONSTANT_FRACTION, FEATURE_MISSING_MAX_PER_DOMAIN, MIN_DOMAIN_SIZE, NETWORK_MISSING_MAX,
    RESERVED_DOMAIN_NAMES,
)
from netdomain.core.enums import ExclusionRule, ProjectionSide


def _file_stem(value: str) -> str:
    """Reject ids that cannot serve as a single file name inside a stage directory."""
    if value.startswith(".") or any(c in value for c in ("/", "\\", "\0")):
        raise ValueError(f"{value!r} must not start with '.' or contain path separators")
    return value


class ManifestEntry(BaseModel):
    """One corpus row. network_id and domain double as file names in stage outputs."""
    network_id: str = Field(..., min_length=1)
    path: str
    domain: str = Field(..., min_length=1)
    project_onto: Optional[ProjectionSide] = None

    @field_validator("network_id")
    @classmethod
    def _network_id_is_file_stem(cls, value: str) -> str:
        return _file_stem(value)

    @field_validator("domain")
    @classmethod
    def _domain_is_file_stem(cls, value: str) -> str:
        if value in RESERVED_DOMAIN_NAMES:
            raise ValueError(f"domain name {value!r} is reserved")
        return _file_stem(value)


class PolicyConfig(BaseModel):
    network_missing_max: float = Field(default=NETWORK_MISSING_MAX, gt=0, lt=1)
    feature_missing_max_per_domain: float = Field(default=FEATURE_MISSING_MAX_PER_DOMAIN, gt=0, lt=1)
    constant_fraction: float = Field(default=CONSTANT_FRACTION, gt=0, lt=1)
    min_domain_size: int = Field(default=MIN_DOMAIN_SIZE, ge=1)
    rng_seed: int = 0


class AuditEntry(BaseModel):
    rule: ExclusionRule
    network_id: Optional[str] = None
    feature: Optional[str] = None
    domain: Optional[str] = None
    detail: str = ""


@dataclass(frozen=True)
class FeatureMatrix:
    """
    Networks x features. `values` holds NaN where `missing` is True.
    Row index: network ids; columns: feature ids in canonical order.

    `imputed` flags cells that were missing before imputation filled them,
    so policies that count missing cells give the same answer on their own
    output.
    """
    values: pd.DataFrame
    missing: pd.DataFrame
    domain_of: pd.Series
    imputed: Optional[pd.DataFrame] = None

    def __post_init__(self):
        if self.imputed is None:
            object.__setattr__(
                self, "imputed", pd.DataFrame(False, index=self.values.index, columns=self.values.columns)
            )
        elif not self.imputed.index.equals(self.values.index) or not self.imputed.columns.equals(self.values.columns):
            raise ValueError("imputed mask must be congruent with values")
        if not self.values.index.equals(self.missing.index) or not self.values.columns.equals(self.missing.columns):
            raise ValueError("values and missing mask must be congruent")
        if not self.values.columns.is_unique:
            raise ValueError("feature ids must be unique")
        if not self.values.index.is_unique:
            raise ValueError("network ids must be unique")
        if not self.domain_of.index.equals(self.values.index):
            raise ValueError("every row needs exactly one domain label")
        if self.domain_of.isna().any():
            raise ValueError("every row needs a domain label")

    @classmethod
    def from_values(cls, values: pd.DataFrame, domain_of: pd.Series) -> "FeatureMatrix":
        """Build a matrix whose missing mask is derived from NaN cells."""
        values = values.astype(float)
        return cls(values=values, missing=values.isna(), domain_of=domain_of.reindex(values.index))

    @property
    def unobserved(self) -> pd.DataFrame:
        """Cells missing now or before imputation."""
        return self.missing | self.imputed

    @property
    def rows(self) -> List[str]:
        return list(self.values.index)

    @property
    def cols(self) -> List[str]:
        return list(self.values.columns)

    @property
    def domains(self) -> List[str]:
        return sorted(self.domain_of.unique())

    def domain_rows(self, domain: str) -> List[str]:
        return list(self.domain_of.index[self.domain_of == domain])

    def take_rows(self, rows) -> "FeatureMatrix":
        rows = list(rows)
        return FeatureMatrix(
            values=self.values.loc[rows],
            missing=self.missing.loc[rows],
            domain_of=self.domain_of.loc[rows],
            imputed=self.imputed.loc[rows],
        )

    def take_cols(self, cols) -> "FeatureMatrix":
        cols = list(cols)
        return replace(self, values=self.values[cols], missing=self.missing[cols], imputed=self.imputed[cols])

    def with_labels(self, domain_of: pd.Series) -> "FeatureMatrix":
        return replace(self, domain_of=domain_of.reindex(self.values.index))


@dataclass
class PolicyResult:
    """Output of the fixed policy sequence."""
    matrix: FeatureMatrix
    excluded_per_domain: Dict[str, Dict[str, ExclusionRule]]
    excluded_global: Dict[str, ExclusionRule]
    unimputable: Set[str]
    audit: List[AuditEntry] = field(default_factory=list)
    dropped_domains: Dict[str, ExclusionRule] = field(default_factory=dict)

    def exclusion_rule(self, domain: str, feature: str) -> Optional[ExclusionRule]:
        """Rule that removed `feature` from `domain`'s task, or None when usable."""
        if feature in self.excluded_global:
            return self.excluded_global[feature]
        if feature in self.unimputable:
            return ExclusionRule.UNIMPUTABLE
        return self.excluded_per_domain.get(domain, {}).get(feature)

    def task_features(self, domain: str) -> List[str]:
        """Features usable in `domain`'s One-vs-Rest task, canonical order."""
        return [f for f in self.matrix.cols if self.exclusion_rule(domain, f) is None]


class PolicyArtifact(BaseModel):
    """JSON form of a PolicyResult (the matrix itself goes to CSV)."""
    excluded_per_domain: Dict[str, Dict[str, ExclusionRule]]
    excluded_global: Dict[str, ExclusionRule]
    unimputable: List[str]
    dropped_domains: Dict[str, ExclusionRule]
    domain_sizes: Dict[str, int]
    audit: List[AuditEntry]
