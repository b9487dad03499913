"""Correlation filter schemas."""
from dataclasses import dataclass
from typing import List

import numpy as np
from pydantic import BaseModel

from netdomain.core.enums import CorrelationMethod


@dataclass(frozen=True)
class CorrelationMatrix:
    """
    Symmetric coefficient table over `features`, diagonal 1.
    Undefined pairs (zero variance) hold NaN.
    """
    features: List[str]
    coefficients: np.ndarray
    method: CorrelationMethod

    def index(self, feature: str) -> int:
        return self.features.index(feature)

    def coefficient(self, a: str, b: str) -> float:
        return float(self.coefficients[self.index(a), self.index(b)])

    def undefined(self, a: str, b: str) -> bool:
        return bool(np.isnan(self.coefficients[self.index(a), self.index(b)]))


class RemovedFeature(BaseModel):
    feature: str
    partner: str
    method: CorrelationMethod
    coefficient: float


class FilterResult(BaseModel):
    """Per-domain filter artifact."""
    domain: str
    candidates: List[str]
    retained: List[str]
    removed: List[RemovedFeature]
    max_abs_pearson: float
    max_abs_spearman: float
