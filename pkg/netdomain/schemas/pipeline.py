"""Pipeline configuration and stage artifact schemas."""
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from netdomain.core.constants import CORRELATION_THRESHOLD, EMBED_CAP, EMBED_DIMS, SEPARABILITY_THRESHOLD
from netdomain.core.enums import Stage
from netdomain.schemas.dataset import PolicyConfig
from netdomain.schemas.forest import CVConfig, ForestParams
from netdomain.schemas.measures import BudgetPolicy, SamplingConfig
from netdomain.schemas.selection import SelectionOptions


class CorrelationConfig(BaseModel):
    threshold: float = Field(default=CORRELATION_THRESHOLD, gt=0, le=1)


class ReportConfig(BaseModel):
    separability_threshold: float = Field(default=SEPARABILITY_THRESHOLD, ge=0, le=1)


class EmbedConfig(BaseModel):
    dims: int = Field(default=EMBED_DIMS, ge=1)
    cap: Optional[int] = Field(default=EMBED_CAP, ge=1)


class PipelineConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    manifest: str
    output_dir: str
    seed: int = Field(..., ge=0)
    jobs: Optional[int] = Field(default=None, ge=1)
    auto_project: bool = False
    budgets: BudgetPolicy = BudgetPolicy()
    sampling: SamplingConfig = SamplingConfig()
    policy: PolicyConfig = PolicyConfig()
    correlation: CorrelationConfig = CorrelationConfig()
    forest: ForestParams = ForestParams()
    cv: CVConfig = CVConfig()
    selection: SelectionOptions = SelectionOptions()
    undersample_cap: Optional[int] = Field(default=None, ge=1)
    report: ReportConfig = ReportConfig()
    embed: EmbedConfig = EmbedConfig()


class StageArtifact(BaseModel):
    stage: Stage
    content_digest: str
    config_digest: str
    timestamp: str
    outputs: List[str]
    details: Dict[str, str] = {}


@dataclass(frozen=True, eq=False)
class Embedding:
    """
    PCA projection of standardized features.

    components rows are orthonormal principal axes over `features`;
    explained holds each axis' fraction of the total variance.
    """
    coordinates: pd.DataFrame
    components: np.ndarray
    explained: np.ndarray
    features: List[str]
    dropped: List[str]
