"""Selection schemas."""
from typing import Dict, List, Optional

from pydantic import BaseModel, Field, model_validator

from netdomain.core.constants import (
    CONSISTENCY_PAIRS, CONSISTENCY_TRIPLETS, MAX_COMBO_SIZE, PLOT_TOP_N, TOP_K,
)


class ComboScore(BaseModel):
    """Ids sorted canonically; mean_f1 is the arithmetic mean of fold_scores."""
    features: List[str] = Field(..., min_length=1, max_length=MAX_COMBO_SIZE)
    mean_f1: float
    fold_scores: List[float]

    @model_validator(mode="after")
    def _distinct(self):
        if len(set(self.features)) != len(self.features):
            raise ValueError("combo features must be distinct")
        return self

    @property
    def key(self) -> str:
        return "+".join(self.features)


class SelectionOptions(BaseModel):
    top_k: int = Field(default=TOP_K, ge=1)
    max_combo_size: int = Field(default=MAX_COMBO_SIZE, ge=1, le=MAX_COMBO_SIZE)
    consistency_pairs: int = Field(default=CONSISTENCY_PAIRS, ge=1)
    consistency_triplets: int = Field(default=CONSISTENCY_TRIPLETS, ge=1)
    plot_top_n: int = Field(default=PLOT_TOP_N, ge=1)
    # name -> feature ids, evaluated in every domain for baseline comparison
    named_combos: Dict[str, List[str]] = {}


class NamedComboScore(BaseModel):
    name: str
    score: Optional[ComboScore] = None
    error: Optional[str] = None


class SelectionRun(BaseModel):
    """One modified-forward-selection run for a domain on one row set."""
    n_rows: int
    n_positive: int
    candidates: List[str]
    finalists: List[str]
    singlets: List[ComboScore]
    pairs: List[ComboScore]
    triplets: List[ComboScore]
    consistency_overlap: Optional[float] = None
    named: List[NamedComboScore] = []

    def best(self, size: int) -> Optional[ComboScore]:
        ranked = {1: self.singlets, 2: self.pairs, 3: self.triplets}.get(size, [])
        return ranked[0] if ranked else None

    def winner(self) -> Optional[ComboScore]:
        """Highest mean F1 over all sizes; ties go to the smaller combo."""
        best = None
        for size in (1, 2, 3):
            candidate = self.best(size)
            if candidate is not None and (best is None or candidate.mean_f1 > best.mean_f1):
                best = candidate
        return best


class SelectionReport(BaseModel):
    domain: str
    full: SelectionRun
    undersampled: Optional[SelectionRun] = None
    undersample_cap: Optional[int] = None
    # set when the capped row set could not be split into the CV folds
    undersampled_error: Optional[str] = None
    # winner feature -> other features with |Pearson| above threshold in the domain
    correlated_alternates: Dict[str, List[str]] = {}
