"""Random forest and cross-validation schemas."""
import math
from typing import List, Optional

from pydantic import BaseModel, Field, model_validator

from netdomain.core.constants import CV_FOLDS, CV_REPEATS, MAX_DEPTH, MIN_SAMPLES_LEAF, N_TREES


class ForestParams(BaseModel):
    n_trees: int = Field(default=N_TREES, ge=1)
    max_depth: int = Field(default=MAX_DEPTH, ge=1)
    # None means floor(sqrt(#features)), minimum 1
    features_per_split: Optional[int] = Field(default=None, ge=1)
    balanced_bootstrap: bool = True
    min_samples_leaf: int = Field(default=MIN_SAMPLES_LEAF, ge=1)

    def split_candidates(self, n_features: int) -> int:
        if self.features_per_split is not None:
            return min(self.features_per_split, n_features)
        return max(1, math.isqrt(n_features))


class CVConfig(BaseModel):
    folds: int = Field(default=CV_FOLDS, ge=2)
    repeats: int = Field(default=CV_REPEATS, ge=1)
    seed: int = Field(default=0, ge=0)


class TreeNode(BaseModel):
    """Either a split (feature, threshold, left, right) or a leaf (probability)."""
    feature: Optional[str] = None
    threshold: Optional[float] = None
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None
    probability: Optional[float] = Field(default=None, ge=0, le=1)

    @model_validator(mode="after")
    def _split_or_leaf(self):
        is_split = self.feature is not None
        if is_split and (self.left is None or self.right is None or self.threshold is None):
            raise ValueError("split node needs threshold and both children")
        if not is_split and self.probability is None:
            raise ValueError("leaf node needs a probability")
        return self

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())


class ForestExport(BaseModel):
    params: ForestParams
    features: List[str]
    seed: int
    tree_seeds: List[int]
    balancing: str
    trees: List[TreeNode]


class EvaluationResult(BaseModel):
    features: List[str]
    mean_f1: float
    fold_scores: List[float]
    degenerate_folds: int = 0


TreeNode.model_rebuild()
