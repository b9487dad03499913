"""
Typed records exchanged between modules and written to disk.
Organized by module and exported here for easy importing.
"""

# Graph schemas
from .graph import (
    RawGraph,
    Graph,
    BipartitePartition,
    CanonicalizationRecord,
    IngestSummary,
)

# Measure schemas
from .measures import (
    MeasureSpec,
    Budget,
    BudgetPolicy,
    SamplingConfig,
    AggregateSet,
    MeasureResult,
    FeatureVector,
    FeatureSidecar,
)

# Dataset schemas
from .dataset import (
    ManifestEntry,
    PolicyConfig,
    AuditEntry,
    FeatureMatrix,
    PolicyResult,
    PolicyArtifact,
)

# Correlation schemas
from .correlation import (
    CorrelationMatrix,
    RemovedFeature,
    FilterResult,
)

# Forest schemas
from .forest import (
    ForestParams,
    CVConfig,
    TreeNode,
    ForestExport,
    EvaluationResult,
)

# Selection schemas
from .selection import (
    ComboScore,
    SelectionOptions,
    NamedComboScore,
    SelectionRun,
    SelectionReport,
)

# Pipeline schemas
from .pipeline import (
    CorrelationConfig,
    ReportConfig,
    EmbedConfig,
    PipelineConfig,
    StageArtifact,
    Embedding,
)

__all__ = [
    # Graph
    "RawGraph",
    "Graph",
    "BipartitePartition",
    "CanonicalizationRecord",
    "IngestSummary",
    # Measures
    "MeasureSpec",
    "Budget",
    "BudgetPolicy",
    "SamplingConfig",
    "AggregateSet",
    "MeasureResult",
    "FeatureVector",
    "FeatureSidecar",
    # Dataset
    "ManifestEntry",
    "PolicyConfig",
    "AuditEntry",
    "FeatureMatrix",
    "PolicyResult",
    "PolicyArtifact",
    # Correlation
    "CorrelationMatrix",
    "RemovedFeature",
    "FilterResult",
    # Forest
    "ForestParams",
    "CVConfig",
    "TreeNode",
    "ForestExport",
    "EvaluationResult",
    # Selection
    "ComboScore",
    "SelectionOptions",
    "NamedComboScore",
    "SelectionRun",
    "SelectionReport",
    # Pipeline
    "CorrelationConfig",
    "ReportConfig",
    "EmbedConfig",
    "PipelineConfig",
    "StageArtifact",
    "Embedding",
]
