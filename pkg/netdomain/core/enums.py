"""Enums for type-safe values throughout the pipeline."""

from enum import Enum


class MeasureKind(str, Enum):
    """Shape of a measure's raw output."""
    SCALAR = "scalar"
    NODE_DISTRIBUTION = "node-distribution"
    EDGE_DISTRIBUTION = "edge-distribution"


class CostClass(str, Enum):
    """Budget routing class of a measure."""
    CHEAP = "cheap"
    POLYNOMIAL = "polynomial"
    EXPENSIVE = "expensive"


class MissingReason(str, Enum):
    """Why a measure produced no value."""
    TIMEOUT = "timeout"
    MEMORY = "memory"
    UNDEFINED = "undefined-on-graph"
    FAILED = "failed"


class ProjectionSide(str, Enum):
    """Side of a bipartite graph kept by one-mode projection."""
    LEFT = "left"
    RIGHT = "right"
    LARGER = "larger"
    SMALLER = "smaller"


class CorrelationMethod(str, Enum):
    PEARSON = "pearson"
    SPEARMAN = "spearman"


class ExclusionRule(str, Enum):
    """Policy rule that removed a network or a feature."""
    SMALL_DOMAIN = "small-domain"
    NETWORK_MISSING = "network-missing"
    FEATURE_MISSING = "feature-missing-in-domain"
    CONSTANT_IN_DOMAIN = "constant-in-domain"
    CONSTANT_GLOBAL = "constant-global"
    UNIMPUTABLE = "unimputable"
    IMPUTATION_FALLBACK = "imputation-fallback"
    INSUFFICIENT_SAMPLES = "insufficient-samples"


class Stage(str, Enum):
    """Pipeline stages in execution order."""
    INGEST = "ingest"
    MEASURE = "measure"
    ASSEMBLE = "assemble"
    FILTER = "filter"
    SELECT = "select"
    REPORT = "report"
    EMBED = "embed"


STAGE_ORDER = [
    Stage.INGEST,
    Stage.MEASURE,
    Stage.ASSEMBLE,
    Stage.FILTER,
    Stage.SELECT,
    Stage.REPORT,
    Stage.EMBED,
]

# Upstream stages whose outputs a stage reads
STAGE_INPUTS = {
    Stage.INGEST: [],
    Stage.MEASURE: [Stage.INGEST],
    Stage.ASSEMBLE: [Stage.MEASURE],
    Stage.FILTER: [Stage.ASSEMBLE],
    Stage.SELECT: [Stage.ASSEMBLE, Stage.FILTER],
    Stage.REPORT: [Stage.ASSEMBLE, Stage.FILTER, Stage.SELECT],
    Stage.EMBED: [Stage.ASSEMBLE],
}
