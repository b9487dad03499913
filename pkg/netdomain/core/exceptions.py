"""Exception hierarchy for the pipeline."""
from typing import Optional

from netdomain.core.enums import MissingReason


class NetdomainError(Exception):
    """Base class for all pipeline errors."""


class ConfigError(NetdomainError):
    """Invalid or missing configuration."""


class GraphParseError(NetdomainError):
    """Raw edge-list text could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GraphError(NetdomainError):
    """Invalid graph operation (empty graph, empty projection side, ...)."""


class UnknownMeasureError(NetdomainError):
    """Measure id not present in the catalog."""


class BudgetExceeded(NetdomainError):
    """Raised inside a measure when its time or memory budget runs out."""

    def __init__(self, reason: MissingReason, detail: str = ""):
        self.reason = reason
        super().__init__(f"{reason.value}: {detail}" if detail else reason.value)


class UndefinedMeasure(NetdomainError):
    """Raised inside a measure when it has no value on the given graph."""


class PolicyError(NetdomainError):
    """Dataset policy could not be applied."""


class EmptyCorpusError(PolicyError):
    """Policies removed every network (or every domain)."""


class CorrelationError(NetdomainError):
    """Correlation matrix or filter precondition violated."""


class CrossValidationError(NetdomainError):
    """Cross-validation cannot be set up for the given labels."""


class SelectionError(NetdomainError):
    """Feature selection precondition violated."""


class ExcludedFeatureError(SelectionError):
    """A requested feature was removed for the domain by a policy rule."""

    def __init__(self, feature: str, domain: str, rule: str):
        self.feature = feature
        self.domain = domain
        self.rule = rule
        super().__init__(f"Feature {feature!r} is excluded for domain {domain!r} by rule {rule!r}")


class MissingArtifactError(NetdomainError):
    """A stage ran before the stage producing its inputs."""

    def __init__(self, stage: str, upstream: str):
        self.stage = stage
        self.upstream = upstream
        super().__init__(f"Stage {stage!r} needs the output of stage {upstream!r}; run '{upstream}' first")


class EmbeddingError(NetdomainError):
    """PCA embedding precondition violated."""
