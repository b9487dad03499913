# Services package

# Graph handling and measures first (no dependencies on other services)
from . import graph_core
from . import measures

# Dataset assembly and the analysis steps built on it
from . import dataset
from . import correlation
from . import forest
from . import selection
from . import embedding
from . import report

# Stage orchestration last (depends on everything above)
from . import pipeline

# Export entry points
from .pipeline import run_stage, run_pipeline

__all__ = [
    "graph_core",
    "measures",
    "dataset",
    "correlation",
    "forest",
    "selection",
    "embedding",
    "report",
    "pipeline",
    "run_stage",
    "run_pipeline",
]
