"""Topological measure catalog, algorithms and engine."""
from netdomain.services.measures.catalog import (
    catalog,
    feature_columns,
    get_measure,
    measure_of_column,
    register_measure,
    unregister_measure,
)
from netdomain.services.measures.engine import (
    aggregate_distribution,
    build_sidecar,
    compute_corpus_features,
    compute_feature_vector,
    feature_frame,
    run_measure,
    write_feature_table,
)

__all__ = [
    "catalog",
    "feature_columns",
    "get_measure",
    "measure_of_column",
    "register_measure",
    "unregister_measure",
    "aggregate_distribution",
    "build_sidecar",
    "compute_corpus_features",
    "compute_feature_vector",
    "feature_frame",
    "run_measure",
    "write_feature_table",
]
