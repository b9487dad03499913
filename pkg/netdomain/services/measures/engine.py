"""
Measure engine: runs catalog measures under budgets and turns their raw
outputs into one feature row per network.
"""
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from netdomain.core.constants import CATALOG_VERSION
from netdomain.core.enums import MeasureKind, MissingReason
from netdomain.core.exceptions import BudgetExceeded, UndefinedMeasure
from netdomain.core.workers import run_tasks
from netdomain.schemas import (
    AggregateSet, Budget, BudgetPolicy, FeatureSidecar, FeatureVector, Graph,
    MeasureResult, MeasureSpec, SamplingConfig,
)
from netdomain.services.measures.algorithms import BudgetGuard, MeasureContext
from netdomain.services.measures.catalog import catalog, columns_for, get_measure
from netdomain.utils.io import write_csv, write_json

logger = logging.getLogger(__name__)

BudgetLike = Union[Budget, BudgetPolicy]


def aggregate_distribution(values: Sequence[float]) -> AggregateSet:
    """
    Summarize a distribution by mean/min/max and four normalized moments.

    m_k = mean((v / s)^k) with s = max |v|; all m_k are 0 when s == 0.

    Args:
        values: non-empty, finite values

    Returns:
        AggregateSet
    """
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("Cannot aggregate an empty distribution")
    if not np.isfinite(arr).all():
        raise ValueError("Distribution contains non-finite values")

    scale = np.abs(arr).max()
    if scale == 0:
        moments = [0.0, 0.0, 0.0, 0.0]
    else:
        normalized = arr / scale
        moments = [float(np.mean(normalized ** k)) for k in (1, 2, 3, 4)]

    return AggregateSet(
        mean=float(arr.mean()),
        min=float(arr.min()),
        max=float(arr.max()),
        m1=moments[0],
        m2=moments[1],
        m3=moments[2],
        m4=moments[3],
    )


def _resolve_spec(spec: Union[MeasureSpec, str]):
    measure_id = spec if isinstance(spec, str) else spec.id
    return get_measure(measure_id)


def _validate_value(spec: MeasureSpec, value) -> Union[float, np.ndarray]:
    if spec.kind == MeasureKind.SCALAR:
        value = float(value)
        if not np.isfinite(value):
            raise UndefinedMeasure("non-finite value")
        return value
    arr = np.asarray(value, dtype=np.float64).ravel()
    if arr.size == 0:
        raise UndefinedMeasure("empty distribution")
    if not np.isfinite(arr).all():
        raise UndefinedMeasure("non-finite entries in distribution")
    return arr


def run_measure(
    g: Graph,
    spec: Union[MeasureSpec, str],
    budget: Budget,
    seed: int,
    sampling: Optional[SamplingConfig] = None,
) -> MeasureResult:
    """
    Compute one measure within its budget.

    Args:
        g: connected simple graph
        spec: catalog entry or measure id
        budget: wall-time and memory limits
        seed: seed for sampled shortest-path measures
        sampling: exact/sampled thresholds

    Any other exception raised by the measure function (an extension
    measure with a bug, say) is logged and recorded as FAILED.

    Returns:
        MeasureResult with a value, or missing with a reason

    Raises:
        UnknownMeasureError: id not in the catalog
    """
    spec, fn = _resolve_spec(spec)
    ctx = MeasureContext(seed=seed, sampling=sampling or SamplingConfig())
    try:
        guard = BudgetGuard(budget)
        guard.check()
        value = _validate_value(spec, fn(g, guard, ctx))
    except BudgetExceeded as e:
        logger.debug(f"{spec.id}: {e}")
        return MeasureResult.absent(e.reason)
    except UndefinedMeasure as e:
        logger.debug(f"{spec.id} undefined: {e}")
        return MeasureResult.absent(MissingReason.UNDEFINED)
    except MemoryError:
        return MeasureResult.absent(MissingReason.MEMORY)
    except Exception as e:
        logger.error(f"{spec.id} failed on a {g.n}-node graph: {type(e).__name__}: {e}")
        return MeasureResult.absent(MissingReason.FAILED)
    return MeasureResult.of(value, sampled=ctx.sampled)


def _budget_for(budget: BudgetLike, spec: MeasureSpec) -> Budget:
    return budget.for_spec(spec) if isinstance(budget, BudgetPolicy) else budget


def expand_result(spec: MeasureSpec, result: MeasureResult) -> List[Optional[float]]:
    """Column values of one measure result; None for every column of a missing result."""
    width = len(columns_for(spec))
    if result.missing:
        return [None] * width
    if spec.kind == MeasureKind.SCALAR:
        return [float(result.value)]
    return aggregate_distribution(result.value).as_list()


def assemble_vector(
    specs: Sequence[MeasureSpec], results: Sequence[MeasureResult]
) -> FeatureVector:
    """Lay out measure results as one row aligned to the canonical columns."""
    columns: List[str] = []
    values: List[float] = []
    missing: List[bool] = []
    reasons: Dict[str, MissingReason] = {}
    sampled: List[str] = []

    for spec, result in zip(specs, results):
        spec_columns = columns_for(spec)
        for column, value in zip(spec_columns, expand_result(spec, result)):
            columns.append(column)
            values.append(np.nan if value is None else value)
            missing.append(value is None)
            if result.missing:
                reasons[column] = result.missing_reason
        if result.sampled:
            sampled.extend(spec_columns)

    return FeatureVector(
        columns=columns,
        values=np.array(values, dtype=np.float64),
        missing=np.array(missing, dtype=bool),
        reasons=reasons,
        sampled=sampled,
    )


def compute_feature_vector(
    g: Graph,
    budget: BudgetLike,
    seed: int,
    sampling: Optional[SamplingConfig] = None,
) -> FeatureVector:
    """
    One value or missing flag per catalog column.

    A single Budget applies to every measure; a BudgetPolicy routes per cost
    class and per measure.
    """
    specs = catalog()
    results = [run_measure(g, spec, _budget_for(budget, spec), seed, sampling) for spec in specs]
    return assemble_vector(specs, results)


def _measure_task(
    g: Graph, measure_id: str, budget: Budget, seed: int, sampling: SamplingConfig
) -> MeasureResult:
    return run_measure(g, measure_id, budget, seed, sampling)


def compute_corpus_features(
    graphs: Dict[str, Graph],
    budgets: BudgetPolicy,
    seed: int,
    sampling: Optional[SamplingConfig] = None,
    jobs: int = 1,
) -> Dict[str, FeatureVector]:
    """
    Feature vectors for every network, computed as independent
    (network, measure) tasks on the worker pool.

    Returns:
        Dict of network id -> FeatureVector, sorted by network id
    """
    sampling = sampling or SamplingConfig()
    specs = catalog()
    tasks = [
        ((network_id, i), (g, spec.id, budgets.for_spec(spec), seed, sampling))
        for network_id, g in sorted(graphs.items())
        for i, spec in enumerate(specs)
    ]
    logger.info(f"Computing {len(specs)} measures on {len(graphs)} networks ({len(tasks)} tasks)")
    results = run_tasks(_measure_task, tasks, jobs=jobs, desc="measures", chunksize=len(specs))

    vectors: Dict[str, FeatureVector] = {}
    for network_id in sorted(graphs):
        row = [results[(network_id, i)] for i in range(len(specs))]
        vectors[network_id] = assemble_vector(specs, row)
        n_missing = int(vectors[network_id].missing.sum())
        if n_missing:
            logger.info(f"Network {network_id}: {n_missing} missing feature cells")
    return vectors


def feature_frame(vectors: Dict[str, FeatureVector], domains: Dict[str, str]) -> pd.DataFrame:
    """Feature table: network_id, domain, then canonical columns; NaN where missing."""
    columns = next(iter(vectors.values())).columns if vectors else []
    rows = []
    for network_id in sorted(vectors):
        vector = vectors[network_id]
        rows.append([network_id, domains[network_id], *vector.values.tolist()])
    return pd.DataFrame(rows, columns=["network_id", "domain", *columns])


def build_sidecar(
    vectors: Dict[str, FeatureVector],
    budgets: BudgetPolicy,
    sampling: SamplingConfig,
    seed: int,
) -> FeatureSidecar:
    specs = list(catalog())
    return FeatureSidecar(
        catalog_version=CATALOG_VERSION,
        columns=[c for spec in specs for c in columns_for(spec)],
        measures=specs,
        budgets=budgets,
        sampling=sampling,
        seed=seed,
        missing={nid: dict(sorted(v.reasons.items())) for nid, v in sorted(vectors.items())},
        sampled={nid: list(v.sampled) for nid, v in sorted(vectors.items())},
    )


def write_feature_table(
    csv_path: Union[str, Path],
    sidecar_path: Union[str, Path],
    frame: pd.DataFrame,
    sidecar: FeatureSidecar,
) -> None:
    """Write the feature CSV (missing = empty cell) and its JSON sidecar."""
    write_csv(csv_path, frame)
    write_json(sidecar_path, sidecar)
    logger.info(f"Wrote {len(frame)} feature rows to {csv_path}")
