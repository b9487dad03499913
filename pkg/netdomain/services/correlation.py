"""
Correlation filter service.
Removes one member of every highly correlated feature pair per domain,
Pearson first and Spearman on the survivors.
"""
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from netdomain.core.constants import CORRELATION_THRESHOLD
from netdomain.core.enums import CorrelationMethod
from netdomain.core.exceptions import CorrelationError
from netdomain.schemas import CorrelationMatrix, FeatureMatrix, FilterResult, RemovedFeature

logger = logging.getLogger(__name__)


def correlation_matrix(frame: pd.DataFrame, method: CorrelationMethod) -> CorrelationMatrix:
    """
    Feature-to-feature coefficients over the rows of `frame`.

    Spearman is Pearson over average ranks. Pairs involving a zero-variance
    feature are NaN; the diagonal is always 1.

    Raises:
        CorrelationError: fewer than 2 rows, or missing cells
    """
    if len(frame) < 2:
        raise CorrelationError(f"Correlation needs at least 2 rows, got {len(frame)}")
    if frame.isna().values.any():
        raise CorrelationError("Correlation input must be fully imputed")

    coefficients = frame.astype(float).corr(method=method.value).to_numpy(copy=True)
    np.fill_diagonal(coefficients, 1.0)
    return CorrelationMatrix(features=list(frame.columns), coefficients=coefficients, method=method)


def pearson_matrix(frame: pd.DataFrame) -> CorrelationMatrix:
    return correlation_matrix(frame, CorrelationMethod.PEARSON)


def spearman_matrix(frame: pd.DataFrame) -> CorrelationMatrix:
    return correlation_matrix(frame, CorrelationMethod.SPEARMAN)


def _sweep(
    corr: CorrelationMatrix, threshold: float, ordering: Sequence[str]
) -> Tuple[List[str], List[RemovedFeature]]:
    abs_coef = np.nan_to_num(np.abs(corr.coefficients), nan=0.0)
    retained: List[str] = []
    retained_idx: List[int] = []
    removed: List[RemovedFeature] = []

    for feature in ordering:
        i = corr.index(feature)
        if retained_idx:
            row = abs_coef[i, retained_idx]
            j = int(np.argmax(row))
            if row[j] > threshold:
                partner = retained[j]
                removed.append(RemovedFeature(
                    feature=feature,
                    partner=partner,
                    method=corr.method,
                    coefficient=float(corr.coefficients[i, retained_idx[j]]),
                ))
                continue
        retained.append(feature)
        retained_idx.append(i)
    return retained, removed


def dedup(
    corr: CorrelationMatrix,
    threshold: float = CORRELATION_THRESHOLD,
    ordering: Optional[Sequence[str]] = None,
) -> List[str]:
    """
    Greedy sweep in `ordering` (default: the matrix order): a feature is
    dropped iff |corr| > threshold with an already retained feature.
    Undefined coefficients count as 0.
    """
    return _sweep(corr, threshold, ordering or corr.features)[0]


def _max_abs_offdiagonal(corr: CorrelationMatrix) -> float:
    if len(corr.features) < 2:
        return 0.0
    abs_coef = np.nan_to_num(np.abs(corr.coefficients), nan=0.0)
    np.fill_diagonal(abs_coef, 0.0)
    return float(abs_coef.max())


def filter_domain(
    matrix: FeatureMatrix,
    domain: str,
    features: Sequence[str],
    threshold: float = CORRELATION_THRESHOLD,
) -> FilterResult:
    """
    Pearson dedup then Spearman dedup over one domain's rows.

    Args:
        matrix: policy-cleaned matrix
        domain: domain whose rows are used
        features: the domain's usable features, canonical order

    Returns:
        FilterResult with survivors in canonical order and removal provenance

    Raises:
        CorrelationError: no candidate features, too few rows, or a
            post-condition violation
    """
    features = list(features)
    if not features:
        raise CorrelationError(f"Domain {domain!r} has no candidate features")
    rows = matrix.domain_rows(domain)
    frame = matrix.values.loc[rows, features]

    kept_p, removed_p = _sweep(pearson_matrix(frame), threshold, features)
    kept_s, removed_s = _sweep(spearman_matrix(frame[kept_p]), threshold, kept_p)
    if not kept_s:
        raise CorrelationError(f"Domain {domain!r}: no feature survived the filter")

    final = frame[kept_s]
    max_p = _max_abs_offdiagonal(pearson_matrix(final))
    max_s = _max_abs_offdiagonal(spearman_matrix(final))
    if max_p > threshold or max_s > threshold:
        raise CorrelationError(
            f"Domain {domain!r}: retained features still correlate above {threshold} "
            f"(pearson {max_p:.4f}, spearman {max_s:.4f})"
        )

    logger.info(
        f"Domain {domain}: {len(features)} candidates -> {len(kept_p)} after pearson -> "
        f"{len(kept_s)} after spearman"
    )
    return FilterResult(
        domain=domain,
        candidates=features,
        retained=kept_s,
        removed=removed_p + removed_s,
        max_abs_pearson=max_p,
        max_abs_spearman=max_s,
    )
