"""
Feature selection service.
Modified forward selection: rank single features, then evaluate every pair
and triplet drawn from the top-ranked singles, plus the pair-to-triplet
consistency overlap.
"""
import logging
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from netdomain.core.constants import CORRELATION_THRESHOLD
from netdomain.core.exceptions import (
    CrossValidationError, ExcludedFeatureError, NetdomainError, SelectionError,
)
from netdomain.core.workers import run_tasks
from netdomain.schemas import (
    ComboScore, CVConfig, FeatureMatrix, FilterResult, ForestParams, NamedComboScore,
    PolicyResult, SelectionOptions, SelectionReport, SelectionRun,
)
from netdomain.services.correlation import pearson_matrix
from netdomain.services.dataset import undersample
from netdomain.services.forest import Split, evaluate, stratified_kfold_indices

logger = logging.getLogger(__name__)

Combo = Tuple[str, ...]


def _canonical(features: Sequence[str], order: Sequence[str]) -> Combo:
    position = {f: i for i, f in enumerate(order)}
    return tuple(sorted(features, key=lambda f: position[f]))


def _rank(scores: List[ComboScore], order: Sequence[str]) -> List[ComboScore]:
    """Descending mean F1; ties by canonical combo order."""
    position = {f: i for i, f in enumerate(order)}
    return sorted(
        scores,
        key=lambda s: (-s.mean_f1, len(s.features), [position[f] for f in s.features]),
    )


def _score_task(
    X: pd.DataFrame, y: np.ndarray, features: Combo, cv: CVConfig, params: ForestParams, splits: List[Split]
) -> ComboScore:
    result = evaluate(X, y, list(features), cv, params, splits)
    return ComboScore(features=list(features), mean_f1=result.mean_f1, fold_scores=result.fold_scores)


def evaluate_combos(
    X: pd.DataFrame,
    y,
    combos: Sequence[Sequence[str]],
    cv: CVConfig,
    params: ForestParams,
    splits: Optional[List[Split]] = None,
    jobs: int = 1,
) -> List[ComboScore]:
    """
    Evaluate each combo on shared CV partitions and rank the results.

    Args:
        X: feature table; its column order is the canonical order
        y: 1 for the target domain, 0 for the rest
        combos: feature-id combinations (any order inside a combo)
        splits: CV partitions; computed from cv when omitted

    Returns:
        ComboScores, descending mean F1, ties by canonical combo order
    """
    if not combos:
        raise SelectionError("No combos to evaluate")
    order = list(X.columns)
    y = np.asarray(y)
    if splits is None:
        splits = stratified_kfold_indices(y, cv.folds, cv.repeats, cv.seed)

    canonical = [_canonical(c, order) for c in combos]
    tasks = [
        (combo, (X[list(combo)], y, combo, cv, params, splits))
        for combo in dict.fromkeys(canonical)
    ]
    size = len(canonical[0])
    results = run_tasks(_score_task, tasks, jobs=jobs, desc=f"combos of {size}")
    return _rank(list(results.values()), order)


def rank_singletons(
    X: pd.DataFrame,
    y,
    candidates: Sequence[str],
    cv: CVConfig,
    params: ForestParams,
    splits: Optional[List[Split]] = None,
    jobs: int = 1,
) -> List[ComboScore]:
    """One evaluation per candidate feature, ranked."""
    if not candidates:
        raise SelectionError("No candidate features")
    return evaluate_combos(X, y, [[f] for f in candidates], cv, params, splits, jobs)


def enumerate_combos(top: Sequence[str]) -> Tuple[List[Combo], List[Combo]]:
    """All pairs and triplets of `top`, each kept in the given (canonical) order."""
    top = list(top)
    if len(top) < 3:
        logger.warning(f"Only {len(top)} finalists; pairs or triplets will be empty")
    return list(combinations(top, 2)), list(combinations(top, 3))


def consistency_overlap(
    ranked_pairs: Sequence[ComboScore],
    ranked_triplets: Sequence[ComboScore],
    finalists: Sequence[str],
    n_pairs: int = 10,
    n_triplets: int = 130,
) -> float:
    """
    Percentage of the top-n_pairs pair extensions found among the top-n_triplets triplets.

    Each of the best pairs is extended with every other finalist; the
    extensions are deduplicated but the denominator stays n_triplets.

    Raises:
        SelectionError: fewer ranked pairs or triplets than requested
    """
    if len(ranked_pairs) < n_pairs or len(ranked_triplets) < n_triplets:
        raise SelectionError(
            f"Consistency overlap needs {n_pairs} pairs and {n_triplets} triplets, "
            f"got {len(ranked_pairs)} and {len(ranked_triplets)}"
        )
    extended = set()
    for pair in ranked_pairs[:n_pairs]:
        for feature in finalists:
            if feature not in pair.features:
                extended.add(frozenset(pair.features) | {feature})
    best = {frozenset(t.features) for t in ranked_triplets[:n_triplets]}
    return 100.0 * len(extended & best) / n_triplets


def extension_count(n_pairs: int, n_finalists: int) -> int:
    """Triplet candidates built from the best pairs before dedup."""
    return n_pairs * max(0, n_finalists - 2)


def correlated_alternates(
    feature: str,
    frame: pd.DataFrame,
    threshold: float = CORRELATION_THRESHOLD,
) -> List[str]:
    """Other columns of `frame` with |Pearson| > threshold against `feature`, in column order."""
    if feature not in frame.columns:
        raise SelectionError(f"Unknown feature {feature!r}")
    if len(frame) < 2:
        return []
    corr = pearson_matrix(frame)
    i = corr.index(feature)
    row = np.nan_to_num(np.abs(corr.coefficients[i]), nan=0.0)
    return [f for j, f in enumerate(corr.features) if j != i and row[j] > threshold]


def evaluate_named_combo(
    X: pd.DataFrame,
    y,
    features: Sequence[str],
    cv: CVConfig,
    params: ForestParams,
    splits: Optional[List[Split]] = None,
    policy: Optional[PolicyResult] = None,
    domain: Optional[str] = None,
) -> ComboScore:
    """
    Evaluate an explicit combination.

    Raises:
        SelectionError: unknown feature id
        ExcludedFeatureError: feature removed for `domain` by a policy rule
    """
    unknown = [f for f in features if f not in X.columns]
    if unknown:
        raise SelectionError(f"Unknown features {unknown}")
    if policy is not None and domain is not None:
        for feature in features:
            rule = policy.exclusion_rule(domain, feature)
            if rule is not None:
                raise ExcludedFeatureError(feature, domain, rule.value)
    combo = _canonical(features, list(X.columns))
    y = np.asarray(y)
    if splits is None:
        splits = stratified_kfold_indices(y, cv.folds, cv.repeats, cv.seed)
    return _score_task(X[list(combo)], y, combo, cv, params, splits)


def run_selection(
    X: pd.DataFrame,
    y: np.ndarray,
    candidates: Sequence[str],
    cv: CVConfig,
    params: ForestParams,
    options: SelectionOptions,
    jobs: int = 1,
    policy: Optional[PolicyResult] = None,
    domain: Optional[str] = None,
) -> SelectionRun:
    """Full wrapper on one row set: singlets, finalists, pairs, triplets, overlap, named combos."""
    splits = stratified_kfold_indices(y, cv.folds, cv.repeats, cv.seed)
    singlets = rank_singletons(X, y, candidates, cv, params, splits, jobs)
    top = {s.features[0] for s in singlets[:options.top_k]}
    finalists = [f for f in candidates if f in top]

    pair_combos, triplet_combos = enumerate_combos(finalists)
    pairs: List[ComboScore] = []
    triplets: List[ComboScore] = []
    if options.max_combo_size >= 2 and pair_combos:
        pairs = evaluate_combos(X, y, pair_combos, cv, params, splits, jobs)
    if options.max_combo_size >= 3 and triplet_combos:
        triplets = evaluate_combos(X, y, triplet_combos, cv, params, splits, jobs)

    overlap = None
    if len(pairs) >= options.consistency_pairs and len(triplets) >= options.consistency_triplets:
        overlap = consistency_overlap(
            pairs, triplets, finalists, options.consistency_pairs, options.consistency_triplets
        )

    named = []
    for name, features in sorted(options.named_combos.items()):
        try:
            score = evaluate_named_combo(X, y, features, cv, params, splits, policy, domain)
            named.append(NamedComboScore(name=name, score=score))
        except NetdomainError as e:
            logger.warning(f"Named combo {name!r} skipped for {domain}: {e}")
            named.append(NamedComboScore(name=name, error=str(e)))

    return SelectionRun(
        n_rows=len(y),
        n_positive=int(np.sum(y)),
        candidates=list(candidates),
        finalists=finalists,
        singlets=singlets,
        pairs=pairs,
        triplets=triplets,
        consistency_overlap=overlap,
        named=named,
    )


def select_domain(
    matrix: FeatureMatrix,
    policy: PolicyResult,
    filtered: FilterResult,
    cv: CVConfig,
    params: ForestParams,
    options: SelectionOptions,
    undersample_cap: Optional[int] = None,
    seed: int = 0,
    jobs: int = 1,
) -> SelectionReport:
    """
    One-vs-Rest selection for `filtered.domain` over the whole corpus.

    Candidates are the domain's correlation-filter survivors. With an
    undersample cap the wrapper is re-run on the capped row set and stored
    next to the full run; when the capped set is too small for the CV folds
    the error is recorded instead and the full run is kept.

    Correlated alternates of the winner are searched over every catalog
    column that is fully observed in the domain's rows, not just the
    domain's task features.

    Raises:
        CrossValidationError: the full row set cannot be split into cv.folds
    """
    domain = filtered.domain
    X = matrix.values
    y = (matrix.domain_of == domain).to_numpy().astype(np.int64)
    logger.info(f"Selecting for {domain}: {int(y.sum())} vs {len(y) - int(y.sum())} networks, "
                f"{len(filtered.retained)} candidates")

    full = run_selection(X, y, filtered.retained, cv, params, options, jobs, policy, domain)

    undersampled = None
    undersampled_error = None
    if undersample_cap is not None:
        kept = undersample(matrix.domain_of, undersample_cap, seed)
        rows = [r for r in matrix.rows if r in kept]
        sub_y = (matrix.domain_of.loc[rows] == domain).to_numpy().astype(np.int64)
        try:
            undersampled = run_selection(
                X.loc[rows], sub_y, filtered.retained, cv, params, options, jobs, policy, domain
            )
        except CrossValidationError as e:
            logger.warning(f"Undersampled run skipped for {domain} (cap {undersample_cap}): {e}")
            undersampled_error = str(e)

    alternates: Dict[str, List[str]] = {}
    winner = full.winner()
    if winner is not None:
        domain_rows = matrix.domain_rows(domain)
        observed = [f for f in matrix.cols if not matrix.missing.loc[domain_rows, f].any()]
        domain_frame = matrix.values.loc[domain_rows, observed]
        for feature in winner.features:
            alternates[feature] = correlated_alternates(feature, domain_frame)

    return SelectionReport(
        domain=domain,
        full=full,
        undersampled=undersampled,
        undersample_cap=undersample_cap,
        undersampled_error=undersampled_error,
        correlated_alternates=alternates,
    )
