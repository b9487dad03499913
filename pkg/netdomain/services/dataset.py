"""
Dataset service.
Reads the corpus manifest and feature tables, and applies the fixed policy
sequence: small-domain merge, sparse-network drop, per-domain sparse-feature
exclusion, quartile imputation and constant-feature exclusion.
"""
import logging
from collections import defaultdict
from pathlib import Path
from typing import Dict, List, Optional, Set, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import ValidationError

from netdomain.core.constants import (
    CONSTANT_SIGNIFICANT_DIGITS, MIN_IMPUTATION_VALUES, OTHER_DOMAIN,
)
from netdomain.core.enums import ExclusionRule
from netdomain.core.exceptions import ConfigError, EmptyCorpusError
from netdomain.schemas import (
    AuditEntry, FeatureMatrix, ManifestEntry, PolicyArtifact, PolicyConfig, PolicyResult,
)
from netdomain.utils.io import write_csv
from netdomain.utils.seeding import rng_for

logger = logging.getLogger(__name__)

ID_COLUMNS = ["network_id", "domain"]


# ---------------------------------------------------------------------------
# Manifest and feature tables
# ---------------------------------------------------------------------------

def load_manifest(path: Union[str, Path]) -> List[ManifestEntry]:
    """
    Read the corpus manifest CSV (network_id, path, domain, project_onto).

    Relative graph paths are resolved against the manifest's directory;
    an empty project_onto means the network is not declared bipartite.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Manifest not found: {path}")
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    required = {"network_id", "path", "domain"}
    if not required.issubset(frame.columns):
        raise ConfigError(f"Manifest {path} must have columns {sorted(required)} (+ project_onto)")

    entries = []
    for i, row in enumerate(frame.to_dict(orient="records"), start=2):
        graph_path = Path(row["path"])
        if not graph_path.is_absolute():
            graph_path = path.parent / graph_path
        try:
            entries.append(ManifestEntry(
                network_id=row["network_id"].strip(),
                path=str(graph_path),
                domain=row["domain"].strip(),
                project_onto=(row.get("project_onto") or "").strip() or None,
            ))
        except ValidationError as e:
            raise ConfigError(f"{path}: invalid manifest row {i}: {e}") from e

    ids = [e.network_id for e in entries]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise ConfigError(f"{path}: duplicate network ids {dupes}")
    logger.info(f"Loaded manifest with {len(entries)} networks from {path}")
    return entries


def matrix_from_frame(frame: pd.DataFrame) -> FeatureMatrix:
    """FeatureMatrix from a feature table (network_id, domain, feature columns)."""
    indexed = frame.set_index("network_id")
    values = indexed.drop(columns=["domain"]).astype(float)
    return FeatureMatrix.from_values(values, indexed["domain"].astype(str))


def matrix_to_frame(matrix: FeatureMatrix) -> pd.DataFrame:
    frame = matrix.values.copy()
    frame.insert(0, "domain", matrix.domain_of)
    frame.index.name = "network_id"
    return frame.reset_index()


def read_feature_csv(path: Union[str, Path]) -> FeatureMatrix:
    """Read a feature table written by the measure engine; empty cells are missing."""
    frame = pd.read_csv(
        path,
        dtype={"network_id": str, "domain": str},
        keep_default_na=False,
        na_values=[""],
        float_precision="round_trip",
    )
    return matrix_from_frame(frame)


def write_feature_csv(path: Union[str, Path], matrix: FeatureMatrix) -> Path:
    return write_csv(path, matrix_to_frame(matrix))


# ---------------------------------------------------------------------------
# Policies
# ---------------------------------------------------------------------------

def merge_small_domains(labels: pd.Series, min_domain_size: int) -> pd.Series:
    """Relabel every domain with fewer than min_domain_size members as "other"."""
    sizes = labels.value_counts()
    small = set(sizes[sizes < min_domain_size].index)
    if not small:
        return labels.copy()
    logger.info(f"Merging {len(small)} small domains into {OTHER_DOMAIN!r}: {sorted(small)}")
    return labels.where(~labels.isin(small), OTHER_DOMAIN)


def drop_sparse_networks(matrix: FeatureMatrix, threshold: float) -> FeatureMatrix:
    """
    Remove rows whose missing fraction over all columns strictly exceeds threshold.
    Imputed cells still count as missing.

    Raises:
        EmptyCorpusError: every row removed
    """
    fraction = matrix.unobserved.sum(axis=1) / max(1, len(matrix.cols))
    keep = fraction.index[~(fraction > threshold)]
    if len(keep) == 0:
        raise EmptyCorpusError(
            f"All {len(matrix.rows)} networks miss more than {threshold:.0%} of the features"
        )
    if len(keep) < len(matrix.rows):
        logger.info(f"Dropped {len(matrix.rows) - len(keep)} networks with > {threshold:.0%} missing")
    return matrix.take_rows(keep)


def drop_sparse_features_per_domain(matrix: FeatureMatrix, threshold: float) -> Dict[str, Set[str]]:
    """Per domain, the features missing (or imputed) in more than `threshold` of its rows."""
    excluded: Dict[str, Set[str]] = {}
    unobserved = matrix.unobserved
    for domain in matrix.domains:
        rows = matrix.domain_rows(domain)
        fraction = unobserved.loc[rows].sum(axis=0) / len(rows)
        excluded[domain] = set(fraction.index[fraction > threshold])
    return excluded


def quartiles(values) -> Tuple[float, float]:
    """First and third quartile, linear interpolation at position p * (n - 1)."""
    arr = np.asarray(values, dtype=np.float64).ravel()
    arr = arr[np.isfinite(arr)]
    if arr.size == 0:
        raise ValueError("quartiles need at least one finite value")
    q1, q3 = np.quantile(arr, [0.25, 0.75])
    return float(q1), float(q3)


def impute(
    matrix: FeatureMatrix,
    seed: int,
    audit: Optional[List[AuditEntry]] = None,
) -> FeatureMatrix:
    """
    Fill missing cells from the interquartile range of the domain's valid values.

    Each cell draws from its own generator keyed by (seed, network id, feature),
    so row order never changes a draw. With fewer than 4 valid values the
    domain median is used; with none the cell stays missing. Both cases are
    appended to `audit` when given.
    """
    if not matrix.missing.values.any():
        return matrix

    values = matrix.values.copy()
    missing = matrix.missing.copy()
    imputed = matrix.imputed.copy()
    unobserved = matrix.unobserved
    for domain in matrix.domains:
        rows = matrix.domain_rows(domain)
        block_missing = matrix.missing.loc[rows]
        for feature in block_missing.columns[block_missing.any(axis=0)]:
            observed = ~unobserved.loc[rows, feature]
            valid = matrix.values.loc[rows, feature][observed].to_numpy()
            holes = block_missing.index[block_missing[feature]]

            if len(valid) >= MIN_IMPUTATION_VALUES:
                q1, q3 = quartiles(valid)
                for network_id in holes:
                    draw = q1 if q1 == q3 else rng_for(seed, network_id, feature).uniform(q1, q3)
                    values.at[network_id, feature] = draw
                    missing.at[network_id, feature] = False
                    imputed.at[network_id, feature] = True
                continue

            if len(valid) == 0:
                logger.warning(f"Domain {domain}: no valid values of {feature}; {len(holes)} cells stay missing")
                rule, detail = ExclusionRule.UNIMPUTABLE, "no valid values in domain"
            else:
                median = float(np.median(valid))
                for network_id in holes:
                    values.at[network_id, feature] = median
                    missing.at[network_id, feature] = False
                    imputed.at[network_id, feature] = True
                rule, detail = ExclusionRule.IMPUTATION_FALLBACK, f"{len(valid)} valid values, median used"
            if audit is not None:
                audit.extend(
                    AuditEntry(rule=rule, network_id=nid, feature=feature, domain=domain, detail=detail)
                    for nid in holes
                )

    return FeatureMatrix(values=values, missing=missing, domain_of=matrix.domain_of, imputed=imputed)


def _round_significant(series: pd.Series) -> pd.Series:
    digits = CONSTANT_SIGNIFICANT_DIGITS - 1
    return series.dropna().map(lambda v: float(f"{v:.{digits}e}"))


def _constant(series: pd.Series, n_rows: int, constant_fraction: float) -> bool:
    rounded = _round_significant(series)
    if rounded.empty:
        return False
    return rounded.value_counts().iloc[0] / n_rows > constant_fraction


def drop_constant_features(
    matrix: FeatureMatrix, constant_fraction: float
) -> Tuple[Dict[str, Set[str]], Set[str]]:
    """
    Features whose most frequent value (12 significant digits) covers more
    than constant_fraction of the rows.

    Returns:
        (per-domain excluded sets, globally excluded set)
    """
    per_domain: Dict[str, Set[str]] = {}
    for domain in matrix.domains:
        rows = matrix.domain_rows(domain)
        block = matrix.values.loc[rows]
        per_domain[domain] = {
            f for f in matrix.cols if _constant(block[f], len(rows), constant_fraction)
        }
    global_set = {
        f for f in matrix.cols if _constant(matrix.values[f], len(matrix.rows), constant_fraction)
    }
    return per_domain, global_set


def undersample(labels: pd.Series, cap: int, seed: int) -> Set[str]:
    """Network ids kept when every domain is capped at `cap` members by seeded sampling."""
    if cap < 1:
        raise ValueError("undersample cap must be >= 1")
    kept: Set[str] = set()
    for domain in sorted(labels.unique()):
        members = sorted(labels.index[labels == domain])
        if len(members) <= cap:
            kept.update(members)
            continue
        rng = rng_for(seed, "undersample", domain)
        chosen = rng.choice(len(members), size=cap, replace=False)
        kept.update(members[i] for i in chosen)
        logger.debug(f"Undersampled {domain}: {len(members)} -> {cap}")
    return kept


def apply_policies(matrix: FeatureMatrix, policy: PolicyConfig) -> PolicyResult:
    """
    Run the policy sequence in its fixed order.

    merge_small_domains -> drop_sparse_networks -> drop_sparse_features_per_domain
    -> impute -> drop_constant_features

    The merge is checked once more after the network drop, so a domain that
    falls under min_domain_size there also ends up in "other". Together with
    the imputed-cell mask this makes the sequence a no-op on its own output.

    Raises:
        EmptyCorpusError: no network survives
    """
    if not matrix.rows:
        raise EmptyCorpusError("Feature matrix has no networks")
    audit: List[AuditEntry] = []

    labels = merge_small_domains(matrix.domain_of, policy.min_domain_size)
    for network_id in labels.index[labels != matrix.domain_of]:
        audit.append(AuditEntry(
            rule=ExclusionRule.SMALL_DOMAIN,
            network_id=network_id,
            domain=matrix.domain_of[network_id],
            detail=f"relabeled {OTHER_DOMAIN!r}",
        ))
    current = matrix.with_labels(labels)
    dropped_domains: Dict[str, ExclusionRule] = {
        d: ExclusionRule.SMALL_DOMAIN for d in sorted(set(matrix.domain_of) - set(labels))
    }

    before = set(current.rows)
    current = drop_sparse_networks(current, policy.network_missing_max)
    for network_id in sorted(before - set(current.rows)):
        audit.append(AuditEntry(
            rule=ExclusionRule.NETWORK_MISSING,
            network_id=network_id,
            domain=labels[network_id],
            detail=f"more than {policy.network_missing_max:.0%} of features missing",
        ))
    for domain in sorted(set(labels) - set(current.domain_of)):
        logger.warning(f"Domain {domain} lost every network to the missing-value policy")
        dropped_domains[domain] = ExclusionRule.NETWORK_MISSING

    # row drops can push a domain under the minimum; merge again on the surviving sizes
    shrunk = merge_small_domains(current.domain_of, policy.min_domain_size)
    for network_id in shrunk.index[shrunk != current.domain_of]:
        audit.append(AuditEntry(
            rule=ExclusionRule.SMALL_DOMAIN,
            network_id=network_id,
            domain=current.domain_of[network_id],
            detail=f"relabeled {OTHER_DOMAIN!r} after sparse networks were dropped",
        ))
    for domain in sorted(set(current.domain_of) - set(shrunk)):
        dropped_domains[domain] = ExclusionRule.SMALL_DOMAIN
    current = current.with_labels(shrunk)

    excluded_per_domain: Dict[str, Dict[str, ExclusionRule]] = defaultdict(dict)
    for domain, features in drop_sparse_features_per_domain(
        current, policy.feature_missing_max_per_domain
    ).items():
        for feature in sorted(features):
            excluded_per_domain[domain][feature] = ExclusionRule.FEATURE_MISSING
            audit.append(AuditEntry(rule=ExclusionRule.FEATURE_MISSING, feature=feature, domain=domain))

    current = impute(current, policy.rng_seed, audit)
    unimputable = set(current.missing.columns[current.missing.any(axis=0)])
    for feature in sorted(unimputable):
        logger.warning(f"Feature {feature} has unimputable cells; excluded from every task")

    per_domain_constant, global_constant = drop_constant_features(current, policy.constant_fraction)
    for domain, features in per_domain_constant.items():
        for feature in sorted(features):
            if feature not in excluded_per_domain[domain]:
                excluded_per_domain[domain][feature] = ExclusionRule.CONSTANT_IN_DOMAIN
                audit.append(AuditEntry(rule=ExclusionRule.CONSTANT_IN_DOMAIN, feature=feature, domain=domain))
    excluded_global = {f: ExclusionRule.CONSTANT_GLOBAL for f in sorted(global_constant)}
    for feature in excluded_global:
        audit.append(AuditEntry(rule=ExclusionRule.CONSTANT_GLOBAL, feature=feature))

    logger.info(
        f"Policies kept {len(current.rows)}/{len(matrix.rows)} networks in "
        f"{len(current.domains)} domains; {len(excluded_global)} features excluded globally"
    )
    return PolicyResult(
        matrix=current,
        excluded_per_domain={d: dict(sorted(excluded_per_domain[d].items())) for d in current.domains},
        excluded_global=excluded_global,
        unimputable=unimputable,
        audit=audit,
        dropped_domains=dropped_domains,
    )


def policy_artifact(result: PolicyResult) -> PolicyArtifact:
    sizes = result.matrix.domain_of.value_counts()
    return PolicyArtifact(
        excluded_per_domain=result.excluded_per_domain,
        excluded_global=result.excluded_global,
        unimputable=sorted(result.unimputable),
        dropped_domains=result.dropped_domains,
        domain_sizes={d: int(sizes[d]) for d in sorted(sizes.index)},
        audit=result.audit,
    )


def policy_result_from_artifact(matrix: FeatureMatrix, artifact: PolicyArtifact) -> PolicyResult:
    """Rebuild a PolicyResult from the persisted cleaned matrix and its artifact."""
    return PolicyResult(
        matrix=matrix,
        excluded_per_domain=artifact.excluded_per_domain,
        excluded_global=artifact.excluded_global,
        unimputable=set(artifact.unimputable),
        audit=list(artifact.audit),
        dropped_domains=artifact.dropped_domains,
    )
