"""
Random forest service.
Depth-limited CART forest with balanced per-tree bootstraps, and One-vs-Rest
F1 evaluation under repeated stratified k-fold cross-validation.

Trees live in flat arrays in heap layout (children of node i at 2i+1 and
2i+2); growing and prediction run in numba kernels.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from numba import njit
from sklearn.metrics import f1_score as sk_f1_score

from netdomain.core.exceptions import CrossValidationError, SelectionError
from netdomain.schemas import CVConfig, EvaluationResult, ForestExport, ForestParams, TreeNode
from netdomain.utils.seeding import derive_seed

logger = logging.getLogger(__name__)

LEAF = -1
UNUSED = -2
GINI_EPS = 1e-12
SEED_BOUND = 2**31 - 1

Split = Tuple[np.ndarray, np.ndarray]


@njit(cache=True)
def _grow_trees(X, y, boot, split_seeds, n_candidates, max_depth, min_leaf, feat, thr, prob):
    """Grow one tree per bootstrap row of `boot` into feat/thr/prob (n_trees x max_nodes)."""
    n_trees, n_boot = boot.shape
    n_features = X.shape[1]
    max_nodes = feat.shape[1]
    idx = np.empty(n_boot, dtype=np.int64)
    buf = np.empty(n_boot, dtype=np.int64)
    perm = np.arange(n_features)
    st_node = np.empty(max_nodes, dtype=np.int64)
    st_start = np.empty(max_nodes, dtype=np.int64)
    st_end = np.empty(max_nodes, dtype=np.int64)
    st_depth = np.empty(max_nodes, dtype=np.int64)

    for t in range(n_trees):
        np.random.seed(split_seeds[t])
        for k in range(n_features):
            perm[k] = k
        for i in range(n_boot):
            idx[i] = boot[t, i]

        top = 1
        st_node[0] = 0
        st_start[0] = 0
        st_end[0] = n_boot
        st_depth[0] = 0
        while top > 0:
            top -= 1
            node = st_node[top]
            s = st_start[top]
            e = st_end[top]
            depth = st_depth[top]
            n = e - s

            pos = 0
            for i in range(s, e):
                pos += y[idx[i]]
            prob[t, node] = pos / n
            feat[t, node] = LEAF
            if pos == 0 or pos == n or depth >= max_depth or n < 2 * min_leaf:
                continue

            frac = pos / n
            best = 1.0 - frac * frac - (1.0 - frac) * (1.0 - frac) - GINI_EPS
            best_f = -1
            best_thr = 0.0
            vals = np.empty(n, dtype=np.float64)
            for k in range(n_candidates):
                # partial Fisher-Yates: perm[:k+1] is a uniform sample
                j = k + np.random.randint(0, n_features - k)
                tmp = perm[k]
                perm[k] = perm[j]
                perm[j] = tmp
                f = perm[k]
                for i in range(n):
                    vals[i] = X[idx[s + i], f]
                order = np.argsort(vals, kind="mergesort")
                left_pos = 0
                for i in range(n - 1):
                    left_pos += y[idx[s + order[i]]]
                    a = vals[order[i]]
                    b = vals[order[i + 1]]
                    if a == b:
                        continue
                    nl = i + 1
                    nr = n - nl
                    if nl < min_leaf or nr < min_leaf:
                        continue
                    pl = left_pos / nl
                    pr = (pos - left_pos) / nr
                    gini_l = 1.0 - pl * pl - (1.0 - pl) * (1.0 - pl)
                    gini_r = 1.0 - pr * pr - (1.0 - pr) * (1.0 - pr)
                    impurity = (nl * gini_l + nr * gini_r) / n
                    if impurity < best:
                        best = impurity
                        best_f = f
                        best_thr = a + (b - a) / 2.0
                        if best_thr >= b:
                            best_thr = a
            if best_f < 0:
                continue

            feat[t, node] = best_f
            thr[t, node] = best_thr
            n_left = 0
            for i in range(s, e):
                if X[idx[i], best_f] <= best_thr:
                    buf[n_left] = idx[i]
                    n_left += 1
            n_right = n_left
            for i in range(s, e):
                if X[idx[i], best_f] > best_thr:
                    buf[n_right] = idx[i]
                    n_right += 1
            for i in range(n):
                idx[s + i] = buf[i]

            st_node[top] = 2 * node + 2
            st_start[top] = s + n_left
            st_end[top] = e
            st_depth[top] = depth + 1
            top += 1
            st_node[top] = 2 * node + 1
            st_start[top] = s
            st_end[top] = s + n_left
            st_depth[top] = depth + 1
            top += 1


@njit(cache=True)
def _tree_votes(X, feat, thr, prob):
    """Number of trees whose leaf for each row has probability >= 0.5."""
    n_rows = X.shape[0]
    n_trees = feat.shape[0]
    votes = np.zeros(n_rows, dtype=np.int64)
    for r in range(n_rows):
        for t in range(n_trees):
            i = 0
            while feat[t, i] >= 0:
                if X[r, feat[t, i]] <= thr[t, i]:
                    i = 2 * i + 1
                else:
                    i = 2 * i + 2
            if prob[t, i] >= 0.5:
                votes[r] += 1
    return votes


def _as_matrix(X) -> np.ndarray:
    arr = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError("X must be 2-dimensional")
    if not np.isfinite(arr).all():
        raise ValueError("X must be finite")
    return arr


def _as_labels(y) -> np.ndarray:
    arr = np.asarray(y).astype(np.int64).ravel()
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("labels must be 0 (rest) or 1 (one)")
    return arr


def balanced_bootstrap(y, rng: np.random.Generator) -> np.ndarray:
    """
    Draw, with replacement, m indices from each class (m = minority size).

    Returns:
        2m row indices, positives first
    """
    y = _as_labels(y)
    pos = np.flatnonzero(y == 1)
    neg = np.flatnonzero(y == 0)
    if len(pos) == 0 or len(neg) == 0:
        empty = "one" if len(pos) == 0 else "rest"
        raise CrossValidationError(f"Balanced bootstrap needs both classes; class {empty!r} is empty")
    m = min(len(pos), len(neg))
    return np.concatenate([pos[rng.integers(0, len(pos), m)], neg[rng.integers(0, len(neg), m)]])


def _max_nodes(max_depth: int) -> int:
    return 2 ** (max_depth + 1) - 1


def _grow(X: np.ndarray, y: np.ndarray, boot: np.ndarray, split_seeds: np.ndarray, params: ForestParams):
    n_trees = boot.shape[0]
    size = _max_nodes(params.max_depth)
    feat = np.full((n_trees, size), UNUSED, dtype=np.int64)
    thr = np.zeros((n_trees, size), dtype=np.float64)
    prob = np.zeros((n_trees, size), dtype=np.float64)
    _grow_trees(
        X, y, np.ascontiguousarray(boot, dtype=np.int64), split_seeds.astype(np.int64),
        params.split_candidates(X.shape[1]), params.max_depth, params.min_samples_leaf,
        feat, thr, prob,
    )
    return feat, thr, prob


def _to_tree_node(feat, thr, prob, features: Sequence[str], i: int = 0) -> TreeNode:
    if feat[i] < 0:
        return TreeNode(probability=float(prob[i]))
    return TreeNode(
        feature=features[feat[i]],
        threshold=float(thr[i]),
        left=_to_tree_node(feat, thr, prob, features, 2 * i + 1),
        right=_to_tree_node(feat, thr, prob, features, 2 * i + 2),
    )


def _default_names(n_features: int) -> List[str]:
    return [f"x{i}" for i in range(n_features)]


def fit_tree(
    X, y, params: ForestParams, rng: np.random.Generator, features: Optional[Sequence[str]] = None
) -> TreeNode:
    """
    Grow a single CART tree on all rows (no bootstrap).

    At each node `params.split_candidates(p)` random features are scanned;
    thresholds are midpoints of consecutive distinct values and the split
    with the lowest weighted Gini wins if it improves on the node.
    """
    X = _as_matrix(X)
    y = _as_labels(y)
    if len(y) == 0 or len(y) != X.shape[0]:
        raise ValueError("fit_tree needs at least one sample and one label per row")
    boot = np.arange(len(y), dtype=np.int64).reshape(1, -1)
    split_seed = np.array([rng.integers(0, SEED_BOUND)], dtype=np.int64)
    feat, thr, prob = _grow(X, y, boot, split_seed, params)
    return _to_tree_node(feat[0], thr[0], prob[0], list(features or _default_names(X.shape[1])))


@dataclass(frozen=True, eq=False)
class ForestModel:
    """A trained forest; immutable."""
    params: ForestParams
    features: List[str]
    seed: int
    tree_seeds: List[int]
    feat: np.ndarray
    thr: np.ndarray
    prob: np.ndarray

    def predict_votes(self, X) -> np.ndarray:
        X = _as_matrix(X)
        if X.shape[1] != len(self.features):
            raise ValueError(f"Expected {len(self.features)} features, got {X.shape[1]}")
        return _tree_votes(X, self.feat, self.thr, self.prob)

    def predict(self, X) -> np.ndarray:
        """1 when at least half of the trees vote for the "one" class."""
        votes = self.predict_votes(X)
        return (2 * votes >= self.params.n_trees).astype(np.int64)

    def to_tree_node(self, tree: int) -> TreeNode:
        return _to_tree_node(self.feat[tree], self.thr[tree], self.prob[tree], self.features)

    def export(self) -> ForestExport:
        return ForestExport(
            params=self.params,
            features=self.features,
            seed=self.seed,
            tree_seeds=self.tree_seeds,
            balancing="balanced-bootstrap" if self.params.balanced_bootstrap else "bootstrap",
            trees=[self.to_tree_node(t) for t in range(self.params.n_trees)],
        )


def fit_forest(
    X, y, params: ForestParams, seed: int, features: Optional[Sequence[str]] = None
) -> ForestModel:
    """
    Train n_trees trees, each on its own bootstrap.

    Tree t uses a Generator seeded by the t-th word of SeedSequence(seed), so
    every tree depends only on (seed, t).
    """
    X = _as_matrix(X)
    y = _as_labels(y)
    if len(y) == 0 or len(y) != X.shape[0]:
        raise ValueError("fit_forest needs at least one sample and one label per row")

    tree_seeds = np.random.SeedSequence(seed).generate_state(params.n_trees, dtype=np.uint32)
    boots = []
    split_seeds = np.empty(params.n_trees, dtype=np.int64)
    for t, tree_seed in enumerate(tree_seeds):
        rng = np.random.default_rng(int(tree_seed))
        if params.balanced_bootstrap:
            boots.append(balanced_bootstrap(y, rng))
        else:
            boots.append(rng.integers(0, len(y), len(y)))
        split_seeds[t] = rng.integers(0, SEED_BOUND)

    feat, thr, prob = _grow(X, y, np.vstack(boots), split_seeds, params)
    return ForestModel(
        params=params,
        features=list(features or _default_names(X.shape[1])),
        seed=seed,
        tree_seeds=[int(s) for s in tree_seeds],
        feat=feat,
        thr=thr,
        prob=prob,
    )


def f1_score(y_true, y_pred, positive: int = 1) -> float:
    """F1 of the positive class; 0 when it has no true, false or missed positives."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape[0] != y_pred.shape[0]:
        raise ValueError(f"Length mismatch: {y_true.shape[0]} labels vs {y_pred.shape[0]} predictions")
    return float(sk_f1_score(y_true, y_pred, pos_label=positive, average="binary", zero_division=0))


def _is_degenerate(y_true: np.ndarray, y_pred: np.ndarray) -> bool:
    return not ((y_true == 1) | (y_pred == 1)).any()


def stratified_kfold_indices(y, folds: int, repeats: int, seed: int) -> List[Split]:
    """
    Repeated stratified k-fold partitions.

    Per repeat each class is shuffled and dealt round-robin into folds, the
    deal continuing where the previous class stopped.

    Returns:
        folds * repeats (train, test) pairs, repeat-major
    """
    y = np.asarray(y)
    classes, counts = np.unique(y, return_counts=True)
    for cls, count in zip(classes, counts):
        if count < folds:
            name = "one" if cls == 1 else "rest"
            raise CrossValidationError(
                f"Class {name!r} has {count} samples, fewer than {folds} folds"
            )

    splits: List[Split] = []
    for repeat in range(repeats):
        rng = np.random.default_rng([seed, repeat])
        fold_of = np.empty(len(y), dtype=np.int64)
        offset = 0
        for cls in classes:
            members = rng.permutation(np.flatnonzero(y == cls))
            fold_of[members] = (offset + np.arange(len(members))) % folds
            offset = (offset + len(members)) % folds
        for fold in range(folds):
            test = np.flatnonzero(fold_of == fold)
            train = np.flatnonzero(fold_of != fold)
            splits.append((train, test))
    return splits


def evaluate(
    X: pd.DataFrame,
    y,
    features: Sequence[str],
    cv: CVConfig,
    params: ForestParams,
    splits: Optional[List[Split]] = None,
) -> EvaluationResult:
    """
    Mean One-vs-Rest F1 of a feature subset over all CV splits.

    Args:
        X: feature table, one row per network
        y: 1 for the target domain, 0 for the rest
        features: subset of X's columns to train on
        cv: folds, repeats and seed
        params: forest parameters
        splits: precomputed partitions (shared across subsets of one task)

    Returns:
        EvaluationResult with the per-split scores
    """
    features = list(features)
    if not features:
        raise SelectionError("Feature subset must not be empty")
    unknown = [f for f in features if f not in X.columns]
    if unknown:
        raise SelectionError(f"Unknown features {unknown}")

    y = _as_labels(y)
    data = _as_matrix(X[features].to_numpy())
    if splits is None:
        splits = stratified_kfold_indices(y, cv.folds, cv.repeats, cv.seed)

    scores: List[float] = []
    degenerate = 0
    for i, (train, test) in enumerate(splits):
        model = fit_forest(data[train], y[train], params, derive_seed(cv.seed, "forest", i), features)
        predicted = model.predict(data[test])
        if _is_degenerate(y[test], predicted):
            degenerate += 1
        scores.append(f1_score(y[test], predicted))

    if degenerate:
        logger.warning(f"{degenerate} degenerate folds for {features}")
    return EvaluationResult(
        features=features,
        mean_f1=float(np.mean(scores)),
        fold_scores=scores,
        degenerate_folds=degenerate,
    )
