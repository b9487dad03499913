"""Tests for the modified forward selection wrapper."""
import numpy as np
import pandas as pd
import pytest

from netdomain.core.enums import ExclusionRule
from netdomain.core.exceptions import ExcludedFeatureError, SelectionError
from netdomain.schemas import ComboScore, CVConfig, ForestParams, PolicyConfig, SelectionOptions
from netdomain.services.correlation import filter_domain
from netdomain.services.dataset import apply_policies
from netdomain.services.selection import (
    consistency_overlap,
    correlated_alternates,
    enumerate_combos,
    evaluate_combos,
    evaluate_named_combo,
    extension_count,
    rank_singletons,
    run_selection,
    select_domain,
)
from tests.helpers import make_matrix

PARAMS = ForestParams(n_trees=25)
CV = CVConfig(folds=5, repeats=1, seed=2)


def _score(features, f1):
    return ComboScore(features=list(features), mean_f1=f1, fold_scores=[f1])


def test_enumerate_combos_counts():
    top = [f"f{i}" for i in range(15)]
    pairs, triplets = enumerate_combos(top)
    assert len(pairs) == 105
    assert len(triplets) == 455
    assert pairs[0] == ("f0", "f1")

    pairs, triplets = enumerate_combos(["a", "b", "c", "d"])
    assert (len(pairs), len(triplets)) == (6, 4)
    pairs, triplets = enumerate_combos(["a", "b", "c"])
    assert (len(pairs), len(triplets)) == (3, 1)
    assert enumerate_combos(["a"]) == ([], [])


def test_extension_count():
    assert extension_count(10, 15) == 130
    assert extension_count(10, 2) == 0


def test_consistency_overlap_full_and_empty():
    finalists = ["a", "b", "c", "d"]
    pairs = [_score(p, 0.9) for p in [("a", "b"), ("c", "d")]]
    extended = [("a", "b", "c"), ("a", "b", "d"), ("a", "c", "d"), ("b", "c", "d")]
    triplets = [_score(t, 0.8) for t in extended]
    assert consistency_overlap(pairs, triplets, finalists, n_pairs=2, n_triplets=4) == pytest.approx(100.0)

    disjoint = [_score(("a", "b"), 0.9), _score(("a", "c"), 0.8)]
    triplets = [_score(("b", "c", "d"), 0.8)]
    assert consistency_overlap(disjoint, triplets, finalists, n_pairs=1, n_triplets=1) == 0.0


def test_consistency_overlap_needs_enough_scores():
    with pytest.raises(SelectionError):
        consistency_overlap([_score(("a", "b"), 0.5)], [], ["a", "b", "c"], n_pairs=1, n_triplets=1)


def test_singletons_rank_signal_first(xor_task):
    X, y = xor_task
    X = X.assign(label_copy=y + np.random.default_rng(0).uniform(0, 0.1, len(y)))
    ranked = rank_singletons(X, y, ["x1", "x2", "noise", "label_copy"], CV, PARAMS)
    assert ranked[0].features == ["label_copy"]
    assert [s.mean_f1 for s in ranked] == sorted((s.mean_f1 for s in ranked), reverse=True)


def test_xor_pair_beats_both_singlets(xor_task):
    X, y = xor_task
    singles = {s.features[0]: s.mean_f1 for s in rank_singletons(X, y, ["x1", "x2"], CV, PARAMS)}
    pair = evaluate_combos(X, y, [["x2", "x1"]], CV, PARAMS)[0]
    assert pair.features == ["x1", "x2"]
    assert pair.mean_f1 - max(singles.values()) >= 0.3


def test_evaluate_combos_same_with_worker_pool(xor_task):
    X, y = xor_task
    combos = [["x1", "x2"], ["x1", "noise"], ["x2", "noise"]]
    serial = evaluate_combos(X, y, combos, CV, PARAMS, jobs=1)
    pooled = evaluate_combos(X, y, combos, CV, PARAMS, jobs=2)
    assert [s.model_dump() for s in serial] == [s.model_dump() for s in pooled]


def test_evaluate_combos_canonicalizes_and_dedups(xor_task):
    X, y = xor_task
    scores = evaluate_combos(X, y, [["noise", "x1"], ["x1", "noise"]], CV, PARAMS)
    assert len(scores) == 1
    assert scores[0].features == ["x1", "noise"]


def test_evaluate_combos_rejects_empty_list(xor_task):
    X, y = xor_task
    with pytest.raises(SelectionError):
        evaluate_combos(X, y, [], CV, PARAMS)


def test_named_combo_matches_ranked_score(xor_task):
    X, y = xor_task
    ranked = evaluate_combos(X, y, [["x1", "x2"]], CV, PARAMS)[0]
    named = evaluate_named_combo(X, y, ["x2", "x1"], CV, PARAMS)
    assert named.mean_f1 == ranked.mean_f1
    assert named.fold_scores == ranked.fold_scores


def test_named_combo_unknown_feature(xor_task):
    X, y = xor_task
    with pytest.raises(SelectionError):
        evaluate_named_combo(X, y, ["x1", "nope"], CV, PARAMS)


def test_named_combo_excluded_feature(xor_task):
    X, y = xor_task

    class _Policy:
        def exclusion_rule(self, domain, feature):
            return ExclusionRule.CONSTANT_IN_DOMAIN if feature == "x2" else None

    with pytest.raises(ExcludedFeatureError) as exc:
        evaluate_named_combo(X, y, ["x1", "x2"], CV, PARAMS, policy=_Policy(), domain="tree")
    assert exc.value.feature == "x2"


def test_correlated_alternates():
    x = np.arange(20.0)
    frame = pd.DataFrame({
        "a": x,
        "b": 2 * x + 1,
        "c": np.sin(x),
        "d": -x + 0.01 * np.cos(x),
    })
    assert correlated_alternates("a", frame) == ["b", "d"]
    assert correlated_alternates("c", frame) == []
    with pytest.raises(SelectionError):
        correlated_alternates("zz", frame)


def test_run_selection_small_candidate_set(xor_task):
    X, y = xor_task
    options = SelectionOptions(top_k=3, consistency_pairs=2, consistency_triplets=1,
                               named_combos={"both": ["x1", "x2"], "bad": ["ghost"]})
    run = run_selection(X, y, ["x1", "x2", "noise"], CV, PARAMS, options)
    assert run.n_rows == 200
    assert run.finalists == ["x1", "x2", "noise"]
    assert len(run.pairs) == 3
    assert len(run.triplets) == 1
    assert run.consistency_overlap == pytest.approx(100.0)
    assert run.winner().mean_f1 >= run.best(2).mean_f1 - 1e-12
    assert {n.name for n in run.named} == {"both", "bad"}
    bad = next(n for n in run.named if n.name == "bad")
    assert bad.score is None and bad.error


def test_run_selection_respects_max_combo_size(xor_task):
    X, y = xor_task
    options = SelectionOptions(top_k=3, max_combo_size=2)
    run = run_selection(X, y, ["x1", "x2", "noise"], CV, PARAMS, options)
    assert run.triplets == []
    assert run.consistency_overlap is None
    assert run.best(3) is None


def _two_domain_task(n_a=30, n_b=30, shadow=False):
    gen = np.random.default_rng(21)
    domains = ["A"] * n_a + ["B"] * n_b
    is_a = np.array([d == "A" for d in domains])
    values = {
        "signal": np.where(is_a, 1.0, 0.0) + gen.uniform(0, 0.5, len(domains)),
        "n1": gen.normal(size=len(domains)),
        "n2": gen.normal(size=len(domains)),
    }
    if shadow:
        # tracks signal inside A, constant over the much larger B
        values["shadow"] = np.where(is_a, 2 * values["signal"] + 1, 0.0)
    policy = apply_policies(make_matrix(values, domains), PolicyConfig(min_domain_size=2, rng_seed=1))
    return policy, filter_domain(policy.matrix, "A", policy.task_features("A"))


def test_select_domain_with_undersampled_rerun():
    policy, filtered = _two_domain_task()
    report = select_domain(
        policy.matrix, policy, filtered, CV, PARAMS, SelectionOptions(top_k=3),
        undersample_cap=20, seed=4,
    )
    assert report.domain == "A"
    assert report.full.n_rows == 60
    assert report.full.n_positive == 30
    assert report.undersampled.n_rows == 40
    assert report.undersampled.n_positive == 20
    assert report.full.best(1).features == ["signal"]
    assert set(report.correlated_alternates) == set(report.full.winner().features)
    assert report.undersampled_error is None


def test_undersampled_rerun_too_small_keeps_full_run():
    policy, filtered = _two_domain_task()
    report = select_domain(
        policy.matrix, policy, filtered, CV, PARAMS, SelectionOptions(top_k=3),
        undersample_cap=3, seed=4,
    )
    assert report.undersampled is None
    assert "fewer than 5 folds" in report.undersampled_error
    assert report.full.n_rows == 60
    assert report.full.winner() is not None


def test_alternates_include_features_outside_the_task():
    policy, filtered = _two_domain_task(n_b=130, shadow=True)
    assert policy.exclusion_rule("A", "shadow") == ExclusionRule.CONSTANT_GLOBAL
    assert "shadow" not in filtered.retained

    report = select_domain(policy.matrix, policy, filtered, CV, PARAMS, SelectionOptions(top_k=3))
    assert report.full.winner().features == ["signal"]
    assert "shadow" in report.correlated_alternates["signal"]
