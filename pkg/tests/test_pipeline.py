"""End-to-end runs of the staged pipeline on the synthetic corpus."""
import pandas as pd
import pytest

from netdomain.core.enums import STAGE_ORDER, Stage
from netdomain.core.exceptions import MissingArtifactError
from netdomain.schemas import PipelineConfig, ReportConfig
from netdomain.services.pipeline import Layout, run_pipeline, run_stage
from netdomain.utils.io import read_json
from netdomain.utils.synthetic import make_corpus

pytestmark = pytest.mark.slow

# cycle-sensitive measure families
TREE_SIGNATURES = ("density", "transitivity", "core", "clustering", "triangle", "embeddedness")


@pytest.fixture(scope="module")
def manifest(tmp_path_factory):
    return make_corpus(tmp_path_factory.mktemp("corpus"), seed=0, per_domain=30)


def _config(manifest, output_dir, seed=0, **extra) -> PipelineConfig:
    return PipelineConfig(
        manifest=str(manifest),
        output_dir=str(output_dir),
        seed=seed,
        forest={"n_trees": 30},
        cv={"folds": 5, "repeats": 1},
        selection={"top_k": 6, "consistency_pairs": 3, "consistency_triplets": 10},
        embed={"cap": None},
        **extra,
    )


@pytest.fixture(scope="module")
def finished_run(manifest, tmp_path_factory):
    config = _config(manifest, tmp_path_factory.mktemp("run"))
    artifacts = run_pipeline(config)
    return config, artifacts


def _winners(layout: Layout) -> pd.DataFrame:
    winners = pd.read_csv(layout.report / "winners.csv")
    return winners[winners["overall_winner"]].set_index("domain")


def test_all_stages_record_artifacts(finished_run):
    config, artifacts = finished_run
    assert [a.stage for a in artifacts] == STAGE_ORDER
    layout = Layout(config.output_dir)
    for stage in STAGE_ORDER:
        assert layout.artifact(stage).exists()


def test_every_synthetic_domain_is_separable(finished_run):
    config, _ = finished_run
    layout = Layout(config.output_dir)
    for domain in ("tree", "grid", "community", "ring"):
        verdict = read_json(layout.report / "domains" / f"{domain}.json")["verdict"]
        assert verdict["separable"], domain


def test_tree_winner_uses_expected_measures(finished_run):
    config, _ = finished_run
    combo = _winners(Layout(config.output_dir)).loc["tree", "combo"]
    assert any(signature in combo for signature in TREE_SIGNATURES)


def test_embedding_covers_every_kept_network(finished_run):
    config, _ = finished_run
    layout = Layout(config.output_dir)
    coords = pd.read_csv(layout.embed / "coordinates.csv")
    assert len(coords) == 120
    assert list(coords.columns) == ["network_id", "domain", "pc1", "pc2"]


def test_rerun_skips_every_stage(finished_run):
    config, artifacts = finished_run
    again = run_pipeline(config)
    assert [a.timestamp for a in again] == [a.timestamp for a in artifacts]


def test_config_change_reruns_downstream_only(manifest, tmp_path):
    config = _config(manifest, tmp_path / "out")
    first = {a.stage: a for a in run_pipeline(config)}
    changed = config.model_copy(update={"report": ReportConfig(separability_threshold=0.95)})
    second = {a.stage: a for a in run_pipeline(changed)}
    for stage in (Stage.INGEST, Stage.MEASURE, Stage.ASSEMBLE, Stage.FILTER, Stage.SELECT, Stage.EMBED):
        assert second[stage].timestamp == first[stage].timestamp
    assert second[Stage.REPORT].timestamp != first[Stage.REPORT].timestamp


def test_deleted_output_triggers_rerun(finished_run):
    config, artifacts = finished_run
    layout = Layout(config.output_dir)
    (layout.report / "summary.txt").unlink()
    redone = run_stage(Stage.REPORT, config)
    assert (layout.report / "summary.txt").exists()
    before = next(a for a in artifacts if a.stage == Stage.REPORT)
    assert redone.content_digest == before.content_digest


def test_bundle_is_byte_identical_across_runs(finished_run, manifest, tmp_path):
    config, _ = finished_run
    other = _config(manifest, tmp_path / "again")
    run_pipeline(other)
    first, second = Layout(config.output_dir).report, Layout(other.output_dir).report
    names = sorted(p.relative_to(first) for p in first.rglob("*") if p.is_file())
    assert names == sorted(p.relative_to(second) for p in second.rglob("*") if p.is_file())
    for name in names:
        assert (first / name).read_bytes() == (second / name).read_bytes(), name


def test_seed_change_keeps_verdicts(finished_run, manifest, tmp_path):
    config, _ = finished_run
    other = _config(manifest, tmp_path / "seeded", seed=17)
    run_pipeline(other)
    for domain in ("tree", "grid", "community", "ring"):
        a = read_json(Layout(config.output_dir).report / "domains" / f"{domain}.json")["verdict"]
        b = read_json(Layout(other.output_dir).report / "domains" / f"{domain}.json")["verdict"]
        assert a["separable"] == b["separable"]


def test_stage_without_upstream_fails(manifest, tmp_path):
    config = _config(manifest, tmp_path / "fresh")
    with pytest.raises(MissingArtifactError) as exc:
        run_stage(Stage.FILTER, config)
    assert exc.value.upstream == Stage.ASSEMBLE.value
