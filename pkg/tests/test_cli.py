"""Tests for the command line entry point."""
import pytest
import yaml

from netdomain.cli import EXIT_EMPTY_CORPUS, EXIT_ERROR, EXIT_OK, build_parser, main
from netdomain.utils.synthetic import make_corpus


def _write_config(directory, **values):
    path = directory / "config.yaml"
    path.write_text(yaml.safe_dump(values))
    return path


@pytest.fixture
def small_corpus(tmp_path):
    return make_corpus(tmp_path / "corpus", seed=1, per_domain=3)


def test_parser_accepts_stages_and_overrides():
    args = build_parser().parse_args(["select", "--config", "c.yaml", "--seed", "4", "--undersample-cap", "20"])
    assert args.stage == "select"
    assert args.seed == 4
    assert args.undersample_cap == 20
    assert args.auto_project is None


def test_parser_rejects_unknown_stage():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["train", "--config", "c.yaml"])


def test_missing_config_exits_with_error(tmp_path):
    assert main(["all", "--config", str(tmp_path / "absent.yaml")]) == EXIT_ERROR


def test_invalid_config_exits_with_error(tmp_path):
    config = _write_config(tmp_path, manifest="m.csv", seed=0, unknown_key=1)
    assert main(["ingest", "--config", str(config)]) == EXIT_ERROR


def test_stage_out_of_order_exits_with_error(tmp_path, small_corpus):
    config = _write_config(tmp_path, manifest=str(small_corpus), output_dir="out", seed=0)
    assert main(["filter", "--config", str(config)]) == EXIT_ERROR


def test_ingest_runs(tmp_path, small_corpus):
    config = _write_config(tmp_path, manifest=str(small_corpus), output_dir="out", seed=0)
    assert main(["ingest", "--config", str(config)]) == EXIT_OK
    assert (tmp_path / "out" / "networks.csv").exists()
    assert (tmp_path / "out" / ".stages" / "ingest.json").exists()


def test_empty_corpus_exit_code(tmp_path, small_corpus):
    # a zero wall-time budget leaves every feature missing
    config = _write_config(
        tmp_path,
        manifest=str(small_corpus),
        output_dir="out",
        seed=0,
        budgets={"default": {"wall_time": 0}},
        policy={"min_domain_size": 1},
    )
    assert main(["all", "--config", str(config)]) == EXIT_EMPTY_CORPUS
