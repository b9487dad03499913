"""
Pipeline service.
Runs the stages ingest -> measure -> assemble -> filter -> select -> report
-> embed as resumable units. Every stage records a StageArtifact under
<output>/.stages/ holding a digest of its outputs and of the config slice
and upstream digests it depends on; a stage is skipped while both match.
"""
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import pandas as pd

from netdomain.core.config import get_settings
from netdomain.core.constants import CATALOG_VERSION, STAGES_DIR
from netdomain.core.enums import STAGE_INPUTS, STAGE_ORDER, ExclusionRule, Stage
from netdomain.core.exceptions import (
    ConfigError, CorrelationError, CrossValidationError, MissingArtifactError,
)
from netdomain.core.workers import run_tasks
from netdomain.schemas import (
    CanonicalizationRecord, FilterResult, Graph, IngestSummary, PipelineConfig,
    PolicyArtifact, SelectionReport, StageArtifact,
)
from netdomain.services import dataset
from netdomain.services.correlation import filter_domain
from netdomain.services.embedding import pca_embed
from netdomain.services.graph_core import canonicalize, read_edge_list, read_graph, write_graph
from netdomain.services.measures import (
    build_sidecar, catalog, compute_corpus_features, feature_frame, write_feature_table,
)
from netdomain.services.report import DroppedDomain, emit_report
from netdomain.services.selection import select_domain
from netdomain.utils.io import (
    dumps_json, file_digest, files_digest, read_json, text_digest, write_csv, write_json,
)
from netdomain.utils.seeding import derive_seed

logger = logging.getLogger(__name__)

StageOutput = Tuple[List[Path], Dict[str, str]]


class Layout:
    """File locations inside the output directory."""

    def __init__(self, output_dir: str | Path):
        self.root = Path(output_dir)
        self.stages = self.root / STAGES_DIR
        self.graphs = self.root / "graphs"
        self.networks = self.root / "networks.csv"
        self.ingest_summary = self.root / "ingest.json"
        self.features = self.root / "features.csv"
        self.features_sidecar = self.root / "features.json"
        self.matrix = self.root / "matrix.csv"
        self.policy = self.root / "policy.json"
        self.filter = self.root / "filter"
        self.selection = self.root / "selection"
        self.report = self.root / "report"
        self.embed = self.root / "embed"

    def artifact(self, stage: Stage) -> Path:
        return self.stages / f"{stage.value}.json"

    def graph_files(self, network_id: str) -> Tuple[Path, Path]:
        return self.graphs / f"{network_id}.edges", self.graphs / f"{network_id}.labels"


# ---------------------------------------------------------------------------
# Config slices and digests
# ---------------------------------------------------------------------------

def _manifest_fingerprint(config: PipelineConfig) -> Dict[str, str]:
    entries = dataset.load_manifest(config.manifest)
    prints = {"manifest": file_digest(config.manifest)}
    for entry in entries:
        if not Path(entry.path).exists():
            raise ConfigError(f"Graph file for {entry.network_id} not found: {entry.path}")
        prints[entry.network_id] = file_digest(entry.path)
    return prints


def config_slice(stage: Stage, config: PipelineConfig) -> dict:
    """The part of the config a stage's outputs depend on."""
    if stage == Stage.INGEST:
        return {"inputs": _manifest_fingerprint(config), "auto_project": config.auto_project}
    if stage == Stage.MEASURE:
        specs = catalog()
        sliced = {
            "catalog": [CATALOG_VERSION] + [s.id for s in specs],
            "budgets": config.budgets.model_dump(mode="json"),
            "sampling": config.sampling.model_dump(mode="json"),
        }
        # the seed only reaches sampled shortest-path measures
        if any(s.needs_seed for s in specs):
            sliced["seed"] = config.seed
        return sliced
    if stage == Stage.ASSEMBLE:
        return {"policy": config.policy.model_dump(mode="json"), "seed": config.seed}
    if stage == Stage.FILTER:
        return {"correlation": config.correlation.model_dump(mode="json")}
    if stage == Stage.SELECT:
        return {
            "forest": config.forest.model_dump(mode="json"),
            "cv": config.cv.model_dump(mode="json"),
            "selection": config.selection.model_dump(mode="json"),
            "undersample_cap": config.undersample_cap,
            "seed": config.seed,
        }
    if stage == Stage.REPORT:
        return {
            "report": config.report.model_dump(mode="json"),
            "plot_top_n": config.selection.plot_top_n,
        }
    return {"embed": config.embed.model_dump(mode="json"), "seed": config.seed}


def _load_artifact(layout: Layout, stage: Stage) -> Optional[StageArtifact]:
    path = layout.artifact(stage)
    if not path.exists():
        return None
    return StageArtifact(**read_json(path))


def _upstream_digests(layout: Layout, stage: Stage) -> Dict[str, str]:
    digests = {}
    for upstream in STAGE_INPUTS[stage]:
        artifact = _load_artifact(layout, upstream)
        if artifact is None:
            raise MissingArtifactError(stage.value, upstream.value)
        digests[upstream.value] = artifact.content_digest
    return digests


def config_digest(stage: Stage, config: PipelineConfig, upstream: Dict[str, str]) -> str:
    return text_digest(dumps_json({"config": config_slice(stage, config), "upstream": upstream}))


def _up_to_date(layout: Layout, artifact: Optional[StageArtifact], digest: str) -> bool:
    if artifact is None or artifact.config_digest != digest:
        return False
    paths = [layout.root / p for p in artifact.outputs]
    if not all(p.exists() for p in paths):
        return False
    return files_digest(layout.root, paths) == artifact.content_digest


# ---------------------------------------------------------------------------
# Shared loaders
# ---------------------------------------------------------------------------

def _derived_seeds(config: PipelineConfig):
    policy = config.policy.model_copy(update={"rng_seed": derive_seed(config.seed, "impute")})
    cv = config.cv.model_copy(update={"seed": derive_seed(config.seed, "cv")})
    return policy, cv


def _load_policy_result(layout: Layout):
    matrix = dataset.read_feature_csv(layout.matrix)
    artifact = PolicyArtifact(**read_json(layout.policy))
    return dataset.policy_result_from_artifact(matrix, artifact)


def _load_filters(layout: Layout) -> Tuple[Dict[str, FilterResult], Dict[str, str]]:
    summary = read_json(layout.filter / "summary.json")
    filters = {
        domain: FilterResult(**read_json(layout.filter / f"{domain}.json"))
        for domain in summary["domains"]
    }
    return filters, summary["skipped"]


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------

def _ingest_task(path: str, network_id: str, project_onto, auto_project: bool):
    return canonicalize(read_edge_list(path), network_id, project_onto, auto_project)


def run_ingest(config: PipelineConfig, layout: Layout, jobs: int) -> StageOutput:
    entries = dataset.load_manifest(config.manifest)
    tasks = [
        (e.network_id, (e.path, e.network_id, e.project_onto, config.auto_project)) for e in entries
    ]
    results = run_tasks(_ingest_task, tasks, jobs=jobs, desc="ingest")

    outputs: List[Path] = []
    records: Dict[str, CanonicalizationRecord] = {}
    for entry in entries:
        graph, record = results[entry.network_id]
        edges_path, labels_path = layout.graph_files(entry.network_id)
        write_graph(edges_path, labels_path, graph)
        outputs += [edges_path, labels_path]
        records[entry.network_id] = record

    networks = pd.DataFrame(
        [{"network_id": e.network_id, "domain": e.domain} for e in entries],
        columns=["network_id", "domain"],
    ).sort_values("network_id")
    outputs.append(write_csv(layout.networks, networks))
    outputs.append(write_json(layout.ingest_summary, IngestSummary(networks=records)))
    return outputs, {"networks": str(len(entries))}


def _read_networks(layout: Layout) -> Dict[str, str]:
    frame = pd.read_csv(layout.networks, dtype=str, keep_default_na=False)
    return dict(zip(frame["network_id"], frame["domain"]))


def run_measure_stage(config: PipelineConfig, layout: Layout, jobs: int) -> StageOutput:
    domains = _read_networks(layout)
    graphs: Dict[str, Graph] = {nid: read_graph(*layout.graph_files(nid)) for nid in domains}
    vectors = compute_corpus_features(graphs, config.budgets, config.seed, config.sampling, jobs)
    frame = feature_frame(vectors, domains)
    sidecar = build_sidecar(vectors, config.budgets, config.sampling, config.seed)
    write_feature_table(layout.features, layout.features_sidecar, frame, sidecar)
    n_missing = sum(len(m) for m in sidecar.missing.values())
    return [layout.features, layout.features_sidecar], {"missing_cells": str(n_missing)}


def run_assemble(config: PipelineConfig, layout: Layout, jobs: int) -> StageOutput:
    policy, _ = _derived_seeds(config)
    matrix = dataset.read_feature_csv(layout.features)
    result = dataset.apply_policies(matrix, policy)
    dataset.write_feature_csv(layout.matrix, result.matrix)
    write_json(layout.policy, dataset.policy_artifact(result))
    details = {
        "networks": str(len(result.matrix.rows)),
        "domains": str(len(result.matrix.domains)),
    }
    return [layout.matrix, layout.policy], details


def run_filter(config: PipelineConfig, layout: Layout, jobs: int) -> StageOutput:
    result = _load_policy_result(layout)
    outputs: List[Path] = []
    kept: List[str] = []
    skipped: Dict[str, str] = {}
    for domain in result.matrix.domains:
        try:
            filtered = filter_domain(
                result.matrix, domain, result.task_features(domain), config.correlation.threshold
            )
        except CorrelationError as e:
            logger.warning(f"Filter skipped domain {domain}: {e}")
            skipped[domain] = str(e)
            continue
        outputs.append(write_json(layout.filter / f"{domain}.json", filtered))
        kept.append(domain)
    outputs.append(write_json(layout.filter / "summary.json", {"domains": kept, "skipped": skipped}))
    return outputs, {"domains": str(len(kept))}


def run_select(config: PipelineConfig, layout: Layout, jobs: int) -> StageOutput:
    _, cv = _derived_seeds(config)
    result = _load_policy_result(layout)
    filters, _ = _load_filters(layout)
    outputs: List[Path] = []
    dropped: Dict[str, str] = {}
    for domain in sorted(filters):
        try:
            report = select_domain(
                result.matrix, result, filters[domain], cv, config.forest, config.selection,
                config.undersample_cap, derive_seed(config.seed, "undersample"), jobs,
            )
        except CrossValidationError as e:
            logger.warning(f"Selection skipped domain {domain}: {e}")
            dropped[domain] = str(e)
            continue
        outputs.append(write_json(layout.selection / f"{domain}.json", report))
    outputs.append(write_json(layout.selection / "dropped.json", dropped))
    return outputs, {"domains": str(len(outputs) - 1)}


def run_report(config: PipelineConfig, layout: Layout, jobs: int) -> StageOutput:
    result = _load_policy_result(layout)
    filters, skipped = _load_filters(layout)
    insufficient = read_json(layout.selection / "dropped.json")
    reports = {
        domain: SelectionReport(**read_json(layout.selection / f"{domain}.json"))
        for domain in sorted(filters)
        if domain not in insufficient
    }

    dropped = [DroppedDomain(domain=d, rule=rule.value) for d, rule in sorted(result.dropped_domains.items())]
    dropped += [
        DroppedDomain(domain=d, rule="no-usable-features", detail=detail) for d, detail in sorted(skipped.items())
    ]
    dropped += [
        DroppedDomain(domain=d, rule=ExclusionRule.INSUFFICIENT_SAMPLES.value, detail=detail)
        for d, detail in sorted(insufficient.items())
    ]
    sizes = result.matrix.domain_of.value_counts()
    outputs = emit_report(
        layout.report,
        {d: int(sizes[d]) for d in sorted(sizes.index)},
        filters,
        reports,
        dropped,
        config.selection.plot_top_n,
        config.report.separability_threshold,
    )
    return outputs, {"domains": str(len(reports))}


def run_embed(config: PipelineConfig, layout: Layout, jobs: int) -> StageOutput:
    result = _load_policy_result(layout)
    matrix = result.matrix
    rows = matrix.rows
    if config.embed.cap is not None:
        kept = dataset.undersample(matrix.domain_of, config.embed.cap, derive_seed(config.seed, "embed"))
        rows = [r for r in rows if r in kept]
    features = [
        f for f in matrix.cols if f not in result.excluded_global and f not in result.unimputable
    ]
    embedding = pca_embed(matrix.values.loc[rows, features], config.embed.dims)

    coordinates = embedding.coordinates.copy()
    coordinates.insert(0, "domain", matrix.domain_of.loc[rows])
    coordinates.index.name = "network_id"
    outputs = [
        write_csv(layout.embed / "coordinates.csv", coordinates.reset_index()),
        write_json(layout.embed / "pca.json", {
            "features": embedding.features,
            "dropped": embedding.dropped,
            "explained_variance": embedding.explained.tolist(),
            "components": embedding.components.tolist(),
        }),
    ]
    return outputs, {"rows": str(len(rows))}


STAGE_RUNNERS: Dict[Stage, Callable[[PipelineConfig, Layout, int], StageOutput]] = {
    Stage.INGEST: run_ingest,
    Stage.MEASURE: run_measure_stage,
    Stage.ASSEMBLE: run_assemble,
    Stage.FILTER: run_filter,
    Stage.SELECT: run_select,
    Stage.REPORT: run_report,
    Stage.EMBED: run_embed,
}


# ---------------------------------------------------------------------------
# Orchestration
# ---------------------------------------------------------------------------

def run_stage(stage: Stage, config: PipelineConfig, force: bool = False) -> StageArtifact:
    """
    Run one stage unless its recorded artifact is up to date.

    Raises:
        MissingArtifactError: an upstream stage has not run yet
    """
    layout = Layout(config.output_dir)
    upstream = _upstream_digests(layout, stage)
    digest = config_digest(stage, config, upstream)
    existing = _load_artifact(layout, stage)
    if not force and _up_to_date(layout, existing, digest):
        logger.info(f"Stage {stage.value}: up to date, skipped")
        return existing

    jobs = config.jobs or get_settings().jobs
    logger.info(f"Stage {stage.value}: running")
    outputs, details = STAGE_RUNNERS[stage](config, layout, jobs)

    paths = sorted({Path(p) for p in outputs})
    artifact = StageArtifact(
        stage=stage,
        content_digest=files_digest(layout.root, paths),
        config_digest=digest,
        timestamp=datetime.now(timezone.utc).isoformat(),
        outputs=[p.resolve().relative_to(layout.root.resolve()).as_posix() for p in paths],
        details=details,
    )
    write_json(layout.artifact(stage), artifact)
    logger.info(f"Stage {stage.value}: done ({len(paths)} files)")
    return artifact


def run_pipeline(
    config: PipelineConfig, stages: Optional[List[Stage]] = None, force: bool = False
) -> List[StageArtifact]:
    """Run the given stages (default: all) in pipeline order."""
    wanted = set(stages or STAGE_ORDER)
    return [run_stage(stage, config, force) for stage in STAGE_ORDER if stage in wanted]
