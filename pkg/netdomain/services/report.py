"""
Report service.
Writes the report bundle: per-domain JSON, corpus-level CSVs for plotting
and a plain-text summary. Bundle files carry no timestamps, so identical
inputs give byte-identical bundles.
"""
import logging
from pathlib import Path
from typing import Dict, List, Optional

import pandas as pd
from pydantic import BaseModel

from netdomain.core.constants import SEPARABILITY_THRESHOLD
from netdomain.schemas import ComboScore, FilterResult, SelectionReport, SelectionRun
from netdomain.utils.io import atomic_write_text, write_csv, write_json

logger = logging.getLogger(__name__)


class DroppedDomain(BaseModel):
    domain: str
    rule: str
    detail: str = ""


class DomainVerdict(BaseModel):
    domain: str
    networks: int
    separable: bool
    winner: Optional[ComboScore] = None
    best_singlet: Optional[ComboScore] = None
    best_pair: Optional[ComboScore] = None
    best_triplet: Optional[ComboScore] = None
    consistency_overlap: Optional[float] = None
    undersampled_winner: Optional[ComboScore] = None
    undersampled_error: Optional[str] = None


def is_separable(run: SelectionRun, threshold: float = SEPARABILITY_THRESHOLD) -> bool:
    """Best combo of at most three features reaches mean F1 above threshold."""
    winner = run.winner()
    return winner is not None and winner.mean_f1 > threshold


def domain_verdict(
    report: SelectionReport, networks: int, threshold: float = SEPARABILITY_THRESHOLD
) -> DomainVerdict:
    full = report.full
    return DomainVerdict(
        domain=report.domain,
        networks=networks,
        separable=is_separable(full, threshold),
        winner=full.winner(),
        best_singlet=full.best(1),
        best_pair=full.best(2),
        best_triplet=full.best(3),
        consistency_overlap=full.consistency_overlap,
        undersampled_winner=report.undersampled.winner() if report.undersampled else None,
        undersampled_error=report.undersampled_error,
    )


def _fold_text(scores: List[float]) -> str:
    return ";".join(repr(float(s)) for s in scores)


def _score_rows(domain: str, kind: str, scores: List[ComboScore], limit: Optional[int]) -> List[dict]:
    chosen = scores if limit is None else scores[:limit]
    return [
        {
            "domain": domain,
            "kind": kind,
            "rank": rank,
            "combo": score.key,
            "mean_f1": score.mean_f1,
            "fold_scores": _fold_text(score.fold_scores),
        }
        for rank, score in enumerate(chosen, start=1)
    ]


def _summary_text(
    verdicts: List[DomainVerdict],
    dropped: List[DroppedDomain],
    reports: Dict[str, SelectionReport],
    threshold: float,
) -> str:
    lines = [f"Domain separability (best combo of <= 3 features, mean F1 > {threshold})", ""]
    for v in verdicts:
        flag = "separable" if v.separable else "not separable"
        lines.append(f"{v.domain} ({v.networks} networks): {flag}")
        if v.winner is not None:
            lines.append(f"  winner: {v.winner.key}  mean F1 {v.winner.mean_f1:.4f}")
            for feature, alternates in sorted(reports[v.domain].correlated_alternates.items()):
                lines.append(f"    {feature}: {len(alternates)} highly correlated alternates")
        for label, combo in (("singlet", v.best_singlet), ("pair", v.best_pair), ("triplet", v.best_triplet)):
            if combo is not None:
                lines.append(f"  best {label}: {combo.key}  mean F1 {combo.mean_f1:.4f}")
        if v.consistency_overlap is not None:
            lines.append(f"  pair/triplet consistency overlap: {v.consistency_overlap:.1f}%")
        if v.undersampled_winner is not None:
            lines.append(
                f"  undersampled winner: {v.undersampled_winner.key}  "
                f"mean F1 {v.undersampled_winner.mean_f1:.4f}"
            )
        elif v.undersampled_error is not None:
            lines.append(f"  undersampled run skipped: {v.undersampled_error}")
    if dropped:
        lines += ["", "Dropped domains"]
        for d in dropped:
            lines.append(f"{d.domain}: {d.rule}" + (f" ({d.detail})" if d.detail else ""))
    return "\n".join(lines) + "\n"


def emit_report(
    out_dir: Path,
    domain_sizes: Dict[str, int],
    filters: Dict[str, FilterResult],
    reports: Dict[str, SelectionReport],
    dropped: List[DroppedDomain],
    plot_top_n: int,
    threshold: float = SEPARABILITY_THRESHOLD,
) -> List[Path]:
    """
    Write the report bundle under out_dir.

    Args:
        out_dir: bundle directory
        domain_sizes: networks per domain after policies
        filters: correlation-filter results per domain
        reports: selection reports per domain
        dropped: domains removed along the way, with the triggering rule
        plot_top_n: pairs/triplets kept per domain in the score CSV

    Returns:
        Paths written, sorted
    """
    out_dir = Path(out_dir)
    written: List[Path] = []
    verdicts: List[DomainVerdict] = []
    score_rows: List[dict] = []
    winner_rows: List[dict] = []

    for domain in sorted(reports):
        report = reports[domain]
        verdict = domain_verdict(report, domain_sizes.get(domain, 0), threshold)
        verdicts.append(verdict)

        written.append(write_json(out_dir / "domains" / f"{domain}.json", {
            "verdict": verdict.model_dump(mode="json"),
            "filter": filters[domain].model_dump(mode="json") if domain in filters else None,
            "selection": report.model_dump(mode="json"),
        }))

        score_rows += _score_rows(domain, "singlet", report.full.singlets, None)
        score_rows += _score_rows(domain, "pair", report.full.pairs, plot_top_n)
        score_rows += _score_rows(domain, "triplet", report.full.triplets, plot_top_n)
        for size, combo in ((1, verdict.best_singlet), (2, verdict.best_pair), (3, verdict.best_triplet)):
            if combo is None:
                continue
            is_winner = verdict.winner is not None and combo.key == verdict.winner.key
            alternates = sum(len(report.correlated_alternates.get(f, [])) for f in combo.features)
            winner_rows.append({
                "domain": domain,
                "size": size,
                "combo": combo.key,
                "mean_f1": combo.mean_f1,
                "overall_winner": is_winner,
                # alternates are only collected for the overall winner
                "correlated_alternates": str(alternates) if is_winner else "",
            })

    sizes = pd.DataFrame(
        [{"domain": d, "networks": n, "status": "kept"} for d, n in sorted(domain_sizes.items())]
        + [{"domain": d.domain, "networks": 0, "status": d.rule} for d in dropped],
        columns=["domain", "networks", "status"],
    )
    written.append(write_csv(out_dir / "domain_sizes.csv", sizes))
    written.append(write_csv(
        out_dir / "scores.csv",
        pd.DataFrame(score_rows, columns=["domain", "kind", "rank", "combo", "mean_f1", "fold_scores"]),
    ))
    written.append(write_csv(
        out_dir / "winners.csv",
        pd.DataFrame(winner_rows, columns=[
            "domain", "size", "combo", "mean_f1", "overall_winner", "correlated_alternates",
        ]),
    ))
    written.append(write_csv(
        out_dir / "overlap.csv",
        pd.DataFrame(
            [{"domain": v.domain, "consistency_overlap": v.consistency_overlap} for v in verdicts],
            columns=["domain", "consistency_overlap"],
        ),
    ))
    written.append(write_csv(
        out_dir / "dropped_domains.csv",
        pd.DataFrame([d.model_dump() for d in dropped], columns=["domain", "rule", "detail"]),
    ))
    written.append(atomic_write_text(
        out_dir / "summary.txt", _summary_text(verdicts, dropped, reports, threshold)
    ))

    n_sep = sum(v.separable for v in verdicts)
    logger.info(f"Report: {n_sep}/{len(verdicts)} domains separable, {len(dropped)} dropped")
    return sorted(written)
