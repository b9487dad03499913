"""
Synthetic labeled corpus for end-to-end runs.

Four structurally distinct pseudo-domains, each graph drawn with its own
derived seed so the corpus is reproducible and order-independent.
"""
import logging
from pathlib import Path
from typing import Callable, Dict, List, Tuple

import numpy as np
import pandas as pd

from netdomain.utils.io import atomic_write_text, write_csv
from netdomain.utils.seeding import rng_for

logger = logging.getLogger(__name__)

Edges = List[Tuple[int, int]]

MIN_NODES = 40
MAX_NODES = 200


def random_tree(n: int, rng: np.random.Generator) -> Edges:
    """Random recursive tree: node i attaches to a uniform earlier node."""
    return [(int(rng.integers(0, i)), i) for i in range(1, n)]


def grid_lattice(n: int, rng: np.random.Generator) -> Edges:
    """2-D grid with about n nodes and a random aspect ratio."""
    side = int(np.sqrt(n))
    rows = int(rng.integers(max(4, side - 3), side + 1))
    cols = max(n // rows, 10)
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return edges


def planted_partition(
    n: int, rng: np.random.Generator, p_in: float = 0.5, p_out: float = 0.02
) -> Edges:
    """Dense communities (3 to 5 blocks) with sparse links between them."""
    blocks = rng.integers(0, int(rng.integers(3, 6)), size=n)
    draws = rng.random((n, n))
    same = blocks[:, None] == blocks[None, :]
    linked = np.where(same, draws < p_in, draws < p_out)
    us, vs = np.nonzero(np.triu(linked, k=1))
    return list(zip(us.tolist(), vs.tolist()))


def chorded_ring(n: int, rng: np.random.Generator, chord_fraction: float = 0.1) -> Edges:
    """Cycle on n nodes plus about n * chord_fraction random chords."""
    edges = [(v, (v + 1) % n) for v in range(n)]
    for _ in range(max(1, int(n * chord_fraction))):
        u, v = rng.choice(n, size=2, replace=False)
        edges.append((int(u), int(v)))
    return edges


FAMILIES: Dict[str, Callable[[int, np.random.Generator], Edges]] = {
    "tree": random_tree,
    "grid": grid_lattice,
    "community": planted_partition,
    "ring": chorded_ring,
}


def edge_list_text(edges: Edges, family: str) -> str:
    lines = [f"# synthetic {family}"] + [f"{u} {v}" for u, v in edges]
    return "\n".join(lines) + "\n"


def make_corpus(
    out_dir: str | Path,
    seed: int = 0,
    per_domain: int = 30,
    families: Dict[str, Callable[[int, np.random.Generator], Edges]] = None,
) -> Path:
    """
    Write a labeled corpus of edge lists plus its manifest.

    Args:
        out_dir: target directory (edge lists go to out_dir/graphs/)
        seed: corpus seed
        per_domain: graphs per pseudo-domain

    Returns:
        Path of the manifest CSV
    """
    out_dir = Path(out_dir)
    families = families or FAMILIES
    rows = []
    for family, generator in families.items():
        for i in range(per_domain):
            rng = rng_for(seed, "synthetic", family, i)
            n = int(rng.integers(MIN_NODES, MAX_NODES + 1))
            network_id = f"{family}-{i:03d}"
            path = Path("graphs") / f"{network_id}.txt"
            atomic_write_text(out_dir / path, edge_list_text(generator(n, rng), family))
            rows.append({
                "network_id": network_id,
                "path": path.as_posix(),
                "domain": family,
                "project_onto": "",
            })

    manifest = out_dir / "manifest.csv"
    write_csv(manifest, pd.DataFrame(rows, columns=["network_id", "path", "domain", "project_onto"]))
    logger.info(f"Wrote {len(rows)} synthetic graphs ({len(families)} domains) to {out_dir}")
    return manifest
