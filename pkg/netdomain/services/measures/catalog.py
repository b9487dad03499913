"""
Measure registry.

The catalog order is canonical: it fixes the feature column order of every
downstream artifact. Size-independent measures come first and the raw size
counts last, so that correlation dedup (which keeps the earlier feature)
prefers structural measures over plain size.
"""
import logging
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from netdomain.core.constants import AGGREGATES, COLUMN_SEPARATOR
from netdomain.core.enums import CostClass, MeasureKind
from netdomain.core.exceptions import UnknownMeasureError
from netdomain.schemas import MeasureSpec
from netdomain.services.measures import algorithms

logger = logging.getLogger(__name__)

MeasureFn = Callable[..., object]

S, N, E = MeasureKind.SCALAR, MeasureKind.NODE_DISTRIBUTION, MeasureKind.EDGE_DISTRIBUTION
CHEAP, POLY, EXP = CostClass.CHEAP, CostClass.POLYNOMIAL, CostClass.EXPENSIVE

# (id, kind, cost class, needs_seed, description)
CORE_MEASURES: List[Tuple[str, MeasureKind, CostClass, bool, str]] = [
    ("density", S, CHEAP, False, "2m / (n(n-1))"),
    ("transitivity", S, POLY, False, "3 * triangles / connected triples"),
    ("degree_assortativity", S, POLY, False, "Pearson correlation of edge-endpoint degrees"),
    ("max_core_number", S, POLY, False, "largest k with a non-empty k-core"),
    ("triangle_count", S, POLY, False, "number of triangles"),
    ("clique_number", S, EXP, False, "size of the largest clique"),
    ("maximal_clique_count", S, EXP, False, "number of maximal cliques"),
    ("spectral_radius", S, POLY, False, "largest adjacency eigenvalue"),
    ("diameter", S, EXP, True, "largest eccentricity"),
    ("radius", S, EXP, True, "smallest eccentricity"),
    ("average_shortest_path", S, EXP, True, "mean distance over ordered node pairs"),
    ("global_efficiency", S, EXP, True, "mean inverse distance over ordered node pairs"),
    ("node_count", S, CHEAP, False, "n"),
    ("edge_count", S, CHEAP, False, "m"),
    ("degree", N, CHEAP, False, "node degree"),
    ("local_clustering", N, POLY, False, "triangles / possible triangles at a node"),
    ("core_number", N, POLY, False, "k-core index of a node"),
    ("node_triangles", N, POLY, False, "triangles through a node"),
    ("eccentricity", N, EXP, True, "largest distance from a node"),
    ("betweenness", N, EXP, True, "shortest-path pair count through a node"),
    ("closeness", N, EXP, True, "(n-1) / sum of distances from a node"),
    ("eigenvector_centrality", N, POLY, False, "Perron vector entry, unit L2 norm"),
    ("pagerank", N, POLY, False, "PageRank, damping 0.85"),
    ("average_neighbor_degree", N, CHEAP, False, "mean degree of the neighbours"),
    ("edge_betweenness", E, EXP, True, "shortest-path pair count through an edge"),
    ("edge_embeddedness", E, POLY, False, "common neighbours of the edge endpoints"),
]

_REGISTRY: Dict[str, Tuple[MeasureSpec, MeasureFn]] = {}


def register_measure(spec: MeasureSpec, fn: MeasureFn) -> None:
    """
    Add a measure at the end of the catalog.

    fn(g, guard, ctx) returns a float for scalars or a 1-D array for
    distributions. Registration must happen at import time of the caller's
    module so worker processes see the same catalog.
    """
    if spec.id in _REGISTRY:
        raise ValueError(f"Measure {spec.id!r} is already registered")
    _REGISTRY[spec.id] = (spec, fn)
    logger.debug(f"Registered measure {spec.id} ({spec.kind.value}, {spec.cost_class.value})")


def unregister_measure(measure_id: str) -> None:
    """Remove an extension measure; core measures cannot be removed."""
    if measure_id in algorithms.MEASURE_FUNCTIONS:
        raise ValueError(f"Core measure {measure_id!r} cannot be removed")
    _REGISTRY.pop(measure_id, None)


def _register_core() -> None:
    for measure_id, kind, cost, needs_seed, description in CORE_MEASURES:
        spec = MeasureSpec(
            id=measure_id, kind=kind, cost_class=cost, needs_seed=needs_seed, description=description
        )
        register_measure(spec, algorithms.MEASURE_FUNCTIONS[measure_id])


def catalog() -> Tuple[MeasureSpec, ...]:
    """Core measures followed by extensions, in registration order."""
    return tuple(spec for spec, _ in _REGISTRY.values())


def get_measure(measure_id: str) -> Tuple[MeasureSpec, MeasureFn]:
    try:
        return _REGISTRY[measure_id]
    except KeyError:
        raise UnknownMeasureError(f"Unknown measure {measure_id!r}") from None


def columns_for(spec: MeasureSpec) -> List[str]:
    if spec.kind == MeasureKind.SCALAR:
        return [spec.id]
    return [f"{spec.id}{COLUMN_SEPARATOR}{agg}" for agg in AGGREGATES]


def feature_columns(specs: Optional[Sequence[MeasureSpec]] = None) -> List[str]:
    """Canonical feature column names for the given (default: full) catalog."""
    specs = catalog() if specs is None else specs
    return [column for spec in specs for column in columns_for(spec)]


def measure_of_column(column: str) -> str:
    """Base measure id of a feature column."""
    return column.split(COLUMN_SEPARATOR, 1)[0]


_register_core()
