"""Shared wiring: load an ontology + class index and precompute distances.

Both the CLI and the HTTP service start from the same immutable context:
the parsed graph, the class index, the base distance matrix, and the
digest that ties reports to this exact configuration.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ValidationError
from .ontology import (
    ClassIndex,
    DistanceMatrix,
    OntologyGraph,
    all_pairs_distance,
    load_class_index,
    load_edge_list,
    load_taxonomy,
    ontology_digest,
)


@dataclass(frozen=True)
class EvaluationContext:
    graph: OntologyGraph
    classes: ClassIndex
    dist_base: DistanceMatrix
    digest: str

    @property
    def n_classes(self) -> int:
        return self.classes.n_classes

    @property
    def d_max(self) -> int:
        return self.dist_base.d_max


def load_context(
    class_index_path,
    taxonomy_path=None,
    edge_list_path=None,
) -> EvaluationContext:
    """Build the evaluation context from files (taxonomy JSON or edge list)."""
    if (taxonomy_path is None) == (edge_list_path is None):
        raise ValidationError(
            "ontology-source", "provide exactly one of a taxonomy file or an edge-list file"
        )
    graph = load_taxonomy(taxonomy_path) if taxonomy_path else load_edge_list(edge_list_path)
    classes = load_class_index(class_index_path)
    dist_base = all_pairs_distance(graph, classes)
    return EvaluationContext(
        graph=graph,
        classes=classes,
        dist_base=dist_base,
        digest=ontology_digest(classes, dist_base),
    )
