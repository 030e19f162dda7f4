"""Class-ontology graphs and shortest-path distance matrices.

The taxonomy is an undirected graph over sound classes: one vertex per
class record, one edge per parent-child link.  Pairwise distances between
evaluated classes are hop counts computed by BFS over the *full* graph
(shortest paths may pass through non-evaluated intermediate categories) and
then restricted to the evaluated-class rows/columns.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class OntologyNode:
    """One taxonomy record: an identifier, a display name, and child links."""

    id: str
    display_name: str
    child_ids: tuple[str, ...] = ()
    # Extra record fields (restrictions, examples, ...) kept verbatim; the
    # math never looks at them.
    metadata: Mapping[str, Any] = field(default_factory=dict)


class OntologyGraph:
    """Undirected graph of sound classes.

    Adjacency is symmetric, has no self-loops, and collapses duplicate
    edges.  Immutable once built.
    """

    def __init__(self, nodes: Iterable[OntologyNode], edges: Iterable[tuple[str, str]]):
        self._nodes: dict[str, OntologyNode] = {}
        for node in nodes:
            if not node.id:
                raise ValidationError("malformed-taxonomy", "node with empty id")
            if node.id in self._nodes:
                raise ValidationError("duplicate-node-id", f"duplicate node id {node.id!r}")
            self._nodes[node.id] = node
        self._index = {nid: i for i, nid in enumerate(self._nodes)}
        adj: list[set[int]] = [set() for _ in self._nodes]
        n_edges = 0
        for a, b in edges:
            ia, ib = self._index.get(a), self._index.get(b)
            if ia is None or ib is None:
                missing = a if ia is None else b
                raise ValidationError("unknown-vertex", f"edge references unknown vertex {missing!r}")
            if ia == ib:
                raise ValidationError("self-loop", f"self-loop on vertex {a!r}")
            if ib not in adj[ia]:
                adj[ia].add(ib)
                adj[ib].add(ia)
                n_edges += 1
        self._adjacency = [np.array(sorted(s), dtype=np.int64) for s in adj]
        self._n_edges = n_edges

    @property
    def n_vertices(self) -> int:
        return len(self._nodes)

    @property
    def n_edges(self) -> int:
        return self._n_edges

    @property
    def node_ids(self) -> tuple[str, ...]:
        return tuple(self._nodes)

    def node(self, node_id: str) -> OntologyNode:
        return self._nodes[node_id]

    def __contains__(self, node_id: str) -> bool:
        return node_id in self._nodes

    def vertex_index(self, node_id: str) -> int:
        try:
            return self._index[node_id]
        except KeyError:
            raise ValidationError("dangling-class", f"no ontology vertex with id {node_id!r}") from None

    def neighbors(self, node_id: str) -> tuple[str, ...]:
        ids = self.node_ids
        return tuple(ids[j] for j in self._adjacency[self.vertex_index(node_id)])

    def _adjacency_lists(self) -> list[np.ndarray]:
        return self._adjacency


@dataclass(frozen=True)
class ClassIndex:
    """Ordered mapping from matrix column to ontology node.

    Column ``c`` of every score/label matrix corresponds to ``ids[c]``.
    """

    ids: tuple[str, ...]
    names: tuple[str, ...]

    def __post_init__(self):
        if len(self.ids) == 0:
            raise ValidationError("empty-class-index", "class index has no entries")
        if len(self.ids) != len(set(self.ids)):
            raise ValidationError("duplicate-class-id", "class index repeats a node id")
        if len(self.names) != len(self.ids):
            raise ValidationError("malformed-class-index", "ids and names length mismatch")

    @property
    def n_classes(self) -> int:
        return len(self.ids)

    def entries(self) -> list[tuple[int, str, str]]:
        return [(c, self.ids[c], self.names[c]) for c in range(len(self.ids))]

    def validate_against(self, graph: OntologyGraph) -> None:
        for node_id in self.ids:
            if node_id not in graph:
                raise ValidationError(
                    "dangling-class", f"class index references unknown ontology node {node_id!r}"
                )


@dataclass(frozen=True)
class DistanceMatrix:
    """C x C hop-count distances between evaluated classes.

    ``level`` is None for the base (unthresholded) matrix, else the
    threshold lambda that produced it.  ``mu`` is the arithmetic mean over
    all C^2 elements including the diagonal; ``d_max`` is the maximum
    element of the base matrix and is carried over by thresholding.
    """

    values: np.ndarray
    level: int | None
    mu: float
    d_max: int

    def __post_init__(self):
        self.values.setflags(write=False)

    @property
    def n_classes(self) -> int:
        return self.values.shape[0]

    @property
    def is_base(self) -> bool:
        return self.level is None


def _exact_mean(values: np.ndarray) -> float:
    # Integer-valued matrix: summing in int64 keeps the mean exact and
    # independent of element order.
    return int(values.sum(dtype=np.int64)) / values.size


def parse_ontology(document: str) -> OntologyGraph:
    """Parse a taxonomy document (JSON array of records) into a graph.

    Each record must carry ``id``, ``name`` and ``child_ids``; one
    undirected edge is added per parent-child link.  Extra record fields
    are preserved as node metadata.
    """
    try:
        records = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ValidationError("malformed-taxonomy", f"taxonomy is not valid JSON: {exc}") from None
    if not isinstance(records, list):
        raise ValidationError("malformed-taxonomy", "taxonomy document must be a JSON array of records")

    nodes: list[OntologyNode] = []
    for i, rec in enumerate(records):
        if not isinstance(rec, dict):
            raise ValidationError("malformed-taxonomy", f"record {i} is not an object")
        try:
            node_id, name, child_ids = rec["id"], rec["name"], rec["child_ids"]
        except KeyError as exc:
            raise ValidationError("malformed-taxonomy", f"record {i} is missing field {exc}") from None
        if not isinstance(node_id, str) or not node_id:
            raise ValidationError("malformed-taxonomy", f"record {i} has a non-string or empty id")
        if not isinstance(child_ids, list) or not all(isinstance(c, str) for c in child_ids):
            raise ValidationError("malformed-taxonomy", f"record {node_id!r} has malformed child_ids")
        extra = {k: v for k, v in rec.items() if k not in ("id", "name", "child_ids")}
        nodes.append(OntologyNode(node_id, str(name), tuple(child_ids), extra))

    known = {n.id for n in nodes}
    edges: list[tuple[str, str]] = []
    for node in nodes:
        for child in node.child_ids:
            if child not in known:
                raise ValidationError(
                    "dangling-child", f"node {node.id!r} lists unknown child {child!r}"
                )
            edges.append((node.id, child))
    return OntologyGraph(nodes, edges)


def parse_edge_list(document: str) -> OntologyGraph:
    """Parse the plain-text graph format used for synthetic test graphs.

    One vertex name per line, a blank line, then one edge per line as two
    whitespace-separated names.  A missing edge section yields a graph of
    isolated vertices.
    """
    lines = document.splitlines()
    split = None
    for i, line in enumerate(lines):
        if not line.strip():
            split = i
            break
    vertex_lines = lines[: split if split is not None else len(lines)]
    edge_lines = lines[split + 1 :] if split is not None else []

    names = [ln.strip() for ln in vertex_lines if ln.strip()]
    if not names:
        raise ValidationError("malformed-edge-list", "edge-list document lists no vertices")
    nodes = [OntologyNode(name, name) for name in names]

    edges: list[tuple[str, str]] = []
    for ln in edge_lines:
        if not ln.strip():
            continue
        parts = ln.split()
        if len(parts) != 2:
            raise ValidationError("malformed-edge-list", f"edge line {ln!r} must name exactly two vertices")
        edges.append((parts[0], parts[1]))
    return OntologyGraph(nodes, edges)


def parse_class_index(document: str) -> ClassIndex:
    """Parse a class-index CSV: header row, then ``index,node id,display name``.

    Row order is free but the index column must cover 0..C-1 exactly.
    """
    reader = csv.reader(io.StringIO(document))
    rows = [row for row in reader if row]
    if len(rows) < 2:
        raise ValidationError("malformed-class-index", "class index needs a header and at least one row")
    by_index: dict[int, tuple[str, str]] = {}
    for row in rows[1:]:
        if len(row) < 3:
            raise ValidationError("malformed-class-index", f"row {row!r} has fewer than 3 columns")
        try:
            col = int(row[0])
        except ValueError:
            raise ValidationError("malformed-class-index", f"non-integer index {row[0]!r}") from None
        if col in by_index:
            raise ValidationError("duplicate-class-index", f"column index {col} appears twice")
        by_index[col] = (row[1].strip(), row[2])
    expected = set(range(len(by_index)))
    if set(by_index) != expected:
        raise ValidationError(
            "malformed-class-index",
            f"column indices must be exactly 0..{len(by_index) - 1} with no gaps",
        )
    ordered = [by_index[c] for c in range(len(by_index))]
    return ClassIndex(ids=tuple(i for i, _ in ordered), names=tuple(n for _, n in ordered))


def all_pairs_distance(graph: OntologyGraph, classes: ClassIndex) -> DistanceMatrix:
    """Base distance matrix: BFS hop counts between the indexed classes.

    BFS runs from each class vertex over the full graph, so shortest paths
    may use vertices outside the class index; the result keeps only the
    indexed rows/columns.  Raises if any class pair is unreachable.
    """
    classes.validate_against(graph)
    adjacency = graph._adjacency_lists()
    n_vertices = graph.n_vertices
    class_vertices = [graph.vertex_index(i) for i in classes.ids]

    n = classes.n_classes
    out = np.zeros((n, n), dtype=np.int64)
    for col, source in enumerate(class_vertices):
        dist = np.full(n_vertices, -1, dtype=np.int64)
        dist[source] = 0
        queue = deque([source])
        while queue:
            v = queue.popleft()
            dv = dist[v]
            for w in adjacency[v]:
                if dist[w] < 0:
                    dist[w] = dv + 1
                    queue.append(w)
        row = dist[class_vertices]
        if np.any(row < 0):
            missing = int(np.nonzero(row < 0)[0][0])
            raise ValidationError(
                "disconnected-classes",
                f"classes {classes.ids[col]!r} and {classes.ids[missing]!r} are not connected",
            )
        out[col, :] = row

    return DistanceMatrix(
        values=out,
        level=None,
        mu=_exact_mean(out),
        d_max=int(out.max()),
    )


def threshold_distance(base: DistanceMatrix, level: int) -> DistanceMatrix:
    """Coarse-grain a base matrix: keep elements strictly above ``level``.

    Every kept distance d satisfies d > level; everything else becomes 0.
    ``mu`` is recomputed over the thresholded matrix; ``d_max`` is carried
    over from the base so the level range stays interpretable.
    """
    if not base.is_base:
        raise ValidationError("not-base-matrix", "threshold_distance expects an unthresholded matrix")
    if level < 0 or level > base.d_max:
        raise ValidationError(
            "level-out-of-range", f"level {level} outside [0, {base.d_max}]"
        )
    values = np.where(base.values > level, base.values, 0)
    return DistanceMatrix(values=values, level=int(level), mu=_exact_mean(values), d_max=base.d_max)


def ontology_digest(classes: ClassIndex, base: DistanceMatrix) -> str:
    """Hex digest identifying (class list, base distances) for report matching."""
    h = hashlib.sha256()
    h.update(b"omap/ontology/v1\0")
    h.update(str(classes.n_classes).encode())
    for node_id in classes.ids:
        h.update(b"\0" + node_id.encode("utf-8"))
    h.update(b"\0")
    h.update(np.ascontiguousarray(base.values, dtype="<i8").tobytes())
    return h.hexdigest()


def load_taxonomy(path) -> OntologyGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_ontology(fh.read())


def load_edge_list(path) -> OntologyGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_edge_list(fh.read())


def load_class_index(path) -> ClassIndex:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_class_index(fh.read())
