"""Brute-force reference implementations, used only by tests.

Everything is written as literal loops over the defining formulas and
shares no code with the package, so agreement between the two is a real
check.  Distances come from Floyd-Warshall; curves from explicit threshold
enumeration.
"""

from __future__ import annotations

import numpy as np

INF = float("inf")


def floyd_warshall(n_vertices: int, edges: list[tuple[int, int]]) -> list[list[float]]:
    d = [[INF] * n_vertices for _ in range(n_vertices)]
    for i in range(n_vertices):
        d[i][i] = 0.0
    for a, b in edges:
        d[a][b] = 1.0
        d[b][a] = 1.0
    for k in range(n_vertices):
        dk = d[k]
        for i in range(n_vertices):
            dik = d[i][k]
            if dik == INF:
                continue
            di = d[i]
            for j in range(n_vertices):
                alt = dik + dk[j]
                if alt < di[j]:
                    di[j] = alt
    return d


def restrict(dist: list[list[float]], vertices: list[int]) -> list[list[int]]:
    return [[int(dist[a][b]) for b in vertices] for a in vertices]


def threshold(dist: list[list[int]], lam: int) -> list[list[int]]:
    return [[v if v > lam else 0 for v in row] for row in dist]


def matrix_mean(dist: list[list[int]]) -> float:
    c = len(dist)
    return sum(sum(row) for row in dist) / (c * c)


def reweights(label_rows: list[list[int]], dist_thr: list[list[int]], mu: float) -> list[list[float]]:
    """W[n][c] = min distance from class c to the n-th sample's labels, / mu."""
    c = len(dist_thr)
    out = []
    for labels in label_rows:
        row = [min(dist_thr[ci][k] for k in labels) / mu for ci in range(c)]
        out.append(row)
    return out


def ap(scores: list[float], labels: list[int], weights: list[float] | None = None) -> float:
    """Literal AP: every distinct score is a threshold, test is score >= t."""
    n = len(scores)
    n_pos = sum(labels)
    assert n_pos > 0
    prev_recall = 0.0
    area = 0.0
    for gamma in sorted(set(scores), reverse=True):
        tp = sum(1 for i in range(n) if scores[i] >= gamma and labels[i] == 1)
        if weights is None:
            fp = float(sum(1 for i in range(n) if scores[i] >= gamma and labels[i] == 0))
        else:
            fp = sum(weights[i] for i in range(n) if scores[i] >= gamma and labels[i] == 0)
        denom = tp + fp
        precision = tp / denom if denom > 0 else 1.0
        recall = tp / n_pos
        area += (recall - prev_recall) * precision
        prev_recall = recall
    return area


def _columns(matrix) -> list[list[float]]:
    arr = np.asarray(matrix, dtype=np.float64)
    return [arr[:, c].tolist() for c in range(arr.shape[1])]


def map_score(scores, labels) -> float:
    """Mean per-class AP over classes holding at least one positive."""
    values = [
        ap(s_col, [int(v) for v in l_col])
        for s_col, l_col in zip(_columns(scores), _columns(labels))
        if sum(l_col) > 0
    ]
    return sum(values) / len(values)


def oap_per_class(scores, labels, base_dist: list[list[int]], lam: int) -> list[float | None]:
    """Weighted AP per class at one level; None where a class has no positives."""
    d_max = max(max(row) for row in base_dist)
    label_rows = [[c for c, v in enumerate(row) if v == 1] for row in np.asarray(labels)]
    n_classes = len(base_dist)
    if lam == d_max:
        weights = [[0.0] * n_classes for _ in label_rows]
    else:
        thr = threshold(base_dist, lam)
        weights = reweights(label_rows, thr, matrix_mean(thr))
    out: list[float | None] = []
    for c, (s_col, l_col) in enumerate(zip(_columns(scores), _columns(labels))):
        if sum(l_col) == 0:
            out.append(None)
            continue
        w_col = [weights[i][c] for i in range(len(s_col))]
        out.append(ap(s_col, [int(v) for v in l_col], w_col))
    return out


def level_mean(values: list[float | None]) -> float:
    present = [v for v in values if v is not None]
    return sum(present) / len(present)


def omap_score(scores, labels, base_dist: list[list[int]], levels: list[int]) -> float:
    means = [level_mean(oap_per_class(scores, labels, base_dist, lam)) for lam in levels]
    return sum(means) / len(means)


def obce_weight_vector(label_set: list[int], base_dist: list[list[int]], beta: float) -> list[float]:
    """Literal transcription of the weight recipe, pure Python."""
    c = len(base_dist)
    r = [min(float(base_dist[ci][k]) ** beta for k in label_set) for ci in range(c)]
    peak = max(r)
    if peak > 0:
        r = [v / peak for v in r]
    for k in label_set:
        r[k] = 1.0
    mean = sum(r) / c
    return [v / mean for v in r]


# ---------------------------------------------------------------------------
# Random inputs


def random_connected_graph(rng: np.random.Generator, n_vertices: int) -> list[tuple[int, int]]:
    """Random tree plus a few extra edges; connected by construction."""
    edges = set()
    for v in range(1, n_vertices):
        parent = int(rng.integers(0, v))
        edges.add((parent, v))
    n_extra = int(rng.integers(0, max(1, n_vertices // 2) + 1))
    for _ in range(n_extra):
        a, b = rng.integers(0, n_vertices, size=2)
        if a != b:
            edges.add((min(int(a), int(b)), max(int(a), int(b))))
    return sorted(edges)


def edge_list_text(n_vertices: int, edges: list[tuple[int, int]]) -> str:
    names = [f"v{i}" for i in range(n_vertices)]
    lines = names + [""] + [f"v{a} v{b}" for a, b in edges]
    return "\n".join(lines) + "\n"


def random_labels(rng: np.random.Generator, n: int, c: int, ensure_class_positives: bool = True):
    """Binary labels with at least one label per row; optionally at least
    one positive per class."""
    labels = (rng.random((n, c)) < 0.3).astype(np.float32)
    for i in range(n):
        if labels[i].sum() == 0:
            labels[i, int(rng.integers(0, c))] = 1.0
    if ensure_class_positives:
        for col in range(c):
            if labels[:, col].sum() == 0:
                labels[int(rng.integers(0, n)), col] = 1.0
    return labels


def random_scores(rng: np.random.Generator, n: int, c: int, tie_fraction: float = 0.25):
    """Random float32 scores; a slice of entries is quantized to force ties."""
    scores = rng.random((n, c)).astype(np.float32)
    if tie_fraction > 0:
        mask = rng.random((n, c)) < tie_fraction
        scores[mask] = np.round(scores[mask] * 4) / 4
    return scores
