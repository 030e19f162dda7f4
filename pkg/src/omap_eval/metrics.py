"""Precision-recall metrics: classic AP/mAP and the ontology-aware variants.

Per class, predictions are swept over every distinct score value as a
threshold (test: score >= threshold), giving one (precision, recall) point
per threshold.  AP is the step-interpolated area sum((R_k - R_{k-1}) * P_k)
over descending thresholds with R_0 = 0.

The ontology-aware variant replaces the false-positive count with a
weighted sum: each predicted-positive negative sample contributes its
reweight value, the minimum thresholded graph distance from the class to
the sample's labels divided by the mean of the thresholded distance
matrix.  OAP is that weighted AP at one coarse-grained level; OmAP is the
mean of per-level class means over the level range.

Numerical conventions kept deliberately strict:

* all accumulation in float64; per-curve sums run over distinct-score
  runs, with values inside a tied-score run sorted first, so results are
  bit-identical under any permutation of the input rows;
* class/level aggregates use exact summation (math.fsum), so column
  permutations cannot perturb aggregates either;
* a threshold where nothing is a true positive and every predicted
  negative has weight zero gets precision 1.0 (no weighted mistakes); the
  point carries zero recall increment, so AP is unaffected.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .ontology import ClassIndex, DistanceMatrix, ontology_digest, threshold_distance
from .tensorio import (
    EvaluationReport,
    LabelMatrix,
    PerClassResult,
    ReportMetadata,
    ScoreMatrix,
    validate_report,
)

logger = logging.getLogger(__name__)

_REWEIGHT_CHUNK = 4096


@dataclass(frozen=True)
class PRCurve:
    """One precision-recall point per distinct threshold, descending."""

    precision: np.ndarray
    recall: np.ndarray
    thresholds: np.ndarray
    positives: int

    @property
    def points(self) -> list[tuple[float, float]]:
        return [(float(p), float(r)) for p, r in zip(self.precision, self.recall)]


@dataclass(frozen=True)
class ReweightMatrix:
    """N x C false-positive seriousness weights at one level."""

    values: np.ndarray
    level: int


@dataclass(frozen=True)
class LevelResult:
    """Per-class OAP at one level; None marks a skipped (positive-free) class."""

    level: int
    per_class: tuple[float | None, ...]
    mean_oap: float


@dataclass(frozen=True)
class LevelDelta:
    level: int
    oap_a: float
    oap_b: float
    delta: float


@dataclass(frozen=True)
class ReportComparison:
    levels: tuple[LevelDelta, ...]
    map_a: float
    map_b: float
    map_delta: float
    omap_a: float
    omap_b: float
    omap_delta: float


@dataclass(frozen=True)
class _ColumnStats:
    """Score-order bookkeeping for one class column, reused across levels."""

    order: np.ndarray
    ends: np.ndarray
    tie_runs: tuple[tuple[int, int], ...]
    neg_sorted: np.ndarray
    tp: np.ndarray
    n_pos: int
    recall: np.ndarray
    delta_r: np.ndarray
    thresholds: np.ndarray
    # run indices where recall increases: the only points whose precision
    # contributes to AP, and TP > 0 there so no zero-denominator guard
    active: np.ndarray
    active_ends: np.ndarray
    tp_active: np.ndarray
    delta_active: np.ndarray


def _column_stats(scores_col: np.ndarray, labels_col: np.ndarray) -> _ColumnStats:
    s = np.asarray(scores_col, dtype=np.float64)
    y = np.asarray(labels_col, dtype=np.float64)
    if s.ndim != 1 or s.shape != y.shape:
        raise ValidationError("shape-mismatch", "score and label columns must be equal-length vectors")
    n = s.shape[0]
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    y_sorted = y[order]
    change = np.nonzero(np.diff(s_sorted))[0]
    ends = np.concatenate([change, [n - 1]])
    starts = np.concatenate([[0], change + 1])
    run_lengths = np.diff(np.concatenate([starts, [n]]))
    multi = np.nonzero(run_lengths > 1)[0]
    tie_runs = tuple(
        (int(starts[i]), int(starts[i] + run_lengths[i])) for i in multi
    )
    tp = np.cumsum(y_sorted)[ends]
    n_pos = int(round(float(tp[-1]))) if n else 0
    if n_pos > 0:
        recall = tp / n_pos
    else:
        recall = np.zeros_like(tp)
    delta_r = np.diff(recall, prepend=0.0)
    active = np.nonzero(delta_r)[0]
    return _ColumnStats(
        order=order,
        ends=ends,
        tie_runs=tie_runs,
        neg_sorted=1.0 - y_sorted,
        tp=tp,
        n_pos=n_pos,
        recall=recall,
        delta_r=delta_r,
        thresholds=s_sorted[ends],
        active=active,
        active_ends=ends[active],
        tp_active=tp[active],
        delta_active=delta_r[active],
    )


def _run_cumsum(stats: _ColumnStats, masked: np.ndarray) -> np.ndarray:
    """Cumulative weighted-FP totals at each distinct threshold.

    Values inside a tied-score run are sorted before summing so the result
    does not depend on the original order of tied samples.
    """
    if stats.tie_runs:
        masked = masked.copy()
        for a, b in stats.tie_runs:
            masked[a:b] = np.sort(masked[a:b])
    return np.cumsum(masked)[stats.ends]


def _precision_from_counts(tp: np.ndarray, fpw: np.ndarray) -> np.ndarray:
    denom = tp + fpw
    precision = np.ones_like(denom)
    nz = denom > 0
    precision[nz] = tp[nz] / denom[nz]
    return precision


def _ap(delta_r: np.ndarray, precision: np.ndarray) -> float:
    return float(np.sum(delta_r * precision))


def _ap_from_masked(stats: _ColumnStats, masked: np.ndarray) -> float:
    """AP from per-sample masked FP weights, already in sorted order.

    Only recall-increment points contribute area, and TP > 0 there, so the
    weighted-FP prefix sums are needed at those few run ends only.
    """
    if stats.tie_runs:
        masked = masked.copy()
        for a, b in stats.tie_runs:
            masked[a:b] = np.sort(masked[a:b])
    fpw = np.cumsum(masked)[stats.active_ends]
    return float(np.sum(stats.delta_active * (stats.tp_active / (stats.tp_active + fpw))))


def pr_curve(scores_column, labels_column, weights_column=None) -> PRCurve:
    """Precision-recall curve for one class, optionally FP-weighted.

    Without weights each predicted-positive negative counts 1 toward the
    precision denominator; with weights it contributes its own weight.
    Raises when the column has no positive labels.
    """
    stats = _column_stats(scores_column, labels_column)
    if stats.n_pos == 0:
        raise ValidationError("no-positive-labels", "column has no positive labels")
    if weights_column is None:
        masked = stats.neg_sorted
    else:
        w = np.asarray(weights_column, dtype=np.float64)
        if w.shape != stats.order.shape:
            raise ValidationError("shape-mismatch", "weights column length differs from scores")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValidationError("value-out-of-range", "weights must be finite and nonnegative")
        masked = w[stats.order] * stats.neg_sorted
    fpw = _run_cumsum(stats, masked)
    precision = _precision_from_counts(stats.tp, fpw)
    return PRCurve(
        precision=precision,
        recall=stats.recall.copy(),
        thresholds=stats.thresholds.copy(),
        positives=stats.n_pos,
    )


def average_precision(curve: PRCurve) -> float:
    """Step-interpolated area under a PR curve: sum((R_k - R_{k-1}) * P_k)."""
    delta_r = np.diff(curve.recall, prepend=0.0)
    return _ap(delta_r, curve.precision)


def _label_distance_min(labels: LabelMatrix, dist: DistanceMatrix, empty_labels: str) -> np.ndarray:
    """Per (sample, class): min distance from the class to the sample's labels.

    Empty label rows are rejected under the "error" policy, otherwise they
    take d_max everywhere (maximally serious FP) with a logged count.
    """
    lab = labels.values
    n, c = lab.shape
    if c != dist.n_classes:
        raise ValidationError(
            "class-count-mismatch", f"labels have {c} classes, distance matrix has {dist.n_classes}"
        )
    counts = np.count_nonzero(lab, axis=1)
    empty_rows = np.nonzero(counts == 0)[0]
    if empty_rows.size and empty_labels == "error":
        raise ValidationError("empty-label-row", f"sample {int(empty_rows[0])} has no labels")
    if empty_rows.size:
        logger.warning("%d samples have empty label sets; assigned maximum FP weight", empty_rows.size)

    out = np.empty((n, c), dtype=dist.values.dtype)
    if empty_rows.size:
        out[empty_rows] = dist.d_max
    rows, cols = np.nonzero(lab)
    nonempty = np.nonzero(counts > 0)[0]
    seg_starts = np.searchsorted(rows, nonempty)
    for i in range(0, nonempty.size, _REWEIGHT_CHUNK):
        block = nonempty[i : i + _REWEIGHT_CHUNK]
        a = seg_starts[i]
        b = seg_starts[i + _REWEIGHT_CHUNK] if i + _REWEIGHT_CHUNK < nonempty.size else rows.size
        out[block] = np.minimum.reduceat(
            dist.values[cols[a:b], :], seg_starts[i : i + _REWEIGHT_CHUNK] - a, axis=0
        )
    return out


def reweight_matrix(
    labels: LabelMatrix,
    dist: DistanceMatrix,
    *,
    empty_labels: str = "error",
) -> ReweightMatrix:
    """FP seriousness per (sample, class): min distance to the sample's
    labels over the given (usually thresholded) matrix, divided by its mean.

    ``empty_labels``: "error" rejects rows without labels; "max-weight"
    assigns them d_max / mu everywhere (maximally serious FP) and logs.
    """
    if dist.mu == 0:
        raise ValidationError(
            "degenerate-level", f"distance matrix at level {dist.level} is all-zero (mu = 0)"
        )
    mins = _label_distance_min(labels, dist, empty_labels)
    level = dist.level if dist.level is not None else 0
    return ReweightMatrix(values=mins / dist.mu, level=level)


def _check_pair(scores: ScoreMatrix, labels: LabelMatrix) -> None:
    if scores.values.shape != labels.values.shape:
        raise ValidationError(
            "shape-mismatch",
            f"scores are {scores.values.shape}, labels are {labels.values.shape}",
        )


def _all_column_stats(scores: ScoreMatrix, labels: LabelMatrix) -> list[_ColumnStats]:
    sv = scores.values.astype(np.float64)
    lv = labels.values.astype(np.float64)
    return [_column_stats(sv[:, ci], lv[:, ci]) for ci in range(sv.shape[1])]


def _class_aps(
    stats_list: list[_ColumnStats],
    weights: np.ndarray | None,
    threads: int = 1,
) -> list[float | None]:
    """AP per class (None where the class has no positives).

    ``weights`` is an N x C matrix, or None for the unweighted (classic)
    curve.  Classes are independent; results land in per-class slots so the
    outcome does not depend on scheduling.
    """

    def one(ci: int) -> float | None:
        st = stats_list[ci]
        if st.n_pos == 0:
            return None
        masked = st.neg_sorted if weights is None else weights[st.order, ci] * st.neg_sorted
        return _ap_from_masked(st, masked)

    n = len(stats_list)
    if threads <= 1 or n < 8:
        return [one(ci) for ci in range(n)]
    results: list[float | None] = [None] * n
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for ci, value in zip(range(n), pool.map(one, range(n))):
            results[ci] = value
    return results


class _LevelEngine:
    """Shared state for evaluating many levels over one score/label pair.

    The expensive reorderings (per-class sort order applied to the label
    minima and to the negative mask) happen once; each level then reduces
    to elementwise thresholding plus per-class prefix sums.  Weight values
    match reweight_matrix bit-for-bit because thresholding commutes with
    the min over a sample's labels and the multiplication by the 0/1
    negative mask is exact.
    """

    def __init__(
        self,
        stats_list: list[_ColumnStats],
        labels: LabelMatrix,
        dist_base: DistanceMatrix,
        empty_labels: str,
    ):
        self.stats_list = stats_list
        self.dist_base = dist_base
        min_base = _label_distance_min(labels, dist_base, empty_labels)
        order_t = np.ascontiguousarray(np.stack([st.order for st in stats_list], axis=0))
        self.min_sorted_t = np.take_along_axis(np.ascontiguousarray(min_base.T), order_t, axis=1)
        self.neg_t = np.ascontiguousarray(np.stack([st.neg_sorted for st in stats_list], axis=0))

    def level_aps(self, level: int, threads: int = 1) -> list[float | None]:
        if level == self.dist_base.d_max:
            masked_t = np.zeros_like(self.neg_t)
        else:
            mu = threshold_distance(self.dist_base, level).mu
            masked_t = (
                np.where(self.min_sorted_t > level, self.min_sorted_t, 0) * self.neg_t / mu
            )

        def one(ci: int) -> float | None:
            st = self.stats_list[ci]
            if st.n_pos == 0:
                return None
            return _ap_from_masked(st, masked_t[ci])

        n = len(self.stats_list)
        if threads <= 1 or n < 8:
            return [one(ci) for ci in range(n)]
        results: list[float | None] = [None] * n
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for ci, value in zip(range(n), pool.map(one, range(n))):
                results[ci] = value
        return results


def _mean_of_present(values: list[float | None], what: str) -> float:
    present = [v for v in values if v is not None]
    if not present:
        raise ValidationError("no-positive-labels", f"every class lacks positive labels; {what} undefined")
    return math.fsum(present) / len(present)


def _apply_zero_positive_policy(
    stats_list: list[_ColumnStats], zero_positive: str, class_ids: tuple[str, ...]
) -> tuple[str, ...]:
    skipped = tuple(class_ids[ci] for ci, st in enumerate(stats_list) if st.n_pos == 0)
    if skipped and zero_positive == "error":
        raise ValidationError(
            "zero-positive-class", f"class {skipped[0]!r} has no positive labels"
        )
    if skipped:
        logger.warning("%d classes have no positive labels and are excluded from means", len(skipped))
    return skipped


def mean_average_precision(
    scores: ScoreMatrix,
    labels: LabelMatrix,
    *,
    zero_positive: str = "skip",
    threads: int = 1,
) -> float:
    """Classic mAP: mean per-class AP over classes with at least one positive."""
    _check_pair(scores, labels)
    stats_list = _all_column_stats(scores, labels)
    _apply_zero_positive_policy(stats_list, zero_positive, _default_ids(scores.n_classes))
    return _mean_of_present(_class_aps(stats_list, None, threads), "mAP")


def oap(
    scores: ScoreMatrix,
    labels: LabelMatrix,
    dist_base: DistanceMatrix,
    level: int,
    *,
    empty_labels: str = "error",
    zero_positive: str = "skip",
    threads: int = 1,
) -> LevelResult:
    """Ontology-aware AP for every class at one coarse-grained level."""
    _check_pair(scores, labels)
    if scores.n_classes != dist_base.n_classes:
        raise ValidationError(
            "class-count-mismatch",
            f"matrices have {scores.n_classes} classes, distance matrix has {dist_base.n_classes}",
        )
    if not dist_base.is_base:
        raise ValidationError("not-base-matrix", "oap expects the base (unthresholded) matrix")
    stats_list = _all_column_stats(scores, labels)
    _apply_zero_positive_policy(stats_list, zero_positive, _default_ids(scores.n_classes))
    engine = _LevelEngine(stats_list, labels, dist_base, empty_labels)
    return _oap_level(engine, level, threads)


def _oap_level(engine: _LevelEngine, level: int, threads: int) -> LevelResult:
    aps = engine.level_aps(level, threads)
    return LevelResult(
        level=level,
        per_class=tuple(aps),
        mean_oap=_mean_of_present(aps, f"OAP at level {level}"),
    )


def _default_ids(n_classes: int) -> tuple[str, ...]:
    return tuple(f"class_{c}" for c in range(n_classes))


def default_levels(d_max: int, include_top_level: bool = False) -> list[int]:
    """Level range 0..d_max-1; the degenerate all-zero top level only on request."""
    top = d_max + 1 if include_top_level else d_max
    return list(range(0, top))


def omap(
    scores: ScoreMatrix,
    labels: LabelMatrix,
    dist_base: DistanceMatrix,
    levels: list[int] | None = None,
    *,
    include_top_level: bool = False,
    classes: ClassIndex | None = None,
    empty_labels: str = "error",
    zero_positive: str = "skip",
    threads: int = 1,
    created: str | None = None,
) -> EvaluationReport:
    """Full evaluation: mAP, per-level OAP, and their aggregate OmAP.

    OmAP is the mean over the level range of per-level class means; the
    default range is 0..d_max-1.  OmAP_0 (the finest level) is reported
    whenever level 0 is in the range.
    """
    _check_pair(scores, labels)
    if scores.n_classes != dist_base.n_classes:
        raise ValidationError(
            "class-count-mismatch",
            f"matrices have {scores.n_classes} classes, distance matrix has {dist_base.n_classes}",
        )
    if classes is not None and classes.n_classes != scores.n_classes:
        raise ValidationError(
            "class-count-mismatch",
            f"matrices have {scores.n_classes} classes, class index has {classes.n_classes}",
        )
    if not dist_base.is_base:
        raise ValidationError("not-base-matrix", "omap expects the base (unthresholded) matrix")

    if levels is None:
        levels = default_levels(dist_base.d_max, include_top_level)
    levels = [int(v) for v in levels]
    if not levels:
        raise ValidationError("empty-level-range", "level range is empty")
    if levels != sorted(set(levels)):
        raise ValidationError("invalid-level-range", "levels must be strictly ascending")
    if levels[0] < 0 or levels[-1] > dist_base.d_max:
        raise ValidationError(
            "level-out-of-range", f"levels must lie within [0, {dist_base.d_max}]"
        )

    class_ids = classes.ids if classes is not None else _default_ids(scores.n_classes)
    stats_list = _all_column_stats(scores, labels)
    skipped = _apply_zero_positive_policy(stats_list, zero_positive, class_ids)
    engine = _LevelEngine(stats_list, labels, dist_base, empty_labels)

    base_aps = _class_aps(stats_list, None, threads)
    map_value = _mean_of_present(base_aps, "mAP")
    level_results = [_oap_level(engine, lv, threads) for lv in levels]

    omap_value = math.fsum(lr.mean_oap for lr in level_results) / len(level_results)
    omap0 = next((lr.mean_oap for lr in level_results if lr.level == 0), None)

    per_class = tuple(
        PerClassResult(
            class_id=class_ids[ci],
            ap=base_aps[ci],
            oap=tuple(lr.per_class[ci] for lr in level_results),
        )
        for ci in range(scores.n_classes)
    )

    if classes is None:
        classes = ClassIndex(ids=class_ids, names=class_ids)
    report = EvaluationReport(
        map=map_value,
        omap=omap_value,
        omap0=omap0,
        omap_level=tuple((lr.level, lr.mean_oap) for lr in level_results),
        per_class=per_class,
        metadata=ReportMetadata(
            ontology_digest=ontology_digest(classes, dist_base),
            levels=tuple(levels),
            d_max=dist_base.d_max,
            n_samples=scores.n_samples,
            n_classes=scores.n_classes,
            created=created,
            skipped_classes=skipped,
        ),
    )
    validate_report(report)
    return report


def compare_reports(a: EvaluationReport, b: EvaluationReport) -> ReportComparison:
    """Per-level OAP deltas (a minus b) between two reports on one ontology."""
    if a.metadata.ontology_digest != b.metadata.ontology_digest:
        raise ValidationError(
            "ontology-digest-mismatch", "reports were produced against different ontologies"
        )
    if a.metadata.levels != b.metadata.levels:
        raise ValidationError(
            "level-range-mismatch",
            f"level ranges differ: {list(a.metadata.levels)} vs {list(b.metadata.levels)}",
        )
    rows = tuple(
        LevelDelta(level=lv, oap_a=ma, oap_b=mb, delta=ma - mb)
        for (lv, ma), (_, mb) in zip(a.omap_level, b.omap_level)
    )
    return ReportComparison(
        levels=rows,
        map_a=a.map,
        map_b=b.map,
        map_delta=a.map - b.map,
        omap_a=a.omap,
        omap_b=b.omap,
        omap_delta=a.omap - b.omap,
    )


def comparison_csv(comparison: ReportComparison) -> str:
    lines = ["lambda,oap_a,oap_b,delta"]
    for row in comparison.levels:
        lines.append(f"{row.level},{row.oap_a!r},{row.oap_b!r},{row.delta!r}")
    return "\n".join(lines) + "\n"


def level_curve_csv(report: EvaluationReport) -> str:
    lines = ["lambda,mean_oap"]
    for level, mean_oap in report.omap_level:
        lines.append(f"{level},{mean_oap!r}")
    return "\n".join(lines) + "\n"
