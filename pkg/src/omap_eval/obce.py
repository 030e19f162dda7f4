"""Ontology-reweighted binary-cross-entropy loss weights and loss values.

The per-sample weight vector follows a fixed recipe over the base
(unthresholded) distance matrix: per class, the minimum of d**beta over
distances d to the sample's labels; divide by the maximum; pin every
target class to 1.0; then divide all entries by the vector mean, computed
once, so the final mean is exactly 1 and BCE/OBCE magnitudes stay
comparable.  0**0 is taken as 1, so beta = 0 yields the all-ones vector
and OBCE collapses to plain BCE.

Loss values implement the standard negated cross entropy (nonnegative,
smaller is better); the weighted variant puts the weight vector inside the
mean.  Training integration is out of scope; these are reference values
for verification and export.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import InternalError, ValidationError
from .ontology import DistanceMatrix
from .tensorio import LabelMatrix

logger = logging.getLogger(__name__)

DEFAULT_CLAMP = 1e-7
MEAN_TOLERANCE = 1e-9


@dataclass(frozen=True)
class WeightVector:
    """Length-C loss weights for one sample; mean is 1 by construction."""

    values: np.ndarray
    beta: float
    sample_labels: tuple[int, ...]

    def __post_init__(self):
        self.values.setflags(write=False)


@dataclass(frozen=True)
class LossValue:
    bce: float
    obce: float
    combined: float


def obce_weights(labels_row: Iterable[int], dist_base: DistanceMatrix, beta: float) -> WeightVector:
    """Loss-weight vector for one sample's label set.

    ``labels_row`` holds the column indices of the sample's target classes.
    """
    label_set = tuple(sorted(set(int(k) for k in labels_row)))
    if not label_set:
        raise ValidationError("empty-label-row", "sample has no labels")
    if beta < 0:
        raise ValidationError("negative-beta", f"beta must be >= 0, got {beta}")
    c = dist_base.n_classes
    if label_set[0] < 0 or label_set[-1] >= c:
        raise ValidationError("class-count-mismatch", f"label index outside [0, {c})")
    if not dist_base.is_base:
        raise ValidationError("not-base-matrix", "OBCE weights use the unthresholded distance matrix")

    distances = dist_base.values[:, label_set].astype(np.float64)
    raw = np.min(distances**beta, axis=1)
    peak = raw.max()
    if peak > 0:
        raw = raw / peak
    raw[list(label_set)] = 1.0
    raw /= raw.mean()

    if abs(raw.mean() - 1.0) > MEAN_TOLERANCE or np.any(raw < 0):
        raise InternalError("weight-normalization", "weight vector failed its mean-1 invariant")
    return WeightVector(values=raw, beta=float(beta), sample_labels=label_set)


def obce_weights_batch(
    labels: LabelMatrix,
    dist_base: DistanceMatrix,
    beta: float,
    *,
    empty_labels: str = "error",
) -> np.ndarray:
    """N x C weight matrix, row n computed from the n-th label set.

    Rows are independent.  Under the permissive policy an empty-label row
    becomes all ones (no reweighting is expressible for it) and the count
    is logged.
    """
    if beta < 0:
        raise ValidationError("negative-beta", f"beta must be >= 0, got {beta}")
    if labels.n_classes != dist_base.n_classes:
        raise ValidationError(
            "class-count-mismatch",
            f"labels have {labels.n_classes} classes, distance matrix has {dist_base.n_classes}",
        )
    out = np.empty((labels.n_samples, labels.n_classes), dtype=np.float64)
    n_empty = 0
    for n, label_set in enumerate(labels.label_sets):
        if not label_set:
            if empty_labels == "error":
                raise ValidationError("empty-label-row", f"sample {n} has no labels")
            out[n] = 1.0
            n_empty += 1
            continue
        out[n] = obce_weights(label_set, dist_base, beta).values
    if n_empty:
        logger.warning("%d samples had empty label sets; their weight rows are all ones", n_empty)
    return out


def _cross_entropy_terms(targets_row, predictions_row, clamp: float) -> np.ndarray:
    y = np.asarray(targets_row, dtype=np.float64)
    p = np.asarray(predictions_row, dtype=np.float64)
    if y.ndim != 1 or y.shape != p.shape:
        raise ValidationError("shape-mismatch", "targets and predictions must be equal-length vectors")
    p = np.clip(p, clamp, 1.0 - clamp)
    return y * np.log(p) + (1.0 - y) * np.log1p(-p)


def bce_loss(targets_row, predictions_row, *, clamp: float = DEFAULT_CLAMP) -> float:
    """Binary cross entropy, -mean(y*log(p) + (1-y)*log(1-p)).

    Predictions are clamped to [clamp, 1-clamp] before the logarithms.
    """
    return float(-np.mean(_cross_entropy_terms(targets_row, predictions_row, clamp)))


def obce_loss(targets_row, predictions_row, weights, *, clamp: float = DEFAULT_CLAMP) -> float:
    """Weighted cross entropy: the weight vector multiplies inside the mean."""
    r = weights.values if isinstance(weights, WeightVector) else np.asarray(weights, dtype=np.float64)
    terms = _cross_entropy_terms(targets_row, predictions_row, clamp)
    if r.shape != terms.shape:
        raise ValidationError("shape-mismatch", "weight vector length differs from targets")
    return float(-np.mean(r * terms))


def combined_loss(targets_row, predictions_row, weights, *, clamp: float = DEFAULT_CLAMP) -> LossValue:
    """BCE, OBCE, and their average (the scale-preserving training loss)."""
    bce = bce_loss(targets_row, predictions_row, clamp=clamp)
    obce = obce_loss(targets_row, predictions_row, weights, clamp=clamp)
    return LossValue(bce=bce, obce=obce, combined=(bce + obce) / 2.0)
