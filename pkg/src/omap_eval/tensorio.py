"""Prediction/label matrix I/O and evaluation-report serialization.

Matrices travel in two formats:

* binary (bit-exact): magic ``OMAP`` | u16 LE format version = 1 |
  u8 kind (0 = scores, 1 = labels, 2 = weights) | u8 reserved = 0 |
  u64 LE N | u64 LE C | N*C IEEE-754 binary32 LE, row-major.
* CSV: '.' decimal, no thousands separators, header row
  ``sample_id,class_0,class_1,...``; values are written with full
  round-trip precision.

Scores and labels are stored as 32-bit floats; metric arithmetic happens
in 64-bit elsewhere.  Reports are JSON documents with schema tag
``omap_report_v1``.
"""

from __future__ import annotations

import io
import json
import math
import struct
from dataclasses import asdict, dataclass
from functools import cached_property

import numpy as np

from .errors import InputOutputError, ValidationError

MATRIX_MAGIC = b"OMAP"
MATRIX_FORMAT_VERSION = 1
REPORT_SCHEMA = "omap_report_v1"
_HEADER = struct.Struct("<4sHBBQQ")

_KIND_BYTE = {"scores": 0, "labels": 1, "weights": 2}
_BYTE_KIND = {v: k for k, v in _KIND_BYTE.items()}


def _first_offender(mask: np.ndarray) -> tuple[int, int]:
    r, c = np.argwhere(mask)[0]
    return int(r), int(c)


def _check_shape(values: np.ndarray) -> None:
    if values.ndim != 2:
        raise ValidationError("shape-mismatch", f"expected a 2-D matrix, got {values.ndim}-D")
    if values.shape[0] < 1 or values.shape[1] < 1:
        raise ValidationError("empty-matrix", f"matrix shape {values.shape} has an empty axis")


def _check_finite(values: np.ndarray) -> None:
    bad = ~np.isfinite(values)
    if bad.any():
        r, c = _first_offender(bad)
        raise ValidationError("non-finite-value", f"non-finite value at row {r}, col {c}")


@dataclass(frozen=True)
class ScoreMatrix:
    """N x C prediction probabilities in [0, 1], stored as float32."""

    values: np.ndarray

    def __post_init__(self):
        _check_shape(self.values)
        _check_finite(self.values)
        bad = (self.values < 0) | (self.values > 1)
        if bad.any():
            r, c = _first_offender(bad)
            raise ValidationError(
                "value-out-of-range",
                f"score {float(self.values[r, c])!r} at row {r}, col {c} outside [0, 1]",
            )
        self.values.setflags(write=False)

    kind = "scores"

    @classmethod
    def from_values(cls, values) -> "ScoreMatrix":
        return cls(np.ascontiguousarray(values, dtype=np.float32))

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_classes(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class LabelMatrix:
    """N x C binary targets; per-row label sets are derived on load."""

    values: np.ndarray

    def __post_init__(self):
        _check_shape(self.values)
        _check_finite(self.values)
        bad = (self.values != 0) & (self.values != 1)
        if bad.any():
            r, c = _first_offender(bad)
            raise ValidationError(
                "not-binary-label",
                f"label {float(self.values[r, c])!r} at row {r}, col {c} is not 0 or 1",
            )
        self.values.setflags(write=False)

    kind = "labels"

    @classmethod
    def from_values(cls, values) -> "LabelMatrix":
        return cls(np.ascontiguousarray(values, dtype=np.float32))

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_classes(self) -> int:
        return self.values.shape[1]

    @cached_property
    def label_sets(self) -> tuple[tuple[int, ...], ...]:
        """L_n per row: the column indices labeled 1."""
        return tuple(tuple(np.nonzero(row)[0].tolist()) for row in self.values)

    def label_set(self, n: int) -> tuple[int, ...]:
        return self.label_sets[n]


@dataclass(frozen=True)
class WeightMatrix:
    """N x C nonnegative loss weights, kept in float64."""

    values: np.ndarray

    def __post_init__(self):
        _check_shape(self.values)
        _check_finite(self.values)
        bad = self.values < 0
        if bad.any():
            r, c = _first_offender(bad)
            raise ValidationError(
                "value-out-of-range",
                f"negative weight at row {r}, col {c}",
            )
        self.values.setflags(write=False)

    kind = "weights"

    @classmethod
    def from_values(cls, values) -> "WeightMatrix":
        return cls(np.ascontiguousarray(values, dtype=np.float64))

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_classes(self) -> int:
        return self.values.shape[1]


Matrix = ScoreMatrix | LabelMatrix | WeightMatrix
_KIND_CLASS = {"scores": ScoreMatrix, "labels": LabelMatrix, "weights": WeightMatrix}


def _wrap(kind: str, values: np.ndarray) -> Matrix:
    return _KIND_CLASS[kind].from_values(values)


def write_matrix(matrix: Matrix, path, fmt: str = "binary") -> None:
    """Persist a matrix; binary re-reads bit-exactly, CSV within one
    decimal round-trip (exact for float32-backed data)."""
    if fmt == "binary":
        payload = np.ascontiguousarray(matrix.values, dtype="<f4").tobytes()
        header = _HEADER.pack(
            MATRIX_MAGIC,
            MATRIX_FORMAT_VERSION,
            _KIND_BYTE[matrix.kind],
            0,
            matrix.n_samples,
            matrix.n_classes,
        )
        data = header + payload
    elif fmt == "csv":
        buf = io.StringIO()
        buf.write("sample_id," + ",".join(f"class_{c}" for c in range(matrix.n_classes)) + "\n")
        for n in range(matrix.n_samples):
            row = ",".join(repr(float(v)) for v in matrix.values[n])
            buf.write(f"{n},{row}\n")
        data = buf.getvalue().encode("utf-8")
    else:
        raise ValidationError("unknown-format", f"unknown matrix format {fmt!r}")
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise InputOutputError("io-failure", f"cannot write {path}: {exc}") from None


def read_matrix(path, expected_kind: str) -> Matrix:
    """Load a matrix, sniffing binary vs CSV, and validate it for its kind."""
    if expected_kind not in _KIND_BYTE:
        raise ValidationError("unknown-kind", f"unknown matrix kind {expected_kind!r}")
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise InputOutputError("io-failure", f"cannot read {path}: {exc}") from None

    if blob[:4] == MATRIX_MAGIC:
        return _read_binary(blob, expected_kind, path)
    return _read_csv(blob, expected_kind, path)


def _read_binary(blob: bytes, expected_kind: str, path) -> Matrix:
    if len(blob) < _HEADER.size:
        raise ValidationError("truncated-matrix", f"{path}: header truncated")
    magic, version, kind_byte, reserved, n, c = _HEADER.unpack_from(blob)
    if magic != MATRIX_MAGIC:
        raise ValidationError("bad-magic", f"{path}: not a matrix file")
    if version != MATRIX_FORMAT_VERSION:
        raise ValidationError("unsupported-version", f"{path}: format version {version} unsupported")
    if kind_byte not in _BYTE_KIND or reserved != 0:
        raise ValidationError("bad-kind", f"{path}: malformed header")
    kind = _BYTE_KIND[kind_byte]
    if kind != expected_kind:
        raise ValidationError("kind-mismatch", f"{path}: contains {kind}, expected {expected_kind}")
    if n < 1 or c < 1:
        raise ValidationError("empty-matrix", f"{path}: header declares empty shape {n}x{c}")
    expected_bytes = n * c * 4
    payload = blob[_HEADER.size :]
    if len(payload) != expected_bytes:
        raise ValidationError(
            "truncated-matrix",
            f"{path}: payload is {len(payload)} bytes, header implies {expected_bytes}",
        )
    values = np.frombuffer(payload, dtype="<f4").reshape(n, c)
    return _wrap(kind, values)


def _read_csv(blob: bytes, expected_kind: str, path) -> Matrix:
    try:
        text = blob.decode("utf-8")
    except UnicodeDecodeError:
        raise ValidationError("malformed-csv", f"{path}: not UTF-8 text") from None
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2 or not lines[0].startswith("sample_id"):
        raise ValidationError("malformed-csv", f"{path}: missing sample_id header row")
    n_cols = lines[0].count(",")
    rows = []
    for r, ln in enumerate(lines[1:]):
        parts = ln.split(",")
        if len(parts) != n_cols + 1:
            raise ValidationError(
                "shape-mismatch", f"{path}: row {r} has {len(parts) - 1} values, header has {n_cols}"
            )
        try:
            rows.append([float(p) for p in parts[1:]])
        except ValueError:
            raise ValidationError("malformed-csv", f"{path}: non-numeric value in row {r}") from None
    values = np.asarray(rows, dtype=np.float64)
    return _wrap(expected_kind, values)


# ---------------------------------------------------------------------------
# Evaluation reports


@dataclass(frozen=True)
class PerClassResult:
    """Metrics for one class; None marks a class skipped for lack of positives."""

    class_id: str
    ap: float | None
    oap: tuple[float | None, ...]


@dataclass(frozen=True)
class ReportMetadata:
    ontology_digest: str
    levels: tuple[int, ...]
    d_max: int
    n_samples: int
    n_classes: int
    matrix_format_version: int = MATRIX_FORMAT_VERSION
    created: str | None = None
    skipped_classes: tuple[str, ...] = ()


@dataclass(frozen=True)
class EvaluationReport:
    """mAP plus per-level / per-class ontology-aware AP, with provenance."""

    map: float
    omap: float
    omap0: float | None
    omap_level: tuple[tuple[int, float], ...]
    per_class: tuple[PerClassResult, ...]
    metadata: ReportMetadata

    def recompute_omap(self) -> float:
        """Aggregate OAP from per-class entries: level means, then the mean
        over levels.  Used as the integrity check on load."""
        level_means = []
        for j in range(len(self.metadata.levels)):
            vals = [pc.oap[j] for pc in self.per_class if pc.oap[j] is not None]
            if not vals:
                raise ValidationError("report-integrity", f"level {j} has no class entries")
            level_means.append(math.fsum(vals) / len(vals))
        return math.fsum(level_means) / len(level_means)


def validate_report(report: EvaluationReport) -> None:
    values = [report.map, report.omap]
    if report.omap0 is not None:
        values.append(report.omap0)
    values += [m for _, m in report.omap_level]
    for pc in report.per_class:
        values += [v for v in (pc.ap, *pc.oap) if v is not None]
    for v in values:
        if not (isinstance(v, float) and math.isfinite(v) and 0.0 <= v <= 1.0):
            raise ValidationError("metric-out-of-range", f"metric value {v!r} outside [0, 1]")
    if len(report.omap_level) != len(report.metadata.levels):
        raise ValidationError("report-integrity", "omap_level does not match the level range")
    for pc in report.per_class:
        if len(pc.oap) != len(report.metadata.levels):
            raise ValidationError("report-integrity", f"class {pc.class_id!r} has a short OAP row")
    if abs(report.recompute_omap() - report.omap) > 1e-12:
        raise ValidationError("report-integrity", "stored omap disagrees with per-class recomputation")


def write_report(report: EvaluationReport, path) -> None:
    validate_report(report)
    doc = {
        "schema": REPORT_SCHEMA,
        "map": report.map,
        "omap": report.omap,
        "omap0": report.omap0,
        "omap_level": [{"level": lv, "mean_oap": m} for lv, m in report.omap_level],
        "per_class": [
            {"class_id": pc.class_id, "ap": pc.ap, "oap": list(pc.oap)} for pc in report.per_class
        ],
        "metadata": asdict(report.metadata) | {
            "levels": list(report.metadata.levels),
            "skipped_classes": list(report.metadata.skipped_classes),
        },
    }
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise InputOutputError("io-failure", f"cannot write {path}: {exc}") from None


def read_report(path) -> EvaluationReport:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputOutputError("io-failure", f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError("malformed-report", f"{path}: invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("schema") != REPORT_SCHEMA:
        raise ValidationError(
            "report-schema-version",
            f"{path}: unknown report schema {doc.get('schema')!r}, expected {REPORT_SCHEMA!r}",
        )
    try:
        meta = doc["metadata"]
        report = EvaluationReport(
            map=float(doc["map"]),
            omap=float(doc["omap"]),
            omap0=None if doc["omap0"] is None else float(doc["omap0"]),
            omap_level=tuple((int(e["level"]), float(e["mean_oap"])) for e in doc["omap_level"]),
            per_class=tuple(
                PerClassResult(
                    class_id=str(e["class_id"]),
                    ap=None if e["ap"] is None else float(e["ap"]),
                    oap=tuple(None if v is None else float(v) for v in e["oap"]),
                )
                for e in doc["per_class"]
            ),
            metadata=ReportMetadata(
                ontology_digest=str(meta["ontology_digest"]),
                levels=tuple(int(v) for v in meta["levels"]),
                d_max=int(meta["d_max"]),
                n_samples=int(meta["n_samples"]),
                n_classes=int(meta["n_classes"]),
                matrix_format_version=int(meta["matrix_format_version"]),
                created=meta.get("created"),
                skipped_classes=tuple(str(s) for s in meta.get("skipped_classes", ())),
            ),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError("malformed-report", f"{path}: {exc!r}") from None
    validate_report(report)
    return report
