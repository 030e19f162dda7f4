"""Request/response models for the evaluation service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class CreateEvaluatorRequest(BaseModel):
    """Load an ontology + class index from server-local files."""

    class_index_path: str
    ontology_path: str | None = None
    edges_path: str | None = None


class EvaluatorInfo(BaseModel):
    evaluator_id: str
    n_classes: int
    n_vertices: int
    n_edges: int
    d_max: int
    mu: float
    ontology_digest: str


class EvaluateRequest(BaseModel):
    """Score/label matrices as row-major nested lists.

    Values are cast to float32 on arrival, matching the on-disk matrix
    format, so results agree with file-based CLI runs exactly.
    """

    scores: list[list[float]]
    labels: list[list[float]]
    levels: list[int] | None = None
    include_top_level: bool = False
    empty_labels: Literal["error", "max-weight"] = "error"
    zero_positive: Literal["skip", "error"] = "skip"
    threads: int = Field(default=1, ge=1, le=64)


class LevelMean(BaseModel):
    level: int
    mean_oap: float


class EvaluateResponse(BaseModel):
    map: float
    omap: float
    omap0: float | None
    per_level: list[LevelMean]
    skipped_classes: list[str]


class ObceWeightsRequest(BaseModel):
    labels: list[list[float]]
    beta: float = 1.0
    empty_labels: Literal["error", "ones"] = "error"


class ObceWeightsResponse(BaseModel):
    weights: list[list[float]]
    beta: float


class ErrorBody(BaseModel):
    code: str
    exit_code: int
    message: str
