"""HTTP service wrapping the evaluation core.

An evaluator is a loaded ontology + class index with its precomputed base
distance matrix; creating one is idempotent (the id is derived from the
ontology digest) and evaluators are immutable, so they can be shared by
concurrent requests.  Error responses carry the core's stable error codes.
"""

from __future__ import annotations

import threading

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import ToolkitError, ValidationError
from ..loading import EvaluationContext, load_context
from ..metrics import omap
from ..obce import obce_weights_batch
from ..tensorio import LabelMatrix, ScoreMatrix
from .schemas import (
    CreateEvaluatorRequest,
    ErrorBody,
    EvaluateRequest,
    EvaluateResponse,
    EvaluatorInfo,
    HealthResponse,
    LevelMean,
    ObceWeightsRequest,
    ObceWeightsResponse,
)

_HTTP_STATUS = {2: 400, 3: 400, 4: 500}


def _info(evaluator_id: str, context: EvaluationContext) -> EvaluatorInfo:
    return EvaluatorInfo(
        evaluator_id=evaluator_id,
        n_classes=context.n_classes,
        n_vertices=context.graph.n_vertices,
        n_edges=context.graph.n_edges,
        d_max=context.d_max,
        mu=context.dist_base.mu,
        ontology_digest=context.digest,
    )


def _as_matrix(rows: list[list[float]], cls, what: str):
    if not rows:
        raise ValidationError("empty-matrix", f"{what} payload is empty")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValidationError("shape-mismatch", f"{what} rows have inconsistent lengths")
    return cls.from_values(np.asarray(rows, dtype=np.float32))


def create_app() -> FastAPI:
    app = FastAPI(title="omap-eval", version=__version__)
    app.state.evaluators = {}
    app.state.lock = threading.Lock()

    @app.exception_handler(ToolkitError)
    async def toolkit_error_handler(_request: Request, exc: ToolkitError):
        body = ErrorBody(code=exc.code, exit_code=exc.exit_code, message=str(exc))
        status = 404 if exc.code == "unknown-evaluator" else _HTTP_STATUS[exc.exit_code]
        return JSONResponse(status_code=status, content=body.model_dump())

    def _get_context(evaluator_id: str) -> EvaluationContext:
        with app.state.lock:
            context = app.state.evaluators.get(evaluator_id)
        if context is None:
            raise ValidationError("unknown-evaluator", f"no evaluator with id {evaluator_id!r}")
        return context

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", version=__version__)

    @app.post("/evaluators", response_model=EvaluatorInfo)
    def create_evaluator(request: CreateEvaluatorRequest):
        context = load_context(
            class_index_path=request.class_index_path,
            taxonomy_path=request.ontology_path,
            edge_list_path=request.edges_path,
        )
        evaluator_id = context.digest[:16]
        with app.state.lock:
            app.state.evaluators.setdefault(evaluator_id, context)
        return _info(evaluator_id, context)

    @app.get("/evaluators/{evaluator_id}", response_model=EvaluatorInfo)
    def get_evaluator(evaluator_id: str):
        return _info(evaluator_id, _get_context(evaluator_id))

    @app.post("/evaluators/{evaluator_id}/evaluate", response_model=EvaluateResponse)
    def evaluate(evaluator_id: str, request: EvaluateRequest):
        context = _get_context(evaluator_id)
        scores = _as_matrix(request.scores, ScoreMatrix, "scores")
        labels = _as_matrix(request.labels, LabelMatrix, "labels")
        if scores.n_classes != context.n_classes:
            raise ValidationError(
                "class-count-mismatch",
                f"scores have {scores.n_classes} classes, evaluator has {context.n_classes}",
            )
        report = omap(
            scores,
            labels,
            context.dist_base,
            levels=request.levels,
            include_top_level=request.include_top_level,
            classes=context.classes,
            empty_labels=request.empty_labels,
            zero_positive=request.zero_positive,
            threads=request.threads,
        )
        return EvaluateResponse(
            map=report.map,
            omap=report.omap,
            omap0=report.omap0,
            per_level=[LevelMean(level=lv, mean_oap=m) for lv, m in report.omap_level],
            skipped_classes=list(report.metadata.skipped_classes),
        )

    @app.post("/evaluators/{evaluator_id}/obce-weights", response_model=ObceWeightsResponse)
    def obce_weights(evaluator_id: str, request: ObceWeightsRequest):
        context = _get_context(evaluator_id)
        labels = _as_matrix(request.labels, LabelMatrix, "labels")
        weights = obce_weights_batch(
            labels, context.dist_base, request.beta, empty_labels=request.empty_labels
        )
        return ObceWeightsResponse(weights=weights.tolist(), beta=request.beta)

    return app


app = create_app()
