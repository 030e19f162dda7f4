"""HTTP service exposing the evaluation core (run with uvicorn)."""

from .app import app, create_app

__all__ = ["app", "create_app"]
