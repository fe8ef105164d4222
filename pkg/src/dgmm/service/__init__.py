"""HTTP service layer: pydantic schemas and the FastAPI application."""

from .app import create_app  # noqa: F401
