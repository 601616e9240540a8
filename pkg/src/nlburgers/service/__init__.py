"""HTTP facade: pydantic schemas and the FastAPI application.

Run `uvicorn nlburgers.service:app` (or `nlburgers serve`) to expose the
solver; the CLI talks to the same schemas either in process or over HTTP.
"""

from .app import app

__all__ = ["app"]
