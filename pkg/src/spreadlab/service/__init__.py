"""HTTP service exposing the simulation lab."""

from .app import app, create_app

__all__ = ["app", "create_app"]
