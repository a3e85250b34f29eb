"""HTTP service wrapping the planning library."""

from .app import create_app

__all__ = ["create_app"]
