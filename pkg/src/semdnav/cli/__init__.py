"""Command-line front end, run configuration and batch orchestration."""

from .main import main

__all__ = ["main"]
