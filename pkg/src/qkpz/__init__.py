"""Decorated-tree calculus and renormalisation checks for quasi-generalised KPZ."""
from __future__ import annotations

from .symexpr import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
