"""Shared value types."""

from .box import BoxBounds

__all__ = ["BoxBounds"]
