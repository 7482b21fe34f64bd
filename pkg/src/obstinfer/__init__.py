"""Infer line-segment obstacle environments from visibility-constrained demonstrations."""

from .geometry import (
    BBox,
    Environment,
    GeometryError,
    Point2,
    PolyRegion,
    Segment,
    is_visible,
    visible_region,
)

__version__ = "0.1.0"

__all__ = [
    "BBox",
    "Environment",
    "GeometryError",
    "Point2",
    "PolyRegion",
    "Segment",
    "is_visible",
    "visible_region",
    "__version__",
]
