"""Exact rational plane geometry: polygons, visibility, cell overlays."""

from .polygon import GeometryError, Polygon, convex_decomposition, triangulate
from .rational import Q, fmt, fmt_point, parse_point
from .visibility import visibility_polygon
from .overlay import CellComplex, overlay

__all__ = [
    "CellComplex",
    "GeometryError",
    "Polygon",
    "Q",
    "convex_decomposition",
    "fmt",
    "fmt_point",
    "overlay",
    "parse_point",
    "triangulate",
    "visibility_polygon",
]
