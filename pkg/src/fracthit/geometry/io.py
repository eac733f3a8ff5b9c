"""Polygon text files: one vertex "x_num/x_den y_num/y_den" per line, CCW, '#' comments."""

from __future__ import annotations

from pathlib import Path

from .polygon import GeometryError, Polygon, signed_area2
from .rational import Q, fmt_point


class PolygonFormatError(ValueError):
    """Malformed polygon file; the message carries the line number."""


def parse_polygon(text: str, source: str = "<string>") -> Polygon:
    pts = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise PolygonFormatError(f"{source}:{lineno}: expected two coordinates, got {len(parts)}")
        try:
            pts.append((Q(parts[0]), Q(parts[1])))
        except (ValueError, ZeroDivisionError) as e:
            raise PolygonFormatError(f"{source}:{lineno}: {e}") from None
    if len(pts) < 3:
        raise PolygonFormatError(f"{source}: polygon needs at least 3 vertices, got {len(pts)}")
    if signed_area2(pts) < 0:
        raise PolygonFormatError(f"{source}: vertices must be listed counter-clockwise")
    try:
        return Polygon.from_vertices(pts)
    except GeometryError as e:
        raise PolygonFormatError(f"{source}: {e}") from None


def load_polygon(path) -> Polygon:
    path = Path(path)
    return parse_polygon(path.read_text(), str(path))


def format_polygon(poly: Polygon) -> str:
    return "".join(fmt_point(v) + "\n" for v in poly.vertices)


def save_polygon(poly: Polygon, path) -> None:
    Path(path).write_text(format_polygon(poly))


__all__ = ["PolygonFormatError", "format_polygon", "load_polygon", "parse_polygon", "save_polygon"]
