"""Simple polygons with exact rational vertices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

from .predicates import (
    BOUNDARY,
    INSIDE,
    OUTSIDE,
    on_segment,
    orient,
    point_in_polygon,
    segments_intersect,
    signed_area2,
)
from .rational import Q, Point, Rational


class GeometryError(ValueError):
    """Invalid or degenerate geometric input."""


def shoelace_area(polygon) -> Rational:
    """Exact signed area of a polygon or vertex sequence; positive for CCW."""
    vertices = polygon.vertices if isinstance(polygon, Polygon) else list(polygon)
    if len(vertices) < 3:
        raise GeometryError(f"polygon needs at least 3 vertices, got {len(vertices)}")
    return signed_area2(vertices) / 2


def _drop_collinear(vertices: Sequence[Point]) -> List[Point]:
    pts = []
    for v in vertices:
        if not pts or pts[-1] != v:
            pts.append(v)
    while len(pts) > 1 and pts[0] == pts[-1]:
        pts.pop()
    changed = True
    while changed and len(pts) >= 3:
        changed = False
        n = len(pts)
        for i in range(n):
            a, b, c = pts[i - 1], pts[i], pts[(i + 1) % n]
            if orient(a, b, c) == 0:
                # collinear middle vertex (or a spike); remove it
                del pts[i]
                changed = True
                break
    return pts


def is_simple(vertices: Sequence[Point]) -> bool:
    """O(n^2) exact test that a closed chain is a simple polygon."""
    n = len(vertices)
    if n < 3 or len(set(vertices)) != n:
        return False
    for i in range(n):
        a, b = vertices[i], vertices[(i + 1) % n]
        for j in range(i + 1, n):
            c, d = vertices[j], vertices[(j + 1) % n]
            if j == i + 1 or (i == 0 and j == n - 1):
                # adjacent edges may only share their common vertex
                shared = b if j == i + 1 else a
                other = d if j == i + 1 else c
                if orient(a, b, other) == 0 and on_segment(other, a, b) and other != shared:
                    return False
                far = a if j == i + 1 else b
                if orient(c, d, far) == 0 and on_segment(far, c, d) and far != shared:
                    return False
                continue
            if segments_intersect(a, b, c, d):
                return False
    return True


@dataclass(frozen=True)
class Polygon:
    """A simple polygon, vertices in counter-clockwise order.

    Use :meth:`from_vertices` for untrusted input: it drops repeated and
    collinear vertices, reorients clockwise input and validates simplicity.
    """

    vertices: Tuple[Point, ...]

    def __post_init__(self):
        if len(self.vertices) < 3:
            raise GeometryError(f"polygon needs at least 3 vertices, got {len(self.vertices)}")
        if signed_area2(self.vertices) <= 0:
            raise GeometryError("polygon must be counter-clockwise with positive area")

    @classmethod
    def from_vertices(cls, vertices: Iterable, validate: bool = True) -> "Polygon":
        pts = [(Q(x), Q(y)) for x, y in vertices]
        pts = _drop_collinear(pts)
        if len(pts) < 3:
            raise GeometryError("degenerate polygon (fewer than 3 non-collinear vertices)")
        if signed_area2(pts) < 0:
            pts.reverse()
        if validate and not is_simple(pts):
            raise GeometryError("polygon boundary self-intersects")
        return cls(tuple(pts))

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def area(self) -> Rational:
        return signed_area2(self.vertices) / 2

    def edges(self):
        vs = self.vertices
        n = len(vs)
        return [(vs[i], vs[(i + 1) % n]) for i in range(n)]

    def contains(self, p: Point) -> bool:
        """Closed containment (boundary counts)."""
        return point_in_polygon(p, self.vertices) != OUTSIDE

    def classify(self, p: Point) -> int:
        return point_in_polygon(p, self.vertices)

    def is_convex(self) -> bool:
        vs = self.vertices
        n = len(vs)
        return all(orient(vs[i - 1], vs[i], vs[(i + 1) % n]) >= 0 for i in range(n))

    def reflex_vertices(self) -> List[int]:
        vs = self.vertices
        n = len(vs)
        return [i for i in range(n) if orient(vs[i - 1], vs[i], vs[(i + 1) % n]) < 0]

    def bbox(self) -> Tuple[float, float, float, float]:
        xs = [float(v[0]) for v in self.vertices]
        ys = [float(v[1]) for v in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)


def triangulate(vertices: Sequence[Point]) -> List[Tuple[Point, Point, Point]]:
    """Ear-clipping triangulation of a CCW simple polygon (exact, O(n^3))."""
    idx = list(range(len(vertices)))
    vs = list(vertices)
    tris = []
    while len(idx) > 3:
        n = len(idx)
        found = False
        for k in range(n):
            i0, i1, i2 = idx[k - 1], idx[k], idx[(k + 1) % n]
            a, b, c = vs[i0], vs[i1], vs[(i2)]
            if orient(a, b, c) <= 0:
                continue
            ear = True
            for j in idx:
                if j in (i0, i1, i2):
                    continue
                p = vs[j]
                # any other vertex in the closed triangle blocks the ear
                if orient(a, b, p) >= 0 and orient(b, c, p) >= 0 and orient(c, a, p) >= 0:
                    ear = False
                    break
            if ear:
                tris.append((a, b, c))
                del idx[k]
                found = True
                break
        if not found:
            # only collinear triples remain; drop a flat vertex
            for k in range(n):
                a, b, c = vs[idx[k - 1]], vs[idx[k]], vs[idx[(k + 1) % n]]
                if orient(a, b, c) == 0:
                    del idx[k]
                    found = True
                    break
        if not found:
            raise GeometryError("triangulation failed: polygon is not simple")
    a, b, c = (vs[i] for i in idx)
    if orient(a, b, c) > 0:
        tris.append((a, b, c))
    return tris


def _merge_convex(p: List[Point], q: List[Point], u: Point, v: Point):
    """Merge two CCW convex polygons sharing the edge (u, v) if the union is convex."""
    # p traverses u -> v, q traverses v -> u
    ip = p.index(u)
    iq = q.index(v)
    n, m = len(p), len(q)
    if p[(ip + 1) % n] != v or q[(iq + 1) % m] != u:
        return None
    # walk p from v round to u, then q past u back towards v
    head = [p[(ip + 1 + k) % n] for k in range(n)]
    tail = [q[(iq + 2 + k) % m] for k in range(m - 2)]
    poly = head + tail
    k = len(poly)
    for i in range(k):
        if orient(poly[i - 1], poly[i], poly[(i + 1) % k]) < 0:
            return None
    return _drop_collinear(poly)


def convex_decomposition(polygon: Polygon) -> List[List[Point]]:
    """Hertel-Mehlhorn style decomposition into convex CCW pieces."""
    if polygon.is_convex():
        return [list(polygon.vertices)]
    pieces: List[List[Point]] = [list(t) for t in triangulate(polygon.vertices)]
    boundary = set()
    for a, b in polygon.edges():
        boundary.add((a, b))
    changed = True
    while changed:
        changed = False
        edge_owner = {}
        for pi, piece in enumerate(pieces):
            n = len(piece)
            for i in range(n):
                edge_owner[(piece[i], piece[(i + 1) % n])] = pi
        for (u, v), pi in list(edge_owner.items()):
            if (u, v) in boundary:
                continue
            qi = edge_owner.get((v, u))
            if qi is None or qi == pi:
                continue
            merged = _merge_convex(pieces[pi], pieces[qi], u, v)
            if merged is not None:
                keep = [pc for k, pc in enumerate(pieces) if k not in (pi, qi)]
                keep.append(merged)
                pieces = keep
                changed = True
                break
    return pieces


def polygon_centroid(vertices: Sequence[Point]) -> Point:
    """Area centroid (exact) of a simple polygon."""
    a2 = signed_area2(vertices)
    if a2 == 0:
        raise GeometryError("centroid of a zero-area polygon")
    n = len(vertices)
    cx = cy = 0
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        c = x0 * y1 - x1 * y0
        cx += (x0 + x1) * c
        cy += (y0 + y1) * c
    return (cx / (3 * a2), cy / (3 * a2))


__all__ = [
    "BOUNDARY",
    "GeometryError",
    "INSIDE",
    "OUTSIDE",
    "Polygon",
    "convex_decomposition",
    "is_simple",
    "polygon_centroid",
    "shoelace_area",
    "triangulate",
]
