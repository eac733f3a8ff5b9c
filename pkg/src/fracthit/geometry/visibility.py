"""Visibility polygons in simple polygons.

The directions from q to every vertex (plus the four axis directions, so
that no angular gap reaches pi) cut the plane around q into open sectors
containing no vertex.  Inside one sector the boundary edge nearest to q is
the same for every ray, so the visible part of the sector is a triangle
whose far side lies on that edge.
"""

from __future__ import annotations

from functools import cmp_to_key
from typing import List, Optional, Tuple

from .polygon import GeometryError, Polygon, _drop_collinear
from .predicates import (
    OUTSIDE,
    angle_key_cmp,
    on_segment,
    point_in_polygon,
    segment_params,
)
from .rational import Q, Point

_AXES = ((Q(1), Q(0)), (Q(0), Q(1)), (Q(-1), Q(0)), (Q(0), Q(-1)))


def _ray_hit(q: Point, d: Point, a: Point, b: Point):
    """Ray parameter t > 0 where q + t*d meets segment ab, or None."""
    far = (q[0] + d[0], q[1] + d[1])
    prm = segment_params(q, far, a, b)
    if prm is None:
        return None
    t, u = prm
    if t <= 0 or u < 0 or u > 1:
        return None
    return t


def _critical_directions(q: Point, vertices) -> List[Point]:
    dirs = [(v[0] - q[0], v[1] - q[1]) for v in vertices if v != q]
    dirs.extend(_AXES)
    dirs.sort(key=cmp_to_key(angle_key_cmp))
    out: List[Point] = []
    for d in dirs:
        if out and angle_key_cmp(out[-1], d) == 0:
            continue
        out.append(d)
    if len(out) > 1 and angle_key_cmp(out[0], out[-1]) == 0:
        out.pop()
    return out


def _nearest_edge(q: Point, d: Point, edges) -> Tuple[Optional[int], object]:
    best, best_t = None, None
    for i, (a, b) in enumerate(edges):
        t = _ray_hit(q, d, a, b)
        if t is not None and (best_t is None or t < best_t):
            best, best_t = i, t
    return best, best_t


def _line_hit(q: Point, d: Point, a: Point, b: Point) -> Point:
    far = (q[0] + d[0], q[1] + d[1])
    prm = segment_params(q, far, a, b)
    if prm is None:
        raise GeometryError("internal: sector ray parallel to its blocking edge")
    t = prm[0]
    return (q[0] + t * d[0], q[1] + t * d[1])


def visibility_polygon(H: Polygon, q) -> Polygon:
    """Return V_H(q), the region of H seen from q (boundary contact allowed)."""
    q = (Q(q[0]), Q(q[1]))
    cls = point_in_polygon(q, H.vertices)
    if cls == OUTSIDE:
        raise GeometryError(f"point {q} lies outside the polygon")
    if H.is_convex():
        return H
    on_boundary = cls != 1
    edges = [e for e in H.edges() if not on_segment(q, e[0], e[1])]
    dirs = _critical_directions(q, H.vertices)
    m = len(dirs)
    pieces: List[Optional[Tuple[Point, Point]]] = []
    for i in range(m):
        d1, d2 = dirs[i], dirs[(i + 1) % m]
        probe = (d1[0] + d2[0], d1[1] + d2[1])
        k, t = _nearest_edge(q, probe, edges)
        if k is None and on_boundary:
            pieces.append(None)
            continue
        if k is None:
            raise GeometryError("internal: visibility ray escaped the polygon")
        if on_boundary:
            mid = (q[0] + t * probe[0] / 2, q[1] + t * probe[1] / 2)
            if point_in_polygon(mid, H.vertices) == OUTSIDE:
                pieces.append(None)
                continue
        a, b = edges[k]
        pieces.append((_line_hit(q, d1, a, b), _line_hit(q, d2, a, b)))

    if on_boundary:
        # rotate so the outward-facing gap sits at the end, then close through q
        start = next((i for i in range(m) if pieces[i] is None), None)
        if start is None:
            raise GeometryError("internal: boundary point with no outward sector")
        order = [pieces[(start + j) % m] for j in range(1, m + 1)]
        pts: List[Point] = [q]
        for pc in order:
            if pc is not None:
                pts.extend(pc)
    else:
        pts = []
        for pc in pieces:
            pts.extend(pc)
    pts = _drop_collinear(pts)
    return Polygon(tuple(pts))


__all__ = ["visibility_polygon"]
