"""Exact orientation, incidence and intersection predicates.

Every function here works on exact rationals; there are no tolerances.
"""

from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

from .rational import Q, Point, Rational

ZERO = Q(0)
ONE = Q(1)

INSIDE = 1
BOUNDARY = 0
OUTSIDE = -1


def cross(o: Point, a: Point, b: Point) -> Rational:
    """z-component of (a - o) x (b - o)."""
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def orient(a: Point, b: Point, c: Point) -> int:
    """+1 if a, b, c turn left, -1 if right, 0 if collinear."""
    v = cross(a, b, c)
    return (v > 0) - (v < 0)


def on_segment(p: Point, a: Point, b: Point) -> bool:
    """True if p lies on the closed segment ab."""
    if cross(a, b, p) != 0:
        return False
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(
        a[1], b[1]
    )


def segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool:
    """Closed-segment intersection test (touching counts)."""
    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    if o1 != o2 and o3 != o4 and o1 * o2 <= 0 and o3 * o4 <= 0:
        if o1 != 0 or o2 != 0 or o3 != 0 or o4 != 0:
            return True
    if o1 == 0 and on_segment(c, a, b):
        return True
    if o2 == 0 and on_segment(d, a, b):
        return True
    if o3 == 0 and on_segment(a, c, d):
        return True
    if o4 == 0 and on_segment(b, c, d):
        return True
    return False


def proper_crossing(a: Point, b: Point, c: Point, d: Point) -> bool:
    """True if the open segments ab and cd cross at a single interior point."""
    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    return o1 * o2 < 0 and o3 * o4 < 0


def line_intersection(a: Point, b: Point, c: Point, d: Point) -> Optional[Point]:
    """Intersection of the (infinite) lines ab and cd, None when parallel."""
    r0, r1 = b[0] - a[0], b[1] - a[1]
    s0, s1 = d[0] - c[0], d[1] - c[1]
    den = r0 * s1 - r1 * s0
    if den == 0:
        return None
    t = ((c[0] - a[0]) * s1 - (c[1] - a[1]) * s0) / den
    return (a[0] + t * r0, a[1] + t * r1)


def segment_params(a: Point, b: Point, c: Point, d: Point) -> Optional[Tuple[Rational, Rational]]:
    """Parameters (t, u) with a + t(b-a) = c + u(d-c); None for parallel lines."""
    r0, r1 = b[0] - a[0], b[1] - a[1]
    s0, s1 = d[0] - c[0], d[1] - c[1]
    den = r0 * s1 - r1 * s0
    if den == 0:
        return None
    qx, qy = c[0] - a[0], c[1] - a[1]
    return (qx * s1 - qy * s0) / den, (qx * r1 - qy * r0) / den


def point_in_polygon(p: Point, vertices: Sequence[Point]) -> int:
    """Classify p against a simple polygon: INSIDE, BOUNDARY or OUTSIDE."""
    n = len(vertices)
    x, y = p
    inside = False
    for i in range(n):
        a = vertices[i]
        b = vertices[(i + 1) % n]
        if on_segment(p, a, b):
            return BOUNDARY
        # half-open rule on y avoids double counting vertices
        if (a[1] > y) != (b[1] > y):
            # x-coordinate of the crossing compared exactly
            lhs = (x - a[0]) * (b[1] - a[1])
            rhs = (b[0] - a[0]) * (y - a[1])
            if b[1] > a[1]:
                if lhs < rhs:
                    inside = not inside
            else:
                if lhs > rhs:
                    inside = not inside
    return INSIDE if inside else OUTSIDE


def point_in_convex(p: Point, vertices: Sequence[Point]) -> int:
    """Classification against a CCW convex polygon."""
    n = len(vertices)
    on_edge = False
    for i in range(n):
        o = orient(vertices[i], vertices[(i + 1) % n], p)
        if o < 0:
            return OUTSIDE
        if o == 0:
            on_edge = True
    return BOUNDARY if on_edge else INSIDE


def segment_in_polygon(p: Point, q: Point, vertices: Sequence[Point]) -> bool:
    """True if the closed segment pq lies in the closed simple polygon.

    The segment is cut at every contact with the boundary; each piece is
    then either entirely inside or entirely outside, so testing piece
    midpoints decides the question.
    """
    if point_in_polygon(p, vertices) == OUTSIDE or point_in_polygon(q, vertices) == OUTSIDE:
        return False
    if p == q:
        return True
    n = len(vertices)
    one = ONE
    ts = set()
    dx, dy = q[0] - p[0], q[1] - p[1]
    dd = dx * dx + dy * dy
    for i in range(n):
        a = vertices[i]
        b = vertices[(i + 1) % n]
        if proper_crossing(p, q, a, b):
            return False
        for v in (a, b):
            if on_segment(v, p, q):
                ts.add(((v[0] - p[0]) * dx + (v[1] - p[1]) * dy) / dd)
        prm = segment_params(p, q, a, b)
        if prm is not None:
            t, u = prm
            if 0 <= t <= one and 0 <= u <= one:
                ts.add(t)
    ts.discard(0)
    ts.discard(one)
    cuts = [ZERO] + sorted(ts) + [one]
    for t0, t1 in zip(cuts, cuts[1:]):
        tm = (t0 + t1) / 2
        m = (p[0] + tm * dx, p[1] + tm * dy)
        if point_in_polygon(m, vertices) == OUTSIDE:
            return False
    return True


def signed_area2(vertices: Sequence[Point]) -> Rational:
    """Twice the signed area (Shoelace), positive for CCW."""
    n = len(vertices)
    s = 0
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return s


def half_of(v: Point) -> int:
    """0 for directions in [0, pi), 1 for [pi, 2pi); used for angular sorting."""
    return 0 if (v[1] > 0 or (v[1] == 0 and v[0] > 0)) else 1


def angle_less(u: Point, v: Point) -> bool:
    """Strict CCW angular order of direction vectors starting at angle 0."""
    hu, hv = half_of(u), half_of(v)
    if hu != hv:
        return hu < hv
    return u[0] * v[1] - u[1] * v[0] > 0


def angle_key_cmp(u: Point, v: Point) -> int:
    if angle_less(u, v):
        return -1
    if angle_less(v, u):
        return 1
    return 0


def split_convex(vertices: Sequence[Point], a: Point, b: Point) -> Tuple[List[Point], List[Point]]:
    """Split a CCW convex polygon by the line ab into (left, right) pieces.

    Pieces of zero area come back as empty lists.
    """
    left: List[Point] = []
    right: List[Point] = []
    n = len(vertices)
    sides = [orient(a, b, v) for v in vertices]
    for i in range(n):
        p, s = vertices[i], sides[i]
        q, t = vertices[(i + 1) % n], sides[(i + 1) % n]
        if s >= 0:
            left.append(p)
        if s <= 0:
            right.append(p)
        if s * t < 0:
            x = line_intersection(p, q, a, b)
            left.append(x)
            right.append(x)
    if len(left) < 3 or signed_area2(left) == 0:
        left = []
    if len(right) < 3 or signed_area2(right) == 0:
        right = []
    return left, right


def clip_segment_convex(
    a: Point, b: Point, vertices: Sequence[Point]
) -> Optional[Tuple[Rational, Rational]]:
    """Parameter interval [t0, t1] of segment ab inside a closed CCW convex polygon."""
    t0, t1 = ZERO, ONE
    dx, dy = b[0] - a[0], b[1] - a[1]
    n = len(vertices)
    for i in range(n):
        p = vertices[i]
        q = vertices[(i + 1) % n]
        ex, ey = q[0] - p[0], q[1] - p[1]
        # inside iff cross(e, x - p) >= 0
        num = ex * (a[1] - p[1]) - ey * (a[0] - p[0])
        den = ex * dy - ey * dx
        if den == 0:
            if num < 0:
                return None
            continue
        t = -num / den
        if den > 0:
            if t > t0:
                t0 = t
        else:
            if t < t1:
                t1 = t
        if t0 > t1:
            return None
    return t0, t1


def segment_crosses_convex_interior(a: Point, b: Point, vertices: Sequence[Point]) -> bool:
    """True if segment ab meets the interior of a CCW convex polygon."""
    iv = clip_segment_convex(a, b, vertices)
    if iv is None:
        return False
    t0, t1 = iv
    if t0 >= t1:
        return False
    tm = (t0 + t1) / 2
    m = (a[0] + tm * (b[0] - a[0]), a[1] + tm * (b[1] - a[1]))
    return point_in_convex(m, vertices) == INSIDE
