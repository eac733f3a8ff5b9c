"""Overlay of generator polygons inside a master polygon.

The master is first cut into convex pieces.  Each generator is then added
by splitting every cell its boundary edges pass through, using the
supporting line of each crossing edge; once no generator edge crosses a
piece, the piece is entirely inside or entirely outside the generator and
one interior point decides its label.  Cells stay convex throughout.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .polygon import GeometryError, Polygon, convex_decomposition
from .predicates import (
    INSIDE,
    OUTSIDE,
    point_in_convex,
    point_in_polygon,
    segment_crosses_convex_interior,
    signed_area2,
    split_convex,
)
from .rational import Q, Point, Rational


def _bbox(vertices) -> Tuple[float, float, float, float]:
    xs = [float(v[0]) for v in vertices]
    ys = [float(v[1]) for v in vertices]
    return min(xs), min(ys), max(xs), max(ys)


def _bbox_overlap(a, b) -> bool:
    # float boxes padded a little; only used to skip exact work, never to decide
    pad = 1e-9 * (1.0 + max(abs(x) for x in a + b))
    return not (a[2] + pad < b[0] or b[2] + pad < a[0] or a[3] + pad < b[1] or b[3] + pad < a[1])


def interior_point(cell: Sequence[Point], grid: int = 0) -> Point:
    """A point strictly inside a convex CCW cell.

    The default is the centroid of the first fan triangle.  With ``grid > 0``
    we look for a nearby point whose coordinates have denominator ``grid``
    (smaller numbers for later exact work) and keep it only if it is still
    strictly interior.
    """
    if len(cell) < 3:
        raise GeometryError("interior point of a degenerate cell")
    a, b, c = cell[0], cell[1], cell[2]
    k = 2
    while signed_area2((a, b, c)) == 0:
        k += 1
        if k >= len(cell):
            raise GeometryError("interior point of a zero-area cell")
        c = cell[k]
    cen = ((a[0] + b[0] + c[0]) / 3, (a[1] + b[1] + c[1]) / 3)
    if grid > 0:
        g = Q(grid)
        snap = (Q(round(cen[0] * g), grid), Q(round(cen[1] * g), grid))
        if point_in_convex(snap, cell) == INSIDE:
            return snap
    return cen


@dataclass
class CellComplex:
    """Convex cells partitioning a master polygon, each labelled by the
    set of generator ids whose polygon contains it."""

    master: Polygon
    cells: List[List[Point]]
    labels: List[FrozenSet[int]]
    areas: List[Rational]
    generators: List[Polygon] = field(default_factory=list)
    _boxes: List[Tuple[float, float, float, float]] = field(default_factory=list, repr=False)
    _adjacency: Optional[List[List[int]]] = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.cells)

    @classmethod
    def from_master(cls, master: Polygon) -> "CellComplex":
        cells = convex_decomposition(master)
        return cls(
            master=master,
            cells=cells,
            labels=[frozenset()] * len(cells),
            areas=[signed_area2(c) / 2 for c in cells],
            generators=[],
            _boxes=[_bbox(c) for c in cells],
        )

    def total_area(self) -> Rational:
        return sum(self.areas, Q(0))

    def add_generator(self, gen: Polygon) -> int:
        """Refine the complex by one more generator; returns its id."""
        gid = len(self.generators)
        self.generators.append(gen)
        gverts = gen.vertices
        gbox = _bbox(gverts)
        gedges = gen.edges()
        eboxes = [_bbox(e) for e in gedges]
        new_cells: List[List[Point]] = []
        new_labels: List[FrozenSet[int]] = []
        new_areas: List[Rational] = []
        new_boxes = []
        for cell, lab, area, box in zip(self.cells, self.labels, self.areas, self._boxes):
            if not _bbox_overlap(box, gbox):
                new_cells.append(cell)
                new_labels.append(lab)
                new_areas.append(area)
                new_boxes.append(box)
                continue
            pieces = [cell]
            for (a, b), ebox in zip(gedges, eboxes):
                if not _bbox_overlap(box, ebox):
                    continue
                nxt = []
                for pc in pieces:
                    if segment_crosses_convex_interior(a, b, pc):
                        left, right = split_convex(pc, a, b)
                        if left:
                            nxt.append(left)
                        if right:
                            nxt.append(right)
                    else:
                        nxt.append(pc)
                pieces = nxt
            for pc in pieces:
                ip = interior_point(pc)
                inside = point_in_polygon(ip, gverts) != OUTSIDE
                new_cells.append(pc)
                new_labels.append(lab | {gid} if inside else lab)
                new_areas.append(area if len(pieces) == 1 else signed_area2(pc) / 2)
                new_boxes.append(box if len(pieces) == 1 else _bbox(pc))
        self.cells, self.labels, self.areas, self._boxes = new_cells, new_labels, new_areas, new_boxes
        self._adjacency = None
        return gid

    def locate(self, p: Point) -> int:
        """Index of a cell whose closure contains p (first in cell order)."""
        px, py = float(p[0]), float(p[1])
        for i, (cell, box) in enumerate(zip(self.cells, self._boxes)):
            if box[0] - 1e-9 <= px <= box[2] + 1e-9 and box[1] - 1e-9 <= py <= box[3] + 1e-9:
                if point_in_convex(p, cell) != OUTSIDE:
                    return i
        raise GeometryError(f"point {p} is not in the complex")

    def adjacency(self) -> List[List[int]]:
        """Cells sharing a boundary piece of positive length."""
        if self._adjacency is not None:
            return self._adjacency
        n = len(self.cells)
        adj: List[List[int]] = [[] for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                if _bbox_overlap(self._boxes[i], self._boxes[j]) and _share_edge(self.cells[i], self.cells[j]):
                    adj[i].append(j)
                    adj[j].append(i)
        self._adjacency = adj
        return adj

    def depth(self, i: int) -> int:
        return len(self.labels[i])


def _share_edge(c1: Sequence[Point], c2: Sequence[Point]) -> bool:
    from .predicates import cross

    n1, n2 = len(c1), len(c2)
    for i in range(n1):
        a, b = c1[i], c1[(i + 1) % n1]
        for j in range(n2):
            c, d = c2[j], c2[(j + 1) % n2]
            if cross(a, b, c) != 0 or cross(a, b, d) != 0:
                continue
            # collinear: project on the dominant axis and test overlap length
            k = 0 if a[0] != b[0] else 1
            lo1, hi1 = sorted((a[k], b[k]))
            lo2, hi2 = sorted((c[k], d[k]))
            if min(hi1, hi2) > max(lo1, lo2):
                return True
    return False


def overlay(master: Polygon, generators: Iterable[Polygon]) -> CellComplex:
    """Subdivide ``master`` by the generators; cell order is deterministic."""
    cx = CellComplex.from_master(master)
    for g in generators:
        if not isinstance(g, Polygon):
            raise GeometryError("generators must be Polygon objects")
        cx.add_generator(g)
    return cx


def subsystem_traces(complex: CellComplex) -> List[FrozenSet[int]]:
    """Distinct cell labels, in order of first appearance."""
    seen = set()
    out = []
    for lab in complex.labels:
        if lab not in seen:
            seen.add(lab)
            out.append(lab)
    return out


def weighted_area(complex: CellComplex, cell_weight_fn: Callable[[FrozenSet[int]], object]):
    """Sum over cells of weight(label) * area(cell)."""
    total = 0
    for lab, area in zip(complex.labels, complex.areas):
        w = cell_weight_fn(lab)
        if w:
            total = total + w * (area if not isinstance(w, float) else float(area))
    return total


def _sample_in_triangle(a: Point, b: Point, c: Point, rng: random.Random, bits: int) -> Point:
    den = 1 << bits
    u = Q(rng.getrandbits(bits), den)
    v = Q(rng.getrandbits(bits), den)
    if u + v > 1:
        u, v = 1 - u, 1 - v
    return (
        a[0] + u * (b[0] - a[0]) + v * (c[0] - a[0]),
        a[1] + u * (b[1] - a[1]) + v * (c[1] - a[1]),
    )


def sample_point_in_complex(
    complex: CellComplex,
    cell_weight_fn: Callable[[FrozenSet[int]], float],
    rng_seed=None,
    *,
    rng: Optional[random.Random] = None,
    bits: int = 24,
    grid_bits: Optional[int] = None,
) -> Point:
    """Draw a cell with probability proportional to weight * area, then a
    (grid-discretised) uniform point inside it.

    ``grid_bits`` optionally rounds the point to the absolute grid
    2**-grid_bits (refined if rounding would leave the cell), which keeps
    coordinate bit lengths small in later exact computations.
    """
    if rng is None:
        rng = random.Random(rng_seed)
    ws = [float(cell_weight_fn(lab)) * float(a) for lab, a in zip(complex.labels, complex.areas)]
    total = sum(ws)
    if not total > 0:
        raise GeometryError("zero total weight: nothing to sample")
    idx = rng.choices(range(len(ws)), weights=ws, k=1)[0]
    return sample_point_in_cell(complex.cells[idx], rng, bits, grid_bits)


def snap_to_grid(p: Point, cell: Sequence[Point], grid_bits: int, tries: int = 4) -> Point:
    """Round p to a dyadic grid, refining until the result is strictly inside cell."""
    g = grid_bits
    for _ in range(tries):
        den = 1 << g
        s = (Q(round(p[0] * den), den), Q(round(p[1] * den), den))
        if point_in_convex(s, cell) == INSIDE:
            return s
        g += 4
    return p


def sample_point_in_cell(
    cell: Sequence[Point], rng: random.Random, bits: int = 24, grid_bits: Optional[int] = None
) -> Point:
    """Uniform point (on a fine grid) inside a convex cell, fan triangulated."""
    tris = [(cell[0], cell[i], cell[i + 1]) for i in range(1, len(cell) - 1)]
    areas = [float(signed_area2(t)) for t in tris]
    t = rng.choices(range(len(tris)), weights=areas, k=1)[0]
    p = _sample_in_triangle(*tris[t], rng, bits)
    if grid_bits is not None:
        p = snap_to_grid(p, cell, grid_bits)
    return p


__all__ = [
    "CellComplex",
    "interior_point",
    "overlay",
    "sample_point_in_cell",
    "sample_point_in_complex",
    "snap_to_grid",
    "subsystem_traces",
    "weighted_area",
]
