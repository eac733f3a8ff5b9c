"""Point guards in a simple polygon H as a range space.

Points and ranges are both points of H; the range of r is its visibility
region V(r), and w0 is area.  Visibility is symmetric, so the ranges
containing a point p are exactly those named by points of V(p).  The
solver state therefore lives on the cells of the overlay of V(p) for the
points p met so far: a cell's hit count is the number of chosen points
whose visibility region contains it.

The default oracle keeps every point it has ever produced (the pool) and
first tries the best pool point, which is an exact argmax over the pool
computed from cell weights.  A pool point is accepted only if its score
is at least (1 - omega)·Φ/n, the amount the potential analysis needs
with n the Opt bound; otherwise, and whenever the weight distribution
has drifted, a fresh sampling oracle call adds a new point to the pool.
"""

from __future__ import annotations

import math
import random
from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .core import FractionalSolution, RangeSpaceInstance
from .geometry.overlay import CellComplex, interior_point, overlay, sample_point_in_cell
from .geometry.polygon import GeometryError, Polygon
from .geometry.predicates import OUTSIDE, point_in_convex, point_in_polygon, segment_in_polygon
from .geometry.rational import Q, Point
from .geometry.visibility import visibility_polygon
from .oracle import OracleConfig, WeightSampler

GAMMA = 14
VC_DIM = 14


def comb_polygon(k: int, h: int = 3) -> Polygon:
    """k teeth of width 1 and height h on a corridor of height 1; needs k guards."""
    if k < 1:
        raise ValueError("comb needs at least one tooth")
    top = 1 + h
    pts = [(0, 0), (2 * k - 1, 0), (2 * k - 1, top), (2 * k - 2, top)]
    for i in range(k - 2, -1, -1):
        pts += [(2 * i + 2, 1), (2 * i + 1, 1), (2 * i + 1, top), (2 * i, top)]
    return Polygon.from_vertices(pts)


def comb_guards(k: int) -> List[Point]:
    """One guard at the foot of each tooth."""
    return [(Q(4 * i + 1, 2), Q(0)) for i in range(k)]


def _pt(p) -> Point:
    return (Q(p[0]), Q(p[1]))


def gallery_membership(H: Polygon, q, r) -> bool:
    """q sees r: the closed segment qr lies in H (touching the boundary is fine)."""
    q, r = _pt(q), _pt(r)
    for p in (q, r):
        if point_in_polygon(p, H.vertices) == OUTSIDE:
            raise GeometryError(f"point {p} lies outside the polygon")
    return segment_in_polygon(q, r, H.vertices)


class GalleryInstance(RangeSpaceInstance):
    """Art-gallery range space on a simple polygon."""

    growth_exponent = float(GAMMA)
    vc_dim_hint = VC_DIM
    dual_dim_hint = VC_DIM

    def __init__(self, polygon: Polygon, opt_upper: Optional[int] = None, delta0_floor: float = 1e-6):
        self.polygon = polygon
        self._opt = opt_upper
        self.delta0_floor = delta0_floor
        self._vis: Dict[Point, Polygon] = {}
        self._arr: "OrderedDict[tuple, CellComplex]" = OrderedDict()

    @property
    def opt_upper_bound(self) -> int:
        return int(self._opt) if self._opt is not None else len(self.polygon)

    @property
    def area(self):
        return self.polygon.area

    def visibility(self, p) -> Polygon:
        p = _pt(p)
        v = self._vis.get(p)
        if v is None:
            v = visibility_polygon(self.polygon, p)
            self._vis[p] = v
        return v

    def arrangement(self, points: Sequence) -> CellComplex:
        key = tuple(_pt(p) for p in points)
        cx = self._arr.get(key)
        if cx is None:
            cx = overlay(self.polygon, [self.visibility(p) for p in key])
            self._arr[key] = cx
            while len(self._arr) > 4:
                self._arr.popitem(last=False)
        else:
            self._arr.move_to_end(key)
        return cx

    # contract -------------------------------------------------------------

    def membership(self, point, range_id) -> bool:
        return gallery_membership(self.polygon, point, range_id)

    def subsystem(self, points: Sequence) -> List:
        seen = {}
        for lab in self.arrangement(points).labels:
            seen.setdefault(lab, None)
        return list(seen)

    def base_measure(self, ranges=None) -> float:
        if ranges is None:
            return float(self.polygon.area)
        if isinstance(ranges, Polygon):
            return float(ranges.area)
        raise TypeError("gallery ranges are measured as regions (a Polygon) or None")

    def range_classes(self, points: Sequence):
        cx = self.arrangement(points)
        for cell, lab, area in zip(cx.cells, cx.labels, cx.areas):
            yield lab, float(area), interior_point(cell)

    def net_candidates(self, measure) -> List:
        return list(measure.points)

    def delta0_estimate(self) -> float:
        return self.delta0_floor

    def dual_argmax(self, sample: Sequence, pool: Sequence = (), grid_bits: int = 8):
        """Deepest cell of the sampled points' visibility arrangement.

        Ties go to the lexicographically smallest label.  The witness is a
        pool point inside the (closed) cell if there is one, else a
        grid-snapped interior point.
        """
        cx = overlay(self.polygon, [self.visibility(r) for r in sample])
        depth = max(len(l) for l in cx.labels)
        best = min((i for i, l in enumerate(cx.labels) if len(l) == depth),
                   key=lambda i: tuple(sorted(cx.labels[i])))
        cell = cx.cells[best]
        for p in pool:
            if point_in_convex(p, cell) != OUTSIDE:
                return p, depth
        return interior_point(cell, grid=1 << grid_bits), depth

    def sample_depths(self, sampled_ranges: Sequence, points: Sequence) -> np.ndarray:
        """For each q, how many sampled ranges V(r) contain it."""
        return np.array([sum(self.membership(q, r) for r in sampled_ranges) for q in points], float)

    def exact_depths(self, points: Sequence, weights=None) -> np.ndarray:
        """w(R[q]) / w(R) for each q.

        ``weights`` is None for the area measure, or a GalleryEngine whose
        current cell weights are used (each q joins that engine's pool).
        """
        if weights is None:
            A = self.polygon.area
            return np.array([float(self.visibility(q).area / A) for q in points])
        gids = [weights.register(q) for q in points]
        scores, _ = weights.pool_scores()
        return scores[gids]

    def mwu_engine(self, schedule, **options) -> "GalleryEngine":
        return GalleryEngine(self, schedule, **options)

    def tracker(self, T: int, eps: float = 0.25) -> "GalleryEngine":
        """A bare engine with saturation threshold T, for manual updates."""
        from .mwu import ScheduleParams

        s = ScheduleParams(eps, 0.05, 0.25, self.growth_exponent, self.opt_upper_bound,
                           int(T), 0.0, 0, 0.0, 0.0)
        return GalleryEngine(self, s)


def coverage_fraction(H: Polygon, guards: Sequence, instance: Optional[GalleryInstance] = None):
    """Exact area(∪ V(g)) / area(H) as a rational."""
    if not guards:
        return Q(0)
    inst = instance or GalleryInstance(H)
    cx = overlay(H, [inst.visibility(g) for g in guards])
    covered = sum((a for a, l in zip(cx.areas, cx.labels) if l), Q(0))
    return covered / H.area


class GalleryEngine:
    """Solver state on the cell complex of the pool points' visibility regions."""

    def __init__(self, instance: GalleryInstance, schedule, *, oracle_config: Optional[OracleConfig] = None,
                 grid_bits: int = 8, tv_threshold: float = 0.25, refresh_every: int = 25000,
                 batch: int = 8192, fresh_retries: int = 4):
        self.instance = instance
        self.schedule = schedule
        omega = schedule.omega if schedule.omega > 0 else 0.25
        self.config = oracle_config or OracleConfig(omega=omega, sigma=0.1, sample_size_override=48)
        self.grid_bits = grid_bits
        self.tv_threshold = tv_threshold
        self.refresh_every = refresh_every
        self.batch = batch
        self.fresh_retries = fresh_retries
        self.cx = CellComplex.from_master(instance.polygon)
        self.gens: List[Point] = []
        self.gid: Dict[Point, int] = {}
        self.mult = np.zeros(0, np.int64)
        self.lq = math.log1p(-schedule.eps)
        self.t = 0
        self.total_measure = float(instance.polygon.area)
        self.fresh_calls = 0
        self.forced_steps = 0
        self._rebuild()

    # bookkeeping ------------------------------------------------------------

    def _rebuild(self) -> None:
        cx = self.cx
        G = len(self.gens)
        self.area = np.array([float(a) for a in cx.areas])
        lists: List[List[int]] = [[] for _ in range(G)]
        for c, lab in enumerate(cx.labels):
            for g in lab:
                lists[g].append(c)
        self.indptr = np.zeros(G + 1, np.int64)
        self.indptr[1:] = np.cumsum([len(x) for x in lists]) if G else []
        self.cells_of = np.array([c for x in lists for c in x], np.int64)
        self.deg = np.zeros(len(cx.cells), np.int64)
        for g in range(G):
            if self.mult[g]:
                self.deg[self.cells_of[self.indptr[g]:self.indptr[g + 1]]] += self.mult[g]

    def register(self, p) -> int:
        p = _pt(p)
        g = self.gid.get(p)
        if g is not None:
            return g
        if point_in_polygon(p, self.instance.polygon.vertices) == OUTSIDE:
            raise GeometryError(f"point {p} lies outside the polygon")
        self.cx.add_generator(self.instance.visibility(p))
        g = len(self.gens)
        self.gens.append(p)
        self.gid[p] = g
        self.mult = np.append(self.mult, 0)
        self._rebuild()
        return g

    prepare = register

    def key(self, p) -> Point:
        return _pt(p)

    def members(self, g: int) -> np.ndarray:
        return self.cells_of[self.indptr[g]:self.indptr[g + 1]]

    def apply(self, p) -> None:
        g = self.register(p)
        self.mult[g] += 1
        self.deg[self.members(g)] += 1
        self.t += 1

    @property
    def active_mask(self) -> np.ndarray:
        return self.deg < self.schedule.T

    @property
    def active_measure(self) -> float:
        return float(self.area[self.active_mask].sum())

    def exact_active_measure(self):
        return sum((a for a, d in zip(self.cx.areas, self.deg) if d < self.schedule.T), Q(0))

    def log_weights(self) -> np.ndarray:
        return np.where(self.active_mask, self.deg * self.lq + np.log(self.area), -np.inf)

    def relative_weights(self) -> np.ndarray:
        """Per-cell weight·area, scaled so the largest is 1."""
        lw = self.log_weights()
        if not np.isfinite(lw).any():
            return np.zeros_like(lw)
        return np.exp(lw - lw.max())

    def state(self):
        from .mwu import SolverState

        def member_fn(p):
            mask = np.zeros(len(self.cx.cells), bool)
            mask[self.members(self.register(p))] = True
            return mask

        return SolverState(self.t, [], self.deg.copy(), self.log_weights(), self.active_measure,
                           self.schedule.eps, self.schedule.T, member_fn=member_fn)

    def pool_scores(self) -> Tuple[np.ndarray, float]:
        """(ξ/Φ for every pool point, Φ in relative units)."""
        w = self.relative_weights()
        phi = float(w.sum())
        G = len(self.gens)
        sc = np.zeros(G)
        for g in range(G):
            sc[g] = w[self.members(g)].sum()
        return (sc / phi if phi > 0 else sc), phi

    def _dist(self) -> np.ndarray:
        w = self.relative_weights()
        s = w.sum()
        return w / s if s > 0 else w

    # oracle -------------------------------------------------------------------

    def weight_sampler(self) -> WeightSampler:
        w = self.relative_weights()
        total = float(w.sum())
        probs = w / total
        cells = self.cx.cells
        gb = self.grid_bits

        def draw(rng: np.random.Generator, n: int):
            pyrng = random.Random(int(rng.integers(2**63)))
            idx = rng.choice(len(cells), size=n, p=probs)
            return [sample_point_in_cell(cells[c], pyrng, grid_bits=gb) for c in idx]

        return WeightSampler(draw, total)

    def fresh(self, rng: np.random.Generator) -> Point:
        """One sampling-oracle call; its witness joins the pool."""
        from .oracle import sample_size_for

        n = sample_size_for(self.instance, self.config)
        sample = self.weight_sampler()(rng, n)
        p, _depth = self.instance.dual_argmax(sample, pool=self.gens, grid_bits=self.grid_bits)
        self.fresh_calls += 1
        self.register(p)
        return p

    # driver ---------------------------------------------------------------------

    def run(self, max_oracle=None, rng_seed=0, debug_invariants=False, opt_reference=None):
        from . import mwu

        s = self.schedule
        opt_reference = opt_reference or s.opt_upper
        if max_oracle is not None:
            rng = np.random.default_rng(rng_seed)
            return mwu.generic_loop(self, max_oracle, rng, s, debug_invariants, opt_reference)
        return self._run_pooled(rng_seed, debug_invariants, opt_reference)

    def _run_pooled(self, rng_seed, debug_invariants, opt_reference):
        from . import mwu

        s = self.schedule
        rng = np.random.default_rng(rng_seed)
        stop = s.delta * self.total_measure
        omega = s.omega if s.omega > 0 else self.config.omega
        hard = (1 - omega) / s.opt_upper
        log_phi0 = math.log(self.total_measure)
        parts = {"chosen": [], "ratio": [], "log_phi": [], "act": []}
        rep = mwu.InvariantReport(checked=debug_invariants)
        self.fresh(rng)
        ref = self._dist()
        since = 0
        while True:
            deg0 = self.deg.copy()
            room = max(1, min(self.batch, self.refresh_every - since))
            steps, status, ch, ra, lp, ac = kernels.pool_batch(
                self.indptr, self.cells_of, self.area, self.deg, self.mult, s.T, s.eps, stop,
                self.t, s.t_max, hard, self.tv_threshold, ref, room)
            self._record(parts, ch, ra, lp, ac)
            if debug_invariants and steps:
                self._replay(deg0, ch, ra, lp, log_phi0, opt_reference, rep)
            self.t += steps
            since += steps
            if status == kernels.DONE:
                break
            if status == kernels.OVER_TMAX:
                raise mwu.IterationBoundExceeded(s.t_max, self._trace(parts))
            if status == kernels.BATCH_FULL and since < self.refresh_every:
                continue
            if status == kernels.NEED_BETTER:
                ok = False
                for _ in range(self.fresh_retries):
                    self.fresh(rng)
                    if self.pool_scores()[0].max() >= hard:
                        ok = True
                        break
                if not ok:
                    # no candidate meets the bound: take the best one anyway, once
                    deg0 = self.deg.copy()
                    steps, status, ch, ra, lp, ac = kernels.pool_batch(
                        self.indptr, self.cells_of, self.area, self.deg, self.mult, s.T, s.eps,
                        stop, self.t, s.t_max, 0.0, 0.0, ref, 1)
                    self._record(parts, ch, ra, lp, ac)
                    if debug_invariants and steps:
                        self._replay(deg0, ch, ra, lp, log_phi0, opt_reference, rep)
                    self.t += steps
                    self.forced_steps += steps
            else:
                self.fresh(rng)
            ref = self._dist()
            since = 0
        chosen = np.concatenate(parts["chosen"]) if parts["chosen"] else np.zeros(0, np.int64)
        sol = FractionalSolution.from_multiset([self.gens[int(c)] for c in chosen], s.T)
        res = mwu.MWUResult(sol, self._trace(parts), s, self.t, self.active_measure,
                            self.total_measure, rep)
        res.extras.update(fresh_calls=self.fresh_calls, forced_steps=self.forced_steps,
                          pool_size=len(self.gens), cells=len(self.cx.cells))
        return res

    @staticmethod
    def _record(parts, ch, ra, lp, ac):
        parts["chosen"].append(ch.copy())
        parts["ratio"].append(ra.copy())
        parts["log_phi"].append(lp.copy())
        parts["act"].append(ac.copy())

    def _trace(self, parts):
        from .mwu import TraceArrays

        cat = lambda k, dt: np.concatenate(parts[k]) if parts[k] else np.zeros(0, dt)
        return TraceArrays(cat("chosen", np.int64), cat("ratio", float), cat("log_phi", float),
                           cat("act", float), points=self.gens)

    def _replay(self, deg0, ch, ra, lp, log_phi0, opt_reference, rep):
        """Recompute Φ and ξ/Φ from hit counts for a batch; check both bounds."""
        from . import mwu

        s = self.schedule
        T, eps = s.T, s.eps
        la = np.log(self.area)
        G = len(self.gens)
        M = np.zeros((G, len(self.area)), np.int64)
        for g in range(G):
            M[g, self.members(g)] = 1
        deg = deg0.copy()
        prev = None
        for j, g in enumerate(ch):
            lw = np.where(deg < T, deg * self.lq + la, -np.inf)
            lphi = mwu._logsumexp(lw)
            ratio = math.exp(mwu._logsumexp(lw[M[g] == 1]) - lphi) if lphi > -math.inf else 0.0
            t = self.t + j
            if abs(lphi - lp[j]) > 1e-9 * max(1.0, abs(lphi)) or abs(ratio - ra[j]) > 1e-9:
                rep.step_violations += 1
                rep.first_violation = t if rep.first_violation is None else rep.first_violation
            if prev is not None and not mwu.potential_step_ok(prev[0], prev[1], lphi, eps):
                rep.step_violations += 1
                rep.first_violation = t if rep.first_violation is None else rep.first_violation
            if not mwu.cumulative_bound_ok(lphi, log_phi0, t, eps, s.omega, opt_reference):
                rep.cumulative_violations += 1
                rep.first_violation = t if rep.first_violation is None else rep.first_violation
            prev = (lphi, ratio)
            deg = deg + M[g]
        lw = np.where(deg < T, deg * self.lq + la, -np.inf)
        after = mwu._logsumexp(lw)
        if not mwu.potential_step_ok(prev[0], prev[1], after, eps):
            rep.step_violations += 1
        if not mwu.cumulative_bound_ok(after, log_phi0, self.t + len(ch), eps, s.omega, opt_reference):
            rep.cumulative_violations += 1


def gallery_weight_oracle(engine: GalleryEngine, eps: Optional[float] = None):
    """Cell weight as a function of the cell label: (1-eps)**deg, 0 once deg >= T."""
    eps = engine.schedule.eps if eps is None else eps
    T = engine.schedule.T

    def weight(label) -> float:
        d = int(sum(engine.mult[g] for g in label))
        return 0.0 if d >= T else (1 - eps) ** d

    return weight


def update_on_chosen_point(engine: GalleryEngine, p) -> object:
    """Add p to the chosen multiset and return the exact active area."""
    engine.apply(p)
    return engine.exact_active_measure()


@dataclass
class GalleryRun:
    fractional: object  # MWUResult
    guards: List[Point]
    coverage: object  # exact rational
    feasible_fraction: float


def solve_gallery(instance: GalleryInstance, schedule, rng_seed=0, *, net_c: float = 4.0,
                  debug_invariants: bool = False, opt_reference=None, **engine_options) -> GalleryRun:
    """Fractional guarding by MWU, then rounding the measure to a guard set."""
    from .core import check_feasibility
    from .mwu import solve_fractional
    from .nets import round_to_hitting_set

    res = solve_fractional(instance, schedule, rng_seed=rng_seed, debug_invariants=debug_invariants,
                           opt_reference=opt_reference, **engine_options)
    guards = round_to_hitting_set(res.solution, instance, instance.vc_dim_hint, rng_seed, c_net=net_c)
    guards = sorted(guards)
    feas = check_feasibility(res.solution, instance)
    cov = coverage_fraction(instance.polygon, guards, instance)
    return GalleryRun(res, guards, cov, feas.feasible_mass_fraction)


__all__ = [
    "GAMMA",
    "GalleryRun",
    "GalleryEngine",
    "GalleryInstance",
    "comb_guards",
    "comb_polygon",
    "coverage_fraction",
    "gallery_membership",
    "gallery_weight_oracle",
    "solve_gallery",
    "update_on_chosen_point",
]
