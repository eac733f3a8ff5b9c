"""Explicit finite range spaces and their brute-force oracles.

Points are the integers 0..n-1 and ranges are sorted tuples of point
indices.  Text format::

    # comment
    points 5
    w 1.0 : 0 1 2
    w 2.5 : 3 4
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .core import RangeSpaceInstance, sauer_shelah_bound

BRUTE_FORCE_CAP = 24


class InstanceFormatError(ValueError):
    """Malformed instance file; the message carries the line number."""


def _growth_exponent(m: int, d: int) -> float:
    # smallest gamma with min(g(r, d), m) <= r**gamma for every r >= 2;
    # once the cap m is reached the ratio only decreases
    gamma = 1.0
    r = 2
    while m > 1:
        traces = min(sauer_shelah_bound(r, d), m)
        gamma = max(gamma, math.log(traces) / math.log(r))
        if traces >= m:
            break
        r += 1
    return gamma


@dataclass(frozen=True, eq=False)
class FiniteInstance(RangeSpaceInstance):
    """Finite range space given by incidence lists and positive range weights."""

    n_points: int
    ranges: Tuple[Tuple[int, ...], ...]
    weights: Tuple[float, ...]
    opt_upper: Optional[int] = None
    _inc: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n_points < 0:
            raise ValueError("number of points must be nonnegative")
        rs = tuple(tuple(sorted(set(int(i) for i in r))) for r in self.ranges)
        ws = tuple(float(w) for w in self.weights)
        if len(ws) != len(rs):
            raise ValueError("one weight per range required")
        for k, (r, w) in enumerate(zip(rs, ws)):
            if not r:
                raise ValueError(f"range {k} is empty")
            if r[0] < 0 or r[-1] >= self.n_points:
                raise ValueError(f"range {k} has a point index out of bounds")
            if not (w > 0 and math.isfinite(w)):
                raise ValueError(f"range {k} has non-positive weight {w}")
        object.__setattr__(self, "ranges", rs)
        object.__setattr__(self, "weights", ws)
        inc = np.zeros((len(rs), self.n_points), np.uint8)
        for k, r in enumerate(rs):
            inc[k, list(r)] = 1
        inc.setflags(write=False)
        object.__setattr__(self, "_inc", inc)

    # contract -------------------------------------------------------------

    @property
    def opt_upper_bound(self) -> int:
        if self.opt_upper is not None:
            return int(self.opt_upper)
        return max(1, min(self.n_points, len(self.ranges)))

    @property
    def vc_dim_hint(self) -> int:
        return max(1, int(math.floor(math.log2(max(len(self.ranges), 1)))))

    @property
    def dual_dim_hint(self) -> int:
        """VC-dimension bound of the dual space (points acting on ranges)."""
        return max(1, int(math.floor(math.log2(max(self.n_points, 1)))))

    @property
    def growth_exponent(self) -> float:
        return _growth_exponent(len(self.ranges), self.vc_dim_hint)

    @property
    def incidence(self) -> np.ndarray:
        """uint8 matrix, rows = ranges, columns = points."""
        return self._inc

    @property
    def points(self) -> List[int]:
        return list(range(self.n_points))

    @property
    def num_ranges(self) -> int:
        return len(self.ranges)

    def _check_range(self, range_id) -> int:
        if not isinstance(range_id, (int, np.integer)) or not 0 <= range_id < len(self.ranges):
            raise KeyError(f"unknown range id {range_id!r}")
        return int(range_id)

    def membership(self, point, range_id) -> bool:
        r = self._check_range(range_id)
        return bool(0 <= point < self.n_points and self._inc[r, point])

    def subsystem(self, points: Sequence[int]) -> List[FrozenSet[int]]:
        seen = {}
        for r in range(len(self.ranges)):
            tr = frozenset(i for i, p in enumerate(points) if self._inc[r, p])
            seen.setdefault(tr, None)
        return list(seen)

    def base_measure(self, ranges=None) -> float:
        if ranges is None:
            return math.fsum(self.weights)
        return math.fsum(self.weights[self._check_range(r)] for r in ranges)

    def range_classes(self, points: Sequence[int]):
        pts = list(points)
        for r in range(len(self.ranges)):
            tr = frozenset(i for i, p in enumerate(pts) if 0 <= p < self.n_points and self._inc[r, p])
            yield tr, self.weights[r], r

    def dual_argmax(self, sample) -> Tuple[int, int]:
        """Deepest dual class of a range sample and its smallest witness point.

        Ties in depth go to the lexicographically smallest set of sample
        positions, i.e. the class whose membership vector is largest when
        read from the first sample onwards.
        """
        sample = np.asarray(sample, dtype=np.int64)
        if self.n_points == 0:
            raise ValueError("empty ground set")
        counts = kernels.dual_counts(self._inc, sample)
        mx = int(counts.max())
        tied = np.flatnonzero(counts == mx)
        if tied.size == 1:
            return int(tied[0]), mx
        cols = np.packbits(self._inc[sample][:, tied].astype(bool), axis=0)
        best = max(range(tied.size), key=lambda j: (cols[:, j].tobytes(), -int(tied[j])))
        return int(tied[best]), mx

    def dual_argmax_counts(self, counts, rng) -> Tuple[int, int]:
        """dual_argmax for a sample given as per-range multiplicities.

        The ordered tie rule only looks at the first sampled range that
        splits the tied points.  In a uniformly shuffled sample that range
        is drawn with probability proportional to its count, so the rule is
        replayed by such draws and the result has the same distribution.
        """
        if self.n_points == 0:
            raise ValueError("empty ground set")
        counts = np.asarray(counts, dtype=np.int64)
        depth = counts @ self._inc.astype(np.int64)
        mx = int(depth.max())
        tied = np.flatnonzero(depth == mx)
        live = counts > 0
        while tied.size > 1:
            sub = self._inc[:, tied] != 0
            k = sub.sum(axis=1)
            split = live & (k > 0) & (k < tied.size)
            if not split.any():
                break
            c = counts * split
            r = int(rng.choice(c.size, p=c / c.sum()))
            tied = tied[sub[r]]
        return int(tied[0]), mx

    def net_candidates(self, measure=None) -> List[int]:
        return list(range(self.n_points))

    def delta0_estimate(self) -> float:
        return 1.0 / self.n_points if self.n_points else 1.0

    def mwu_engine(self, schedule, **options) -> "FiniteEngine":
        return FiniteEngine(self, schedule)

    def with_opt_upper(self, n: int) -> "FiniteInstance":
        return FiniteInstance(self.n_points, self.ranges, self.weights, int(n))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FiniteInstance)
            and self.n_points == other.n_points
            and self.ranges == other.ranges
            and self.weights == other.weights
        )

    def __hash__(self) -> int:
        return hash((self.n_points, self.ranges, self.weights))


class FiniteEngine:
    """Loop state for a finite instance: hit counts per range."""

    def __init__(self, instance: FiniteInstance, schedule):
        self.instance = instance
        self.schedule = schedule
        self.inc = instance.incidence.astype(bool)
        m = instance.num_ranges
        self.w0 = np.asarray(instance.weights, dtype=np.float64)
        self.lw0 = np.log(self.w0) if m else np.zeros(0)
        self.lq = math.log1p(-schedule.eps)
        self.hits = np.zeros(m, np.int64)
        self.t = 0
        self.total_measure = math.fsum(self.w0)

    @property
    def active(self) -> np.ndarray:
        return self.hits < self.schedule.T

    @property
    def active_measure(self) -> float:
        return math.fsum(self.w0[self.active])

    def key(self, p) -> int:
        return int(p)

    def log_weights(self) -> np.ndarray:
        return np.where(self.active, self.hits * self.lq + self.lw0, -np.inf)

    def relative_weights(self) -> np.ndarray:
        """Current weights scaled so the largest active one is 1."""
        lw = self.log_weights()
        if not np.isfinite(lw).any():
            return np.zeros_like(lw)
        return np.exp(lw - lw.max())

    def weight_sampler(self):
        from .oracle import WeightSampler

        w = self.relative_weights()
        total = float(w.sum())
        probs = w / total

        def draw(rng, n):
            return rng.choice(len(w), size=n, p=probs)

        def counts(rng, n):
            return rng.multinomial(n, probs)

        return WeightSampler(draw, total, counts)

    def state(self):
        from .mwu import SolverState

        return SolverState(self.t, [], self.hits.copy(), self.log_weights(), self.active_measure,
                           self.schedule.eps, self.schedule.T, member_fn=lambda p: self.inc[:, p])

    def apply(self, p) -> None:
        hit = self.inc[:, p] & self.active
        self.hits[hit] += 1
        self.t += 1

    def run(self, max_oracle=None, rng_seed=0, debug_invariants=False, opt_reference=None):
        from . import mwu
        from .oracle import exact_oracle

        s = self.schedule
        if max_oracle is None:
            return self._run_fast(debug_invariants, opt_reference)
        rng = np.random.default_rng(rng_seed)
        return mwu.generic_loop(self, max_oracle, rng, s, debug_invariants, opt_reference)

    def run_reference(self, rng_seed=0, debug_invariants=False, opt_reference=None):
        """The generic Python loop with the exact oracle (for cross-checks)."""
        from . import mwu
        from .oracle import exact_oracle

        rng = np.random.default_rng(rng_seed)
        return mwu.generic_loop(self, exact_oracle, rng, self.schedule, debug_invariants,
                                opt_reference or self.schedule.opt_upper)

    def _run_fast(self, debug_invariants, opt_reference):
        from . import mwu
        from .core import FractionalSolution

        s = self.schedule
        stop = s.delta * self.total_measure
        t, chosen, ratio, log_phi, act = kernels.mwu_finite(self.inc, self.w0, s.eps, s.T, stop, s.t_max)
        trace = mwu.TraceArrays(chosen, ratio, log_phi, act)
        if t < 0:
            raise mwu.IterationBoundExceeded(s.t_max, trace)
        self.hits = np.minimum(replay_hits(self.inc, chosen)[-1], s.T) if t else self.hits
        self.t = t
        rep = mwu.InvariantReport()
        if debug_invariants:
            rep = replay_check(self.inc, self.w0, s, chosen, log_phi, opt_reference or s.opt_upper)
        sol = FractionalSolution.from_multiset([int(c) for c in chosen], s.T)
        return mwu.MWUResult(sol, trace, s, t, float(act[t]), self.total_measure, rep)


def replay_hits(inc: np.ndarray, chosen: np.ndarray) -> np.ndarray:
    """Uncapped hit counts before every step and after the last: (t+1) x m."""
    steps = inc[:, chosen].T.astype(np.int64)
    out = np.zeros((len(chosen) + 1, inc.shape[0]), np.int64)
    np.cumsum(steps, axis=0, out=out[1:])
    return out


def replay_check(inc, w0, schedule, chosen, log_phi_logged, opt_reference):
    """Recompute Φ(t) from hit counts alone and test both potential bounds.

    Also compares the recomputed log Φ with what the kernel logged.
    """
    from . import mwu

    rep = mwu.InvariantReport(checked=True)
    T, eps = schedule.T, schedule.eps
    lq = math.log1p(-eps)
    H = replay_hits(inc, chosen)
    lw = np.where(H < T, H * lq + np.log(w0), -np.inf)
    mx = lw.max(axis=1)
    fin = np.isfinite(mx)
    safe_mx = np.where(fin, mx, 0.0)
    rel = np.exp(lw - safe_mx[:, None])
    phi = rel.sum(axis=1)
    with np.errstate(divide="ignore"):
        lphi = np.where(fin, safe_mx + np.log(np.where(fin, phi, 1.0)), -np.inf)
    # ξ/Φ for the point chosen at each step, from the same recomputed weights
    steps = len(chosen)
    xi = np.zeros(steps)
    if steps:
        hit = inc[:, chosen].T
        xi = np.where(fin[:steps], (rel[:steps] * hit).sum(axis=1) / np.where(fin[:steps], phi[:steps], 1.0), 0.0)
    log_phi0 = float(np.log(np.sum(w0)))

    def flag(t, kind):
        setattr(rep, kind, getattr(rep, kind) + 1)
        if rep.first_violation is None:
            rep.first_violation = t

    logged = np.asarray(log_phi_logged, dtype=np.float64)
    for t in range(steps + 1):
        ref = logged[t]
        if fin[t] and abs(lphi[t] - ref) > 1e-9 * max(1.0, abs(ref)):
            flag(t, "step_violations")
        if not mwu.cumulative_bound_ok(float(lphi[t]), log_phi0, t, eps, schedule.omega, opt_reference):
            flag(t, "cumulative_violations")
        if t < steps and not mwu.potential_step_ok(float(lphi[t]), float(xi[t]), float(lphi[t + 1]), eps):
            flag(t, "step_violations")
    return rep


def brute_force_opt(instance: FiniteInstance) -> Tuple[int, Tuple[int, ...]]:
    """Minimum-cardinality hitting set by increasing-size subset search."""
    n = instance.n_points
    if n > BRUTE_FORCE_CAP:
        raise ValueError(f"brute force is capped at {BRUTE_FORCE_CAP} points, got {n}")
    masks = [sum(1 << i for i in r) for r in instance.ranges]
    mask = kernels.min_hitting_mask(masks, n)
    if mask < 0:
        raise ValueError("instance has no hitting set")
    wit = tuple(i for i in range(n) if mask >> i & 1)
    return len(wit), wit


def random_instance(
    num_points: int, num_ranges: int, density: float, rng_seed: int = 0
) -> FiniteInstance:
    """Independent incidences with probability ``density``; empty ranges are redrawn."""
    if not 0 < density <= 1:
        raise ValueError("density must lie in (0, 1]")
    if num_ranges > 0 and num_points < 1:
        raise ValueError("ranges need at least one point")
    rng = np.random.default_rng(rng_seed)
    ranges = []
    for _ in range(num_ranges):
        while True:
            row = rng.random(num_points) < density
            if row.any():
                break
        ranges.append(tuple(int(i) for i in np.flatnonzero(row)))
    return FiniteInstance(num_points, tuple(ranges), tuple(1.0 for _ in ranges))


def disjoint_singletons(k: int) -> FiniteInstance:
    return FiniteInstance(k, tuple((i,) for i in range(k)), (1.0,) * k)


# file IO -----------------------------------------------------------------


def parse_instance(text: str, source: str = "<string>") -> FiniteInstance:
    n = None
    ranges: List[Tuple[int, ...]] = []
    weights: List[float] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue

        def fail(msg):
            raise InstanceFormatError(f"{source}:{lineno}: {msg}")

        if line.startswith("points"):
            parts = line.split()
            if len(parts) != 2 or n is not None:
                fail("expected a single header 'points N'")
            try:
                n = int(parts[1])
            except ValueError:
                fail(f"bad point count {parts[1]!r}")
            if n < 0:
                fail("point count must be nonnegative")
            continue
        if not line.startswith("w"):
            fail(f"unexpected line {raw.strip()!r}")
        if n is None:
            fail("range before the 'points N' header")
        head, sep, body = line[1:].partition(":")
        if not sep:
            fail("missing ':' in range line")
        try:
            w = float(head)
        except ValueError:
            fail(f"bad weight {head.strip()!r}")
        if not (w > 0 and math.isfinite(w)):
            fail(f"weight must be positive, got {head.strip()}")
        try:
            idx = [int(tok) for tok in body.split()]
        except ValueError:
            fail("point indices must be integers")
        if not idx:
            fail("empty range")
        bad = [i for i in idx if not 0 <= i < n]
        if bad:
            fail(f"point index {bad[0]} out of range 0..{n - 1}")
        ranges.append(tuple(idx))
        weights.append(w)
    if n is None:
        raise InstanceFormatError(f"{source}: missing 'points N' header")
    return FiniteInstance(n, tuple(ranges), tuple(weights))


def load_instance(path) -> FiniteInstance:
    path = Path(path)
    return parse_instance(path.read_text(), str(path))


def format_instance(inst: FiniteInstance) -> str:
    lines = [f"points {inst.n_points}"]
    for r, w in zip(inst.ranges, inst.weights):
        lines.append(f"w {w!r} : " + " ".join(str(i) for i in r))
    return "\n".join(lines) + "\n"


def save_instance(inst: FiniteInstance, path) -> None:
    Path(path).write_text(format_instance(inst))


__all__ = [
    "BRUTE_FORCE_CAP",
    "FiniteInstance",
    "InstanceFormatError",
    "brute_force_opt",
    "disjoint_singletons",
    "format_instance",
    "load_instance",
    "parse_instance",
    "random_instance",
    "save_instance",
]
