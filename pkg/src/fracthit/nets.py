"""eps-nets over finite-support measures, and rounding to hitting sets.

Nets are drawn at random and then verified against the adapter's range
classes, so a returned net is always correct; only its size is random.
A deterministic greedy construction serves as a fallback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Hashable, List, Optional, Sequence

import numpy as np

from . import kernels
from .core import FractionalSolution

HEAVY_SLACK = 1e-9


class NetConstructionError(RuntimeError):
    def __init__(self, msg: str, violating=None):
        super().__init__(msg)
        self.violating = violating


@dataclass(frozen=True)
class NetRequest:
    eps: float
    measure: FractionalSolution
    confidence_retries: int = 20
    c_net: float = 4.0

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if not self.measure.total_mass > 0:
            raise ValueError("net measure must have positive total mass")


def net_sample_size(eps: float, d: int, c_net: float = 4.0) -> int:
    """ceil(c_net · (d/eps) · ln(1/eps) + d), never below zero."""
    return max(0, math.ceil(c_net * (d / eps) * math.log(1 / eps) + d))


def _is_heavy(measure: FractionalSolution, trace, eps: float) -> bool:
    # eps = 1/μ(Q) means "μ(R) >= 1"; decide that case exactly when possible
    if measure.counts is not None and abs(eps * measure.total_mass - 1.0) < 1e-12:
        return measure.reaches_one(trace)
    return measure.mass_of(trace) >= eps * measure.total_mass * (1 - HEAVY_SLACK)


def heavy_classes(instance, measure: FractionalSolution, eps: float, extra_points: Sequence = ()):
    """(trace, representative) for every range class with μ(R) >= eps·μ(Q).

    Traces index into ``measure.points + extra_points``.
    """
    pts = list(measure.points) + [p for p in extra_points]
    out = []
    k = len(measure)
    for trace, _w, rep in instance.range_classes(pts):
        sup = [i for i in trace if i < k]
        if _is_heavy(measure, sup, eps):
            out.append((trace, rep))
    return out


def verify_net(P: Sequence, instance, measure: FractionalSolution, eps: float):
    """A range with μ(R) >= eps·μ(Q) missing every point of P, or None."""
    if eps > 1:
        return None
    support = list(measure.points)
    pos = {p: i for i, p in enumerate(support)}
    extra = [p for p in P if p not in pos]
    k = len(support)
    p_idx = set()
    for p in P:
        if p in pos:
            p_idx.add(pos[p])
    p_idx.update(range(k, k + len(extra)))
    for trace, rep in heavy_classes(instance, measure, eps, extra):
        if not (trace & p_idx):
            return rep
    return None


def _dedupe(seq) -> List:
    seen = {}
    for x in seq:
        seen.setdefault(x, None)
    return list(seen)


def random_net(instance, request: NetRequest, d: int, rng_seed=None, *, rng=None) -> List:
    """Draw i.i.d. points from μ/μ(Q) until the sample verifies as an eps-net."""
    measure, eps = request.measure, request.eps
    if verify_net([], instance, measure, eps) is None:
        return []
    if rng is None:
        rng = np.random.default_rng(rng_seed)
    n = net_sample_size(eps, d, request.c_net)
    pts = measure.points
    probs = np.asarray(measure.masses, dtype=np.float64)
    probs = probs / probs.sum()
    last = None
    for _ in range(max(1, request.confidence_retries)):
        idx = rng.choice(len(pts), size=max(n, 1), p=probs)
        P = _dedupe(pts[i] for i in idx)
        last = verify_net(P, instance, measure, eps)
        if last is None:
            return P
    raise NetConstructionError("net construction failed", last)


def reduce_to_unweighted(measure: FractionalSolution, K: Optional[int] = None) -> List[int]:
    """Copy counts floor(μ(p)·K/Σμ + 1) per support point (K defaults to |support|)."""
    K = len(measure) if K is None else K
    tot = measure.total_mass
    return [int(math.floor(m * K / tot + 1)) for m in measure.masses]


def greedy_net(instance, measure: FractionalSolution, eps: float, *, candidates=None,
               reduction: bool = True) -> List:
    """Deterministic net: repeatedly take the point hitting most unhit heavy ranges.

    With ``reduction`` the measure is first replaced by integer copy counts
    and ranges holding at least eps/2 of the copies count as heavy, which
    covers every eps-heavy range of the original measure.  Without it the
    heavy ranges are exactly those with μ(R) >= eps·μ(Q).
    """
    if candidates is None:
        candidates = getattr(instance, "net_candidates", lambda m: list(m.points))(measure)
    support = list(measure.points)
    k = len(support)
    pos = {p: i for i, p in enumerate(support)}
    extra = [c for c in candidates if c not in pos]
    allpts = support + extra
    cand_idx = [pos[c] if c in pos else k + extra.index(c) for c in candidates]
    if reduction:
        copies = reduce_to_unweighted(measure)
        total = sum(copies)
        rows = []
        for trace, _w, _rep in instance.range_classes(allpts):
            c = sum(copies[i] for i in trace if i < k)
            if c >= eps / 2 * total * (1 - HEAVY_SLACK):
                rows.append(trace)
    else:
        rows = [tr for tr, _ in heavy_classes(instance, measure, eps, extra)]
    if not rows:
        return []
    inc = np.zeros((len(rows), len(cand_idx)), np.uint8)
    col = {ci: j for j, ci in enumerate(cand_idx)}
    for r, tr in enumerate(rows):
        for i in tr:
            j = col.get(i)
            if j is not None:
                inc[r, j] = 1
    picks = kernels.greedy_cover(inc)
    return [candidates[int(j)] for j in picks]


def round_to_hitting_set(solution: FractionalSolution, instance, d: int, rng_seed=None, *,
                         c_net: float = 4.0, retries: int = 20, strategy: str = "best") -> List:
    """Points hitting every range with μ(R) >= 1.

    The random eps-net with eps = 1/μ(Q) is always built.  With
    ``strategy="best"`` a greedy net over the same heavy ranges is built as
    well and the smaller of the two is returned (random wins ties).
    """
    if solution.total_mass <= 0:
        return []
    eps = 1.0 / solution.total_mass
    req = NetRequest(eps, solution, retries, c_net)
    try:
        rnd = random_net(instance, req, d, rng_seed)
    except NetConstructionError:
        if strategy == "random":
            raise
        rnd = None
    if strategy == "random":
        return rnd
    greedy = greedy_net(instance, solution, eps, candidates=list(solution.points), reduction=False)
    if rnd is None or len(greedy) < len(rnd):
        return greedy
    return rnd


__all__ = [
    "NetConstructionError",
    "NetRequest",
    "greedy_net",
    "heavy_classes",
    "net_sample_size",
    "random_net",
    "reduce_to_unweighted",
    "round_to_hitting_set",
    "verify_net",
]
