"""Weight-doubling hitting sets (the Brönnimann–Goodrich scheme).

Start from a point measure μ0.  Build an eps-net for the current measure;
if some range misses it, double the measure inside that range and try
again.  Because the missed range is light (the net is verified), each
doubling raises the total measure by less than a factor (1 + eps), while
a feasible measure forces the weight of its support to grow by a factor 2
per doubling; the two rates clash after O(μ*(Q)·log(1/δ0)) rounds.

For finite instances the weights are exact integers 2**deg.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional

import numpy as np

from . import kernels
from .nets import net_sample_size

BG_CONST = 1.0 / (math.log(2) - 0.5)


@dataclass
class BGResult:
    points: Optional[List]
    rounds: int
    doublings: int
    history: List[int] = field(default_factory=list)  # doubled range ids
    step_ratio_ok: bool = True  # μ_{t+1}(Q) < (1+eps)·μ_t(Q) held at every doubling
    bookkeeping_ok: bool = True

    @property
    def success(self) -> bool:
        return self.points is not None


def round_bound(mass: float, delta0: float) -> float:
    """(1/(ln 2 - 1/2)) · mass · ln(1/delta0)."""
    return BG_CONST * mass * math.log(1 / delta0)


def delta0_estimate(instance) -> float:
    """Lower bound on the smallest relative cell measure under μ0."""
    est = getattr(instance, "delta0_estimate", None)
    if est is None:
        raise TypeError("instance provides no delta0 estimate")
    return est()


class FiniteBG:
    """Exact-integer weight bookkeeping for a finite instance."""

    def __init__(self, instance):
        self.inst = instance
        self.inc = instance.incidence.astype(bool)
        self.deg = np.zeros(instance.n_points, np.int64)

    def weights(self) -> List[int]:
        return [1 << int(k) for k in self.deg]

    def total(self) -> int:
        return sum(self.weights())

    def light(self, r: int, eps: Fraction) -> bool:
        w = self.weights()
        mass = sum(w[p] for p in self.inst.ranges[r])
        return mass < eps * sum(w)

    def heavy_rows(self, eps: Fraction) -> List[int]:
        w = self.weights()
        tot = sum(w)
        return [r for r, R in enumerate(self.inst.ranges) if sum(w[p] for p in R) >= eps * tot]

    def verify(self, P, eps: Fraction):
        S = set(P)
        for r in self.heavy_rows(eps):
            if not S.intersection(self.inst.ranges[r]):
                return r
        return None

    def net(self, eps: Fraction, d: int, rng, c_net: float, retries: int) -> List[int]:
        heavy = self.heavy_rows(eps)
        if not heavy:
            return []
        w = np.array([float(x) for x in self.weights()])
        probs = w / w.sum()
        n = net_sample_size(float(eps), d, c_net)
        for _ in range(retries):
            idx = rng.choice(len(w), size=max(n, 1), p=probs)
            P = list(dict.fromkeys(int(i) for i in idx))
            if self.verify(P, eps) is None:
                return P
        # deterministic fallback over the same heavy ranges
        sub = self.inc[heavy].astype(np.uint8)
        return [int(j) for j in kernels.greedy_cover(sub)]

    def greedy(self, eps: Fraction) -> List[int]:
        """Greedy cover of the eps-heavy ranges (a verified eps-net, usually small)."""
        heavy = self.heavy_rows(eps)
        if not heavy:
            return []
        return sorted(int(j) for j in kernels.greedy_cover(self.inc[heavy].astype(np.uint8)))

    def violation(self, P) -> Optional[int]:
        S = set(P)
        for r, R in enumerate(self.inst.ranges):
            if not S.intersection(R):
                return r
        return None

    def double(self, r: int) -> None:
        self.deg[list(self.inst.ranges[r])] += 1


def bg_hitting_set(instance, eps: float, net_builder: Optional[Callable] = None,
                   violation_finder: Optional[Callable] = None, iter_cap: int = 1000,
                   rng_seed=0, *, c_net: float = 4.0, retries: int = 20,
                   d: Optional[int] = None, net: str = "greedy") -> BGResult:
    """Run the doubling loop for at most ``iter_cap`` rounds (net builds).

    ``net`` picks the default eps-net: "greedy" covers the heavy ranges
    greedily, "random" draws a sample of the theoretical size (which on
    small ground sets is often everything).  ``net_builder(state, eps, rng)``
    and ``violation_finder(state, P)`` replace the defaults entirely.
    Returns a result with ``points=None`` when the cap is hit.
    """
    if net not in ("greedy", "random"):
        raise ValueError(f"unknown net kind {net!r}")
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    state = FiniteBG(instance)
    rng = np.random.default_rng(rng_seed)
    e = Fraction(eps)
    d = d or instance.vc_dim_hint
    res = BGResult(None, 0, 0)
    for _ in range(iter_cap):
        res.rounds += 1
        if net_builder:
            P = net_builder(state, eps, rng)
        elif net == "greedy":
            P = state.greedy(e)
        else:
            P = state.net(e, d, rng, c_net, retries)
        r = violation_finder(state, P) if violation_finder else state.violation(P)
        if r is None:
            res.points = sorted(P)
            return res
        before = state.total()
        if not state.light(r, e):
            res.step_ratio_ok = False
        state.double(r)
        after = state.total()
        if not after < (1 + e) * before:
            res.step_ratio_ok = False
        if after != sum(1 << int(k) for k in state.deg):
            res.bookkeeping_ok = False
        res.doublings += 1
        res.history.append(r)
    return res


def bg_binary_search(instance, rho: float = 1.0, eps_factor: float = 0.5, rng_seed=0,
                     **kw) -> BGResult:
    """Try guesses g = (1+rho)**i with eps = eps_factor/g until one succeeds.

    Each guess may use 1 + ceil((1/(ln 2 - 1/2)) · g · ln(1/delta0)) rounds.
    """
    if not rho > 0:
        raise ValueError("rho must be positive")
    n = instance.opt_upper_bound
    d0 = delta0_estimate(instance)
    i = 0
    while True:
        g = (1 + rho) ** i
        last = g >= n
        g = min(g, n)
        eps = eps_factor / g
        cap = 1 + math.ceil(round_bound(g, d0))
        if eps < 1:
            res = bg_hitting_set(instance, eps, iter_cap=cap, rng_seed=rng_seed, **kw)
            if res.success:
                res.history = list(res.history)
                return res
        if last:
            raise RuntimeError(f"opt bound n = {n} inconsistent with instance")
        i += 1


__all__ = [
    "BGResult",
    "BG_CONST",
    "bg_binary_search",
    "bg_hitting_set",
    "delta0_estimate",
    "round_bound",
]
