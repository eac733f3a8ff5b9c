"""Range-space contract, solutions and quality reports.

An instance bundles four oracles: membership, subsystem traces, the base
measure w0 over ranges, and an upper bound on the optimum.  Solvers only
talk to instances through these methods plus the optional capability
``range_classes`` used for exact feasibility accounting.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass, field
from typing import Any, FrozenSet, Hashable, Iterable, List, Optional, Sequence, Tuple


class UnsupportedOperation(RuntimeError):
    """The instance lacks a capability the caller needs."""


class RangeSpaceInstance(abc.ABC):
    """Abstract range space (Q, R) with base measure w0 on the ranges."""

    #: upper bound n on the optimum hitting-set size
    opt_upper_bound: int = 1
    #: growth exponent: |subsystem(P)| <= |P|**gamma for |P| >= 2
    growth_exponent: float = 1.0
    #: optional (primal) VC-dimension hint
    vc_dim_hint: Optional[int] = None

    @abc.abstractmethod
    def membership(self, point, range_id) -> bool:
        """True iff ``point`` lies in the range named ``range_id``."""

    @abc.abstractmethod
    def subsystem(self, points: Sequence) -> List[FrozenSet[int]]:
        """Distinct traces R ∩ P, as sets of indices into ``points``."""

    @abc.abstractmethod
    def base_measure(self, ranges=None) -> float:
        """w0 of a set of ranges; ``None`` means the whole family."""

    def range_classes(self, points: Sequence) -> Iterable[Tuple[FrozenSet[int], float, Any]]:
        """Yield (trace, w0-measure, representative range) for a partition of
        the ranges into classes with a common trace on ``points``.

        Optional: adapters that can enumerate or decompose their ranges
        override this; the default raises.
        """
        raise UnsupportedOperation(f"{type(self).__name__} cannot enumerate its ranges")


@dataclass(frozen=True)
class FractionalSolution:
    """Finite-support measure on points.

    When the solution came out of the MWU loop, ``counts`` and ``scale``
    hold the exact multiplicities and the divisor T, so μ(R) >= 1 can be
    decided with integers.
    """

    support: Tuple[Tuple[Hashable, float], ...]
    total_mass: float
    counts: Optional[Tuple[int, ...]] = None
    scale: Optional[int] = None

    def __post_init__(self):
        s = math.fsum(m for _, m in self.support)
        if any(m <= 0 for _, m in self.support):
            raise ValueError("support masses must be strictly positive")
        if abs(s - self.total_mass) > 1e-12 * max(1.0, abs(s)):
            raise ValueError(f"total_mass {self.total_mass} != sum of masses {s}")
        if self.counts is not None and len(self.counts) != len(self.support):
            raise ValueError("counts must align with the support")

    @classmethod
    def from_masses(cls, pairs: Iterable[Tuple[Hashable, float]]) -> "FractionalSolution":
        sup = tuple((p, float(m)) for p, m in pairs if m > 0)
        return cls(sup, math.fsum(m for _, m in sup))

    @classmethod
    def from_multiset(cls, chosen: Sequence[Hashable], T: int) -> "FractionalSolution":
        """mass(p) = multiplicity(p) / T, support in order of first appearance."""
        order: dict = {}
        for p in chosen:
            order[p] = order.get(p, 0) + 1
        pts = list(order)
        cnt = tuple(order[p] for p in pts)
        sup = tuple((p, c / T) for p, c in zip(pts, cnt))
        return cls(sup, len(chosen) / T if chosen else 0.0, cnt, int(T))

    @property
    def points(self) -> List[Hashable]:
        return [p for p, _ in self.support]

    @property
    def masses(self) -> List[float]:
        return [m for _, m in self.support]

    def __len__(self) -> int:
        return len(self.support)

    def mass_of(self, indices: Iterable[int]) -> float:
        return math.fsum(self.support[i][1] for i in indices)

    def reaches_one(self, indices: Iterable[int]) -> bool:
        """μ of the given support subset is at least 1 (exact when counts exist)."""
        idx = list(indices)
        if self.counts is not None:
            return sum(self.counts[i] for i in idx) >= self.scale
        return self.mass_of(idx) >= 1.0 - 1e-12


@dataclass(frozen=True)
class ApproxQuality:
    """Target quality: mass within alpha of optimal on a beta-fraction of ranges."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not self.alpha >= 1:
            raise ValueError(f"alpha must be >= 1, got {self.alpha}")
        if not 0 <= self.beta <= 1:
            raise ValueError(f"beta must be in [0, 1], got {self.beta}")


@dataclass(frozen=True)
class QualityReport:
    """Measured quality of a run against its target."""

    measured_alpha: float
    measured_beta: float
    target: ApproxQuality
    violated: Optional[Any] = None

    @property
    def ok(self) -> bool:
        return (
            self.measured_alpha <= self.target.alpha * (1 + 1e-12)
            and self.measured_beta >= self.target.beta - 1e-12
        )


def sauer_shelah_bound(r: int, d: int) -> int:
    """Number of subsets of an r-set of size at most d."""
    if r < 0 or d < 0:
        raise ValueError("r and d must be nonnegative")
    return sum(math.comb(r, i) for i in range(min(d, r) + 1))


def measure_of_range(sol: FractionalSolution, range_id, instance: RangeSpaceInstance) -> float:
    """μ(R): total mass of support points inside the range."""
    return math.fsum(m for p, m in sol.support if instance.membership(p, range_id))


@dataclass
class FeasibilityReport:
    feasible_mass_fraction: float
    witness_violated: Optional[Any] = None
    satisfied_measure: float = 0.0
    total_measure: float = 0.0


def check_feasibility(
    sol: FractionalSolution, instance: RangeSpaceInstance, beta_target: float = 1.0
) -> FeasibilityReport:
    """w0-fraction of ranges with μ(R) >= 1, plus one violated range if short."""
    total = 0.0
    good = 0.0
    witness = None
    for trace, w, rep in instance.range_classes(sol.points):
        total += w
        if sol.reaches_one(trace):
            good += w
        elif witness is None:
            witness = rep
    full = instance.base_measure(None)
    frac = good / full if full > 0 else 1.0
    frac = min(frac, 1.0)
    if frac >= beta_target:
        witness = None
    return FeasibilityReport(frac, witness, good, full)


__all__ = [
    "ApproxQuality",
    "FeasibilityReport",
    "FractionalSolution",
    "QualityReport",
    "RangeSpaceInstance",
    "UnsupportedOperation",
    "check_feasibility",
    "measure_of_range",
    "sauer_shelah_bound",
]
