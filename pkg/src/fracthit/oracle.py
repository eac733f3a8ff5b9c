"""Maximization oracles: return a point of (nearly) maximum weighted depth.

``exact_max`` enumerates a finite ground set.  ``sampled_max`` draws N
ranges by weight, looks at how the sample is split by the points (the
dual projection), and returns a witness point of a deepest class.  With N
from :func:`eps_approx_sample_size` the sample is an eps-approximation
with probability at least 1 - sigma, which is what makes the returned
point good.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Optional, Sequence

import numpy as np

from .core import UnsupportedOperation
from .kernels import TIE_REL


@dataclass(frozen=True)
class OracleConfig:
    omega: float = 0.25
    sigma: float = 0.1
    sample_size_override: Optional[int] = None
    constant_c: float = 1.0
    dual_dim: Optional[int] = None

    def __post_init__(self):
        if not 0 < self.omega < 1:
            raise ValueError(f"omega must lie in (0, 1), got {self.omega}")
        if not 0 < self.sigma < 1:
            raise ValueError(f"sigma must lie in (0, 1), got {self.sigma}")
        if not self.constant_c > 0:
            raise ValueError("constant_c must be positive")
        if self.sample_size_override is not None and self.sample_size_override < 1:
            raise ValueError("sample_size_override must be a positive integer")


@dataclass
class OracleResult:
    point: Any
    score: float
    sample_size: int = 0
    depth: int = 0


class WeightSampler:
    """Draws range ids i.i.d. from w / w(R); ``total`` is w(R).

    ``counts``, when given, returns per-range multiplicities of an i.i.d.
    sample of size n (a multinomial draw) instead of the ordered sample.
    """

    def __init__(self, draw: Callable[[np.random.Generator, int], Sequence], total: float,
                 counts: Optional[Callable[[np.random.Generator, int], np.ndarray]] = None):
        self._draw = draw
        self.total = float(total)
        self.counts = counts

    def __call__(self, rng: np.random.Generator, n: int):
        return self._draw(rng, n)


def _argmax_first(scores: np.ndarray) -> int:
    mx = float(scores.max())
    if mx <= 0:
        return 0
    return int(np.flatnonzero(scores >= mx * (1.0 - TIE_REL))[0])


def exact_max(instance, weights) -> OracleResult:
    """argmax over the finite ground set of Σ_{R ∋ p} w(R); smallest index on ties."""
    inc = instance.incidence
    if inc.shape[1] == 0:
        raise ValueError("exact_max on an empty ground set")
    w = np.asarray(weights, dtype=np.float64)
    if w.shape[0] != inc.shape[0]:
        raise ValueError("one weight per range required")
    scores = w @ inc.astype(np.float64)
    p = _argmax_first(scores)
    return OracleResult(p, float(scores[p]))


def eps_approx_sample_size(d: int, opt_upper: int, omega: float, sigma: float,
                           constant_c: float = 1.0, override: Optional[int] = None) -> int:
    """N = ceil(c · d·2^d/e² · ln(1/(e·sigma))) with e = omega/(2·opt_upper)."""
    if override is not None:
        return int(override)
    if d < 1 or opt_upper < 1 or not 0 < omega < 1 or not 0 < sigma < 1 or constant_c <= 0:
        raise ValueError("sample size parameters out of range")
    e = omega / (2 * opt_upper)
    return math.ceil(constant_c * d * 2**d / e**2 * math.log(1 / (e * sigma)))


def sample_size_for(instance, config: OracleConfig) -> int:
    d = config.dual_dim or getattr(instance, "dual_dim_hint", None) or 1
    return eps_approx_sample_size(d, instance.opt_upper_bound, config.omega, config.sigma,
                                  config.constant_c, config.sample_size_override)


def sampled_max(instance, weight_sampler: WeightSampler, omega: float, sigma: float,
                rng_seed=None, *, config: Optional[OracleConfig] = None,
                rng: Optional[np.random.Generator] = None) -> OracleResult:
    """Sample ranges by weight, take a deepest dual class, return its witness.

    The adapter supplies ``dual_argmax(sample) -> (point, depth)``, which
    applies the tie rule (lexicographically smallest set of sample
    positions) and the PointIn step.
    """
    if config is None:
        config = OracleConfig(omega=omega, sigma=sigma)
    if rng is None:
        rng = np.random.default_rng(rng_seed)
    n = sample_size_for(instance, config)
    if weight_sampler.counts is not None and hasattr(instance, "dual_argmax_counts"):
        point, depth = instance.dual_argmax_counts(weight_sampler.counts(rng, n), rng)
    else:
        point, depth = instance.dual_argmax(weight_sampler(rng, n))
    return OracleResult(point, depth / n * weight_sampler.total, n, depth)


def check_eps_approximation(sampled_ranges, instance, weights, eps=None, points=None, *,
                            counts=None) -> float:
    """max over dual classes of | |R'[q]|/|R'| - w(R[q])/w(R) |.

    Finite instances are checked on every point (each point stands for its
    class); other adapters need an explicit ``points`` list and an
    ``exact_depths(points, weights)`` capability.  For finite instances the
    sample may be passed as per-range ``counts`` instead (sampled_ranges=None).
    """
    if hasattr(instance, "incidence") and points is None:
        inc = instance.incidence
        w = np.asarray(weights, dtype=np.float64)
        if counts is not None:
            c = np.asarray(counts, dtype=np.int64)
            emp = (c @ inc.astype(np.int64)) / c.sum()
        else:
            sample = np.asarray(sampled_ranges)
            emp = inc[sample].sum(axis=0) / len(sample)
        true = (w @ inc) / w.sum()
        return float(np.max(np.abs(emp - true))) if inc.shape[1] else 0.0
    if points is None or not hasattr(instance, "sample_depths"):
        raise UnsupportedOperation("exact dual-class evaluation not available")
    emp = instance.sample_depths(sampled_ranges, points) / len(sampled_ranges)
    true = instance.exact_depths(points, weights)
    return float(np.max(np.abs(emp - true)))


def oracle_guarantee_holds(instance, weights, point, omega: float) -> bool:
    """ξ(p) >= (1 - omega) · max_q ξ(q), decided by enumeration."""
    inc = instance.incidence
    scores = np.asarray(weights, dtype=np.float64) @ inc.astype(np.float64)
    return scores[point] >= (1 - omega) * scores.max() * (1 - 1e-12)


# engine-level adapters used by the solver loop --------------------------------


def exact_oracle(engine, rng) -> Any:
    return exact_max(engine.instance, engine.relative_weights()).point


def make_sampled_oracle(config: OracleConfig) -> Callable:
    def oracle(engine, rng):
        return sampled_max(engine.instance, engine.weight_sampler(), config.omega,
                           config.sigma, config=config, rng=rng).point

    return oracle


__all__ = [
    "OracleConfig",
    "OracleResult",
    "WeightSampler",
    "check_eps_approximation",
    "eps_approx_sample_size",
    "exact_max",
    "exact_oracle",
    "make_sampled_oracle",
    "oracle_guarantee_holds",
    "sample_size_for",
    "sampled_max",
]
