"""Multiplicative-weight fractional covering.

Each round picks a point of (nearly) maximum weighted depth, and every
active range containing it loses a factor (1 - eps) of weight.  A range
retires after T hits.  The loop stops when the retired ranges carry all
but a delta fraction of the base measure; the output measure gives each
chosen point mass multiplicity / T.

Weights are kept in the log domain.  (1 - eps)**T underflows for the T
values the schedule produces, so potentials are reported as log Φ and
compared with a relative tolerance.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable, List, Optional, Sequence

import numpy as np

from .core import (
    ApproxQuality,
    FractionalSolution,
    QualityReport,
    RangeSpaceInstance,
    check_feasibility,
)

EPS_MAX = 0.68
REL_TOL = 1e-9


class ScheduleError(ValueError):
    """Accuracy parameters outside their admissible domain."""


class IterationBoundExceeded(RuntimeError):
    """The loop ran past t_max; the oracle most likely broke its contract."""

    def __init__(self, t_max: int, partial=None):
        super().__init__(
            f"iteration bound exceeded (t_max = {t_max}): oracle contract likely violated"
        )
        self.t_max = t_max
        self.partial = partial


@dataclass(frozen=True)
class ScheduleParams:
    eps: float
    delta: float
    omega: float
    gamma: float
    opt_upper: int
    T: int
    T0: float
    t_max: int
    a: float
    b: float
    doublings: int = 0

    @property
    def alpha_target(self) -> float:
        return (1 + 5 * self.eps) / (1 - self.omega)


def _t_max(eps, delta, omega, n, T) -> int:
    return math.ceil(n / (eps * (1 - omega)) * (T * -math.log1p(-eps) + math.log(1 / (eps * delta))))


def schedule_conditions(s: ScheduleParams):
    """The two inequalities T must satisfy: (T/a > ln T + b, T large enough for t_max)."""
    first = s.T / s.a > math.log(s.T) + s.b
    need = max(1.0, s.gamma * math.log(s.t_max) + math.log(1 / s.delta)) / s.eps**2
    return first, s.T >= need


def compute_schedule(eps, delta, omega, gamma, opt_upper) -> ScheduleParams:
    """Derive T, t_max and the auxiliary a, b, T0 from the accuracies."""
    if not 0 < eps <= EPS_MAX:
        raise ScheduleError(f"eps must lie in (0, {EPS_MAX}], got {eps}")
    if not 0 < delta < 1:
        raise ScheduleError(f"delta must lie in (0, 1), got {delta}")
    if not 0 <= omega < 1:
        raise ScheduleError(f"omega must lie in [0, 1), got {omega}")
    if not gamma >= 1:
        raise ScheduleError(f"gamma must be >= 1, got {gamma}")
    if int(opt_upper) != opt_upper or opt_upper < 1:
        raise ScheduleError(f"opt_upper must be a positive integer, got {opt_upper}")
    n = int(opt_upper)
    T0 = n / (eps * (1 - omega) * delta ** (1 / gamma)) * (
        -math.log1p(-eps) + math.log(1 / (eps * delta))
    )
    a = gamma / eps**2
    b = max(math.log(T0), 1.0)
    T = math.ceil(math.e**2 * a * b * (math.log(a + math.e - 1) + 1))
    doublings = 0
    while True:
        s = ScheduleParams(eps, delta, omega, gamma, n, T, T0, _t_max(eps, delta, omega, n, T), a, b, doublings)
        c1, c2 = schedule_conditions(s)
        if c1 and c2:
            return s
        T *= 2
        doublings += 1


# ---------------------------------------------------------------------------
# state snapshots and invariant checks


@dataclass
class SolverState:
    """Snapshot of the loop: chosen multiset, per-unit log weights, measures.

    A "unit" is a range (finite adapter) or a cell (gallery adapter);
    ``log_w`` holds log((1-eps)**hits * w0) for active units and -inf for
    retired ones, recomputed from the hit counts rather than carried over.
    """

    t: int
    chosen: List[Any]
    hits: np.ndarray
    log_w: np.ndarray
    active_measure: float
    eps: float
    T: int
    member_fn: Callable[[Any], np.ndarray] = field(repr=False, default=None)

    @property
    def log_potential(self) -> float:
        return _logsumexp(self.log_w)

    @property
    def potential(self) -> float:
        return math.exp(self.log_potential)

    def log_score(self, point) -> float:
        """log ξ(p), the log weight of active units containing p."""
        mask = self.member_fn(point)
        return _logsumexp(self.log_w[mask])


def _logsumexp(x: np.ndarray) -> float:
    if x.size == 0:
        return -math.inf
    mx = float(np.max(x))
    if mx == -math.inf:
        return -math.inf
    return mx + math.log(float(np.sum(np.exp(x - mx))))


def potential_step_ok(log_phi_before, ratio, log_phi_after, eps, tol=REL_TOL) -> bool:
    """Φ(t+1) <= Φ(t)·exp(-eps·ξ/Φ(t)), tested in logs with relative tolerance."""
    if log_phi_after == -math.inf:
        return True
    return log_phi_after <= log_phi_before - eps * ratio + math.log1p(tol)


def verify_potential_step(state_before: SolverState, chosen_point, state_after: SolverState) -> bool:
    """Check the one-step potential decrease between consecutive states."""
    lb = state_before.log_potential
    if lb == -math.inf:
        return state_after.log_potential == -math.inf
    ls = state_before.log_score(chosen_point)
    ratio = 0.0 if ls == -math.inf else math.exp(ls - lb)
    return potential_step_ok(lb, ratio, state_after.log_potential, state_before.eps)


def cumulative_bound_ok(log_phi_t, log_phi_0, t, eps, omega, opt_reference, tol=REL_TOL) -> bool:
    """Φ(t) <= Φ(0)·exp(-eps(1-omega)/(1+eps) · t / Opt)."""
    if log_phi_t == -math.inf:
        return True
    rhs = log_phi_0 - eps * (1 - omega) / (1 + eps) * t / opt_reference
    return log_phi_t <= rhs + math.log1p(tol)


# ---------------------------------------------------------------------------
# results


@dataclass
class TraceRecord:
    t: int
    size: int
    active_measure: float
    log_potential: float
    point: Any
    score: float  # ξ_t(p_{t+1}) relative to Φ(t), i.e. ξ/Φ

    @property
    def potential(self) -> float:
        return math.exp(self.log_potential) if self.log_potential > -math.inf else 0.0


class TraceArrays:
    """Array-backed trace; records are built on access.

    ``points`` optionally maps the stored integer ids to point objects.
    """

    def __init__(self, chosen, ratio, log_phi, active, points=None):
        self.chosen, self.ratio, self.log_phi, self.active = chosen, ratio, log_phi, active
        self.points = points

    def __len__(self) -> int:
        return len(self.chosen)

    def __getitem__(self, i) -> TraceRecord:
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError(i)
        c = int(self.chosen[i])
        return TraceRecord(i, i, float(self.active[i]), float(self.log_phi[i]),
                           self.points[c] if self.points is not None else c, float(self.ratio[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]


@dataclass
class InvariantReport:
    checked: bool = False
    step_violations: int = 0
    cumulative_violations: int = 0
    first_violation: Optional[int] = None

    @property
    def ok(self) -> bool:
        return self.step_violations == 0 and self.cumulative_violations == 0


@dataclass
class MWUResult:
    solution: FractionalSolution
    trace: List[TraceRecord]
    schedule: ScheduleParams
    iterations: int
    final_active_measure: float
    total_measure: float
    invariants: InvariantReport
    wall_time: float = 0.0
    extras: dict = field(default_factory=dict)


def check_trace_invariants(trace: Sequence[TraceRecord], schedule: ScheduleParams,
                           log_phi_0: float, opt_reference: float, final_log_phi=None) -> InvariantReport:
    """Replay the logged potentials against both the step and cumulative bounds."""
    rep = InvariantReport(checked=True)
    logs = [r.log_potential for r in trace]
    if final_log_phi is not None:
        logs.append(final_log_phi)
    for i, rec in enumerate(trace):
        if i + 1 < len(logs) and not potential_step_ok(logs[i], rec.score, logs[i + 1], schedule.eps):
            rep.step_violations += 1
            rep.first_violation = rep.first_violation if rep.first_violation is not None else i
    for t, lp in enumerate(logs):
        if not cumulative_bound_ok(lp, log_phi_0, t, schedule.eps, schedule.omega, opt_reference):
            rep.cumulative_violations += 1
            rep.first_violation = rep.first_violation if rep.first_violation is not None else t
    return rep


# ---------------------------------------------------------------------------
# solver entry points


def solve_fractional(
    instance: RangeSpaceInstance,
    schedule: ScheduleParams,
    max_oracle: Optional[Callable] = None,
    rng_seed: int = 0,
    *,
    debug_invariants: bool = False,
    opt_reference: Optional[float] = None,
    **engine_options,
) -> MWUResult:
    """Run the covering loop on ``instance``.

    ``max_oracle(engine, rng) -> point`` overrides the adapter's default
    oracle.  With ``debug_invariants`` the potential is recomputed from the
    hit counts after every step and both potential bounds are checked.
    Raises :class:`IterationBoundExceeded` past ``schedule.t_max``.
    """
    if opt_reference is None:
        opt_reference = schedule.opt_upper
    start = time.perf_counter()
    engine = instance.mwu_engine(schedule, **engine_options)
    res = engine.run(max_oracle=max_oracle, rng_seed=rng_seed,
                     debug_invariants=debug_invariants, opt_reference=opt_reference)
    res.wall_time = time.perf_counter() - start
    return res


def generic_loop(engine, oracle, rng, schedule: ScheduleParams, debug_invariants: bool,
                 opt_reference: float) -> MWUResult:
    """Reference implementation of the loop on any engine.

    The engine supplies ``state()``, ``apply(point)``, ``active_measure``,
    ``total_measure`` and ``key(point)`` (hashable support key).
    """
    total = engine.total_measure
    stop = schedule.delta * total
    trace: List[TraceRecord] = []
    chosen: List[Any] = []
    rep = InvariantReport(checked=debug_invariants)
    st = engine.state()
    log_phi_0 = st.log_potential
    t = 0
    while engine.active_measure >= stop:
        if t >= schedule.t_max:
            raise IterationBoundExceeded(schedule.t_max, trace)
        p = oracle(engine, rng)
        prepare = getattr(engine, "prepare", None)
        if prepare is not None:
            # adapters may refine their bookkeeping to make p's ranges explicit
            prepare(p)
            st = engine.state()
        lphi = st.log_potential
        ls = st.log_score(p)
        ratio = 0.0 if ls == -math.inf else math.exp(ls - lphi)
        trace.append(TraceRecord(t, t, engine.active_measure, lphi, engine.key(p), ratio))
        engine.apply(p)
        chosen.append(engine.key(p))
        t += 1
        new = engine.state()
        if debug_invariants:
            if not verify_potential_step(st, p, new):
                rep.step_violations += 1
                rep.first_violation = rep.first_violation if rep.first_violation is not None else t - 1
            if not cumulative_bound_ok(new.log_potential, log_phi_0, t, schedule.eps,
                                       schedule.omega, opt_reference):
                rep.cumulative_violations += 1
                rep.first_violation = rep.first_violation if rep.first_violation is not None else t
        st = new
    sol = FractionalSolution.from_multiset(chosen, schedule.T)
    return MWUResult(sol, trace, schedule, t, engine.active_measure, total, rep)


def verify_final_quality(solution: FractionalSolution, instance: RangeSpaceInstance,
                         schedule: ScheduleParams, opt_reference: float) -> QualityReport:
    """Measured (alpha, beta) against the target ((1+5eps)/(1-omega), 1-delta)."""
    target = ApproxQuality(schedule.alpha_target, 1 - schedule.delta)
    feas = check_feasibility(solution, instance, target.beta)
    alpha = solution.total_mass / opt_reference if opt_reference > 0 else math.inf
    return QualityReport(alpha, feas.feasible_mass_fraction, target, feas.witness_violated)


def solve_with_opt_doubling(instance, eps, delta, omega, gamma=None, max_oracle=None,
                            rng_seed=0, **kw) -> MWUResult:
    """Guess Opt = 1, 2, 4, ... (up to the instance bound) and keep the first
    guess whose run finishes within its own t_max."""
    gamma = instance.growth_exponent if gamma is None else gamma
    n = instance.opt_upper_bound
    g = 1
    last_err = None
    while True:
        g = min(g, n)
        sched = compute_schedule(eps, delta, omega, gamma, g)
        try:
            res = solve_fractional(instance, sched, max_oracle, rng_seed, **kw)
            res.extras["opt_guess"] = g
            return res
        except IterationBoundExceeded as e:
            last_err = e
        if g >= n:
            raise last_err
        g *= 2


__all__ = [
    "EPS_MAX",
    "IterationBoundExceeded",
    "InvariantReport",
    "MWUResult",
    "ScheduleError",
    "ScheduleParams",
    "SolverState",
    "TraceArrays",
    "TraceRecord",
    "check_trace_invariants",
    "compute_schedule",
    "cumulative_bound_ok",
    "generic_loop",
    "potential_step_ok",
    "schedule_conditions",
    "solve_fractional",
    "solve_with_opt_doubling",
    "verify_final_quality",
    "verify_potential_step",
]
