"""Solution records: line-oriented ``key value`` text with exact rationals.

A record names its instance file and that file's SHA-256, so ``verify``
can reload the instance and recompute every claim.  Masses are stored as
``count/T``, so the fractional solution is reconstructed exactly.  Only
the ``wall_time`` line varies between identical runs.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from .core import FractionalSolution, check_feasibility
from .geometry.rational import Q, fmt, fmt_point, parse_point

MAGIC = "fracthit-record 1"
VOLATILE = ("wall_time",)


class RecordError(ValueError):
    """Unreadable record, or a record that does not match its instance."""


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _frac(x) -> str:
    f = Fraction(x)
    return f"{f.numerator}/{f.denominator}"


@dataclass
class Record:
    lines: List[Tuple[str, str]] = field(default_factory=list)

    def add(self, key: str, value) -> None:
        self.lines.append((key, str(value)))

    def get(self, key: str, default=None) -> Optional[str]:
        for k, v in self.lines:
            if k == key:
                return v
        return default

    def all(self, key: str) -> List[str]:
        return [v for k, v in self.lines if k == key]

    def text(self) -> str:
        return MAGIC + "\n" + "".join(f"{k} {v}\n" for k, v in self.lines)


def parse_record(text: str, source: str = "<record>") -> Record:
    rows = text.splitlines()
    if not rows or rows[0].strip() != MAGIC:
        raise RecordError(f"{source}: not a fracthit record")
    rec = Record()
    for lineno, raw in enumerate(rows[1:], 2):
        if not raw.strip():
            continue
        key, _, val = raw.partition(" ")
        if not key:
            raise RecordError(f"{source}:{lineno}: malformed line")
        rec.lines.append((key, val.strip()))
    return rec


def strip_volatile(text: str) -> str:
    """Record text without the timing line(s)."""
    return "".join(l + "\n" for l in text.splitlines() if l.split(" ", 1)[0] not in VOLATILE)


# building -------------------------------------------------------------------


def _header(rec: Record, command: str, instance_path, params: dict) -> None:
    rec.add("command", command)
    rec.add("instance", str(instance_path))
    rec.add("instance_sha256", file_digest(instance_path))
    for k, v in params.items():
        rec.add(k, v)


def _masses(rec: Record, sol: FractionalSolution, point_fmt) -> None:
    rec.add("total_mass", _frac(Fraction(sum(sol.counts), sol.scale)) if sol.counts else _frac(sol.total_mass))
    for (p, m), c in zip(sol.support, sol.counts or [None] * len(sol)):
        mass = f"{c}/{sol.scale}" if c is not None else _frac(m)
        rec.add("mass", f"{mass} {point_fmt(p)}")


def finite_record(instance_path, params: dict, result, quality, opt_reference: int, opt_source: str,
                  hitting_set: Sequence[int]) -> Record:
    rec = Record()
    _header(rec, "solve-finite", instance_path, params)
    s = result.schedule
    rec.add("T", s.T)
    rec.add("t_max", s.t_max)
    rec.add("iterations", result.iterations)
    rec.add("opt_reference", opt_reference)
    rec.add("opt_source", opt_source)
    _masses(rec, result.solution, str)
    rec.add("alpha", _frac(Fraction(sum(result.solution.counts or ()), s.T) / opt_reference)
            if opt_reference else "inf")
    rec.add("alpha_target", repr(s.alpha_target))
    rec.add("beta", repr(quality.measured_beta))
    rec.add("hitting_set", " ".join(str(i) for i in hitting_set))
    rec.add("hitting_set_size", len(hitting_set))
    rec.add("wall_time", f"{result.wall_time:.3f}")
    return rec


def gallery_record(polygon_path, params: dict, run, opt_reference: int) -> Record:
    rec = Record()
    _header(rec, "solve-gallery", polygon_path, params)
    res = run.fractional
    s = res.schedule
    rec.add("T", s.T)
    rec.add("t_max", s.t_max)
    rec.add("iterations", res.iterations)
    rec.add("opt_reference", opt_reference)
    rec.add("fresh_oracle_calls", res.extras.get("fresh_calls", 0))
    rec.add("forced_steps", res.extras.get("forced_steps", 0))
    _masses(rec, res.solution, fmt_point)
    rec.add("alpha", _frac(Fraction(sum(res.solution.counts or ()), s.T) / opt_reference))
    rec.add("alpha_target", repr(s.alpha_target))
    rec.add("beta", repr(run.feasible_fraction))
    for g in run.guards:
        rec.add("guard", fmt_point(g))
    rec.add("guard_count", len(run.guards))
    rec.add("coverage", fmt(run.coverage))
    rec.add("wall_time", f"{res.wall_time:.3f}")
    return rec


def bg_record(instance_path, params: dict, result, round_bound: int, wall_time: float) -> Record:
    rec = Record()
    _header(rec, "bg-finite", instance_path, params)
    rec.add("rounds", result.rounds)
    rec.add("doublings", result.doublings)
    rec.add("round_bound", round_bound)
    rec.add("hitting_set", " ".join(str(i) for i in result.points or ()))
    rec.add("hitting_set_size", len(result.points or ()))
    rec.add("wall_time", f"{wall_time:.3f}")
    return rec


# verification -----------------------------------------------------------------


@dataclass
class VerifyReport:
    lines: List[str] = field(default_factory=list)
    failed: int = 0

    def check(self, ok: bool, claim: str, detail: str = "") -> None:
        self.lines.append(("ok   " if ok else "FAIL ") + claim + (f" ({detail})" if detail else ""))
        if not ok:
            self.failed += 1

    @property
    def exit_code(self) -> int:
        return 0 if self.failed == 0 else 2


def _resolve(rec_path: Path, name: str) -> Path:
    p = Path(name)
    if p.exists() or p.is_absolute():
        return p
    alt = rec_path.parent / p
    return alt if alt.exists() else p


def _solution(rec: Record, parse_pt) -> FractionalSolution:
    pts, counts, scale = [], [], None
    for row in rec.all("mass"):
        m, _, p = row.partition(" ")
        num, _, den = m.partition("/")
        num, den = int(num), int(den)
        if scale is None:
            scale = den
        elif den != scale:
            raise RecordError("mass lines use different denominators")
        pts.append(parse_pt(p))
        counts.append(num)
    if not pts:
        return FractionalSolution((), 0.0)
    sup = tuple((p, c / scale) for p, c in zip(pts, counts))
    return FractionalSolution(sup, math.fsum(m for _, m in sup), tuple(counts), scale)


def _total(sol: FractionalSolution) -> Fraction:
    return Fraction(sum(sol.counts), sol.scale) if sol.counts else Fraction(0)


def verify_record(path, instance_path=None) -> VerifyReport:
    """Reload the instance and recheck every claim in the record at ``path``."""
    from .finite import load_instance

    path = Path(path)
    rec = parse_record(path.read_text(), str(path))
    cmd = rec.get("command")
    inst_file = Path(instance_path) if instance_path else _resolve(path, rec.get("instance", ""))
    if not inst_file.exists():
        raise RecordError(f"instance file {inst_file} not found")
    if file_digest(inst_file) != rec.get("instance_sha256"):
        raise RecordError(f"instance file {inst_file} does not match the record")
    rep = VerifyReport()
    delta = float(rec.get("delta", "0"))
    if cmd == "solve-finite":
        inst = load_instance(inst_file)
        sol = _solution(rec, int)
        _verify_fractional(rep, rec, sol, inst, delta)
        H = [int(x) for x in rec.get("hitting_set", "").split()]
        heavy_missed = [r for r, R in enumerate(inst.ranges)
                        if _reaches_one(sol, R) and not set(R) & set(H)]
        rep.check(not heavy_missed, "hitting set meets every range with mass >= 1",
                  f"missed range {heavy_missed[0]}" if heavy_missed else f"{len(H)} points")
        rep.check(len(H) == int(rec.get("hitting_set_size", -1)), "hitting set size")
    elif cmd == "solve-gallery":
        from .gallery import GalleryInstance, coverage_fraction
        from .geometry.io import load_polygon

        H = load_polygon(inst_file)
        inst = GalleryInstance(H, opt_upper=int(rec.get("opt_reference")))
        sol = _solution(rec, parse_point)
        _verify_fractional(rep, rec, sol, inst, delta)
        guards = [parse_point(g) for g in rec.all("guard")]
        cov = coverage_fraction(H, guards, inst)
        rep.check(cov == Q(rec.get("coverage", "0/1")), "recorded coverage", f"recomputed {fmt(cov)}")
        rep.check(cov >= 1 - Q(Fraction(rec.get("delta"))),
                  "coverage >= 1 - delta", f"{float(cov):.6f}")
        rep.check(len(guards) == int(rec.get("guard_count", -1)), "guard count")
    elif cmd == "bg-finite":
        inst = load_instance(inst_file)
        H = set(int(x) for x in rec.get("hitting_set", "").split())
        missed = [r for r, R in enumerate(inst.ranges) if not H & set(R)]
        rep.check(not missed, "hitting set meets every range",
                  f"missed range {missed[0]}" if missed else f"{len(H)} points")
        rep.check(int(rec.get("rounds")) <= int(rec.get("round_bound")), "round bound")
    else:
        raise RecordError(f"unknown command {cmd!r} in record")
    return rep


def _reaches_one(sol: FractionalSolution, R) -> bool:
    idx = {p: i for i, p in enumerate(sol.points)}
    return sol.reaches_one(idx[p] for p in R if p in idx) if len(sol) else False


def _verify_fractional(rep: VerifyReport, rec: Record, sol: FractionalSolution, inst, delta: float) -> None:
    total = _total(sol)
    rep.check(total == Fraction(rec.get("total_mass", "0/1")), "total mass", f"{total}")
    opt = int(rec.get("opt_reference", "0"))
    if rec.get("opt_source") == "brute-force":
        from .finite import brute_force_opt

        rep.check(brute_force_opt(inst)[0] == opt, "brute-force Opt", str(opt))
    if opt > 0:
        alpha = total / opt
        rep.check(alpha == Fraction(rec.get("alpha", "0/1")), "recorded alpha", str(alpha))
        rep.check(float(alpha) <= float(rec.get("alpha_target")), "alpha <= alpha target",
                  f"{float(alpha):.6f}")
    if len(sol):
        beta = check_feasibility(sol, inst).feasible_mass_fraction
    else:
        beta = 0.0 if inst.base_measure(None) > 0 else 1.0
    rep.check(abs(beta - float(rec.get("beta", "nan"))) <= 1e-12, "recorded beta", repr(beta))
    rep.check(beta >= 1 - delta - 1e-12, "beta >= 1 - delta", f"{beta:.6f}")


__all__ = [
    "MAGIC",
    "Record",
    "RecordError",
    "VerifyReport",
    "bg_record",
    "file_digest",
    "finite_record",
    "gallery_record",
    "parse_record",
    "strip_volatile",
    "verify_record",
]
