"""Command-line front end.

Exit codes: 0 success, 1 error (bad input, unreadable files), 2 a quality
claim failed (solver target missed, or ``verify`` could not reproduce a
recorded claim).
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

from . import __version__


def _unit(name, hi=1.0):
    def conv(text):
        v = float(text)
        if not 0 < v < 1 or v > hi:
            raise argparse.ArgumentTypeError(f"{name} must lie in (0, {hi:g}], got {text}")
        return v

    return conv


def _seed(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eps", type=_unit("eps", 0.68), default=0.25)
    p.add_argument("--delta", type=_unit("delta"), default=0.05)
    p.add_argument("--omega", type=_unit("omega"), default=0.25)
    p.add_argument("--sigma", type=_unit("sigma"), default=0.1)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--opt-upper", type=int, default=None, help="upper bound on Opt (default: adapter's)")
    p.add_argument("--constant-c", type=float, default=1.0, help="oracle sample-size constant")
    p.add_argument("--net-c", type=float, default=4.0, help="eps-net sample-size constant")
    p.add_argument("--debug-invariants", action="store_true", help="recheck the potential bounds")
    p.add_argument("--trace", type=Path, default=None, help="write the iteration log here")
    p.add_argument("--out", "-o", type=Path, default=None, help="solution record (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fracthit", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"fracthit {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-finite", help="fractional + rounded hitting set of a finite instance")
    p.add_argument("instance", type=Path)
    _common(p)
    p.add_argument("--oracle", choices=("exact", "sampled"), default="exact")

    p = sub.add_parser("solve-gallery", help="guard a simple polygon")
    p.add_argument("polygon", type=Path)
    _common(p)
    p.add_argument("--sample-size", type=int, default=48,
                   help="oracle sample size; 0 uses the worst-case formula")
    p.add_argument("--svg", type=Path, default=None, help="depth-shaded rendering of the result")

    p = sub.add_parser("bg-finite", help="weight-doubling baseline on a finite instance")
    p.add_argument("instance", type=Path)
    _common(p)
    p.add_argument("--bg-eps", type=float, default=None, help="net parameter (default 1/(2·Opt bound))")

    p = sub.add_parser("gen-instance", help="write a random finite instance")
    p.add_argument("--points", type=int, required=True)
    p.add_argument("--ranges", type=int, required=True)
    p.add_argument("--density", type=float, default=0.3)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", "-o", type=Path, default=None)

    p = sub.add_parser("verify", help="recheck a solution record against its instance")
    p.add_argument("record", type=Path)
    p.add_argument("--instance", type=Path, default=None, help="override the recorded instance path")
    return ap


def _params(a) -> dict:
    return {"eps": repr(a.eps), "delta": repr(a.delta), "omega": repr(a.omega), "sigma": repr(a.sigma),
            "seed": a.seed, "constant_c": repr(a.constant_c), "net_c": repr(a.net_c)}


def _emit(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _write_trace(path, trace, point_fmt=str) -> None:
    with open(path, "w") as fh:
        fh.write("t\tpoint\tscore\tlog_potential\tactive_measure\n")
        pts = trace.points
        names = [point_fmt(p) for p in pts] if pts is not None else None
        for t, (c, r, lp, am) in enumerate(zip(trace.chosen, trace.ratio, trace.log_phi, trace.active)):
            name = names[int(c)] if names is not None else str(int(c))
            fh.write(f"{t}\t{name}\t{r:.12g}\t{lp:.12g}\t{am:.12g}\n")


def _report_invariants(res) -> bool:
    inv = res.invariants
    if inv.checked:
        print(f"invariants: step violations {inv.step_violations}, "
              f"cumulative violations {inv.cumulative_violations}", file=sys.stderr)
    return inv.ok


def cmd_solve_finite(a) -> int:
    from .finite import BRUTE_FORCE_CAP, brute_force_opt, load_instance
    from .mwu import compute_schedule, solve_fractional, verify_final_quality
    from .nets import round_to_hitting_set
    from .oracle import OracleConfig, make_sampled_oracle
    from .records import finite_record

    inst = load_instance(a.instance)
    if a.opt_upper is not None:
        inst = inst.with_opt_upper(a.opt_upper)
    if inst.num_ranges == 0:
        print("instance has no ranges; the empty set hits them all", file=sys.stderr)
    if inst.n_points <= BRUTE_FORCE_CAP:
        opt_ref, source = brute_force_opt(inst)[0], "brute-force"
    else:
        opt_ref, source = inst.opt_upper_bound, "upper-bound"
    sched = compute_schedule(a.eps, a.delta, a.omega, inst.growth_exponent, inst.opt_upper_bound)
    oracle = None
    if a.oracle == "sampled":
        oracle = make_sampled_oracle(OracleConfig(a.omega, a.sigma, constant_c=a.constant_c))
    res = solve_fractional(inst, sched, oracle, a.seed, debug_invariants=a.debug_invariants,
                           opt_reference=max(opt_ref, 1))
    q = verify_final_quality(res.solution, inst, sched, max(opt_ref, 1))
    hs = sorted(round_to_hitting_set(res.solution, inst, inst.vc_dim_hint, a.seed, c_net=a.net_c))
    rec = finite_record(a.instance, _params(a), res, q, opt_ref, source, hs)
    _emit(rec.text(), a.out)
    if a.trace:
        _write_trace(a.trace, res.trace)
    ok = _report_invariants(res) and q.ok
    print(f"total mass {res.solution.total_mass:.6f}, alpha {q.measured_alpha:.4f} "
          f"(target {q.target.alpha:.4f}), beta {q.measured_beta:.6f}, "
          f"hitting set {len(hs)}, iterations {res.iterations}", file=sys.stderr)
    return 0 if ok else 2


def cmd_solve_gallery(a) -> int:
    from .gallery import GalleryInstance, solve_gallery
    from .geometry.io import load_polygon
    from .geometry.rational import fmt_point
    from .mwu import compute_schedule
    from .oracle import OracleConfig
    from .records import gallery_record

    H = load_polygon(a.polygon)
    inst = GalleryInstance(H, opt_upper=a.opt_upper)
    n = inst.opt_upper_bound
    sched = compute_schedule(a.eps, a.delta, a.omega, inst.growth_exponent, n)
    cfg = OracleConfig(a.omega, a.sigma, sample_size_override=a.sample_size or None,
                       constant_c=a.constant_c)
    run = solve_gallery(inst, sched, a.seed, net_c=a.net_c, debug_invariants=a.debug_invariants,
                        oracle_config=cfg)
    res = run.fractional
    rec = gallery_record(a.polygon, _params(a) | {"sample_size": a.sample_size}, run, n)
    _emit(rec.text(), a.out)
    if a.trace:
        _write_trace(a.trace, res.trace, fmt_point)
    if a.svg:
        from .geometry.svg import save_svg

        save_svg(inst.arrangement(run.guards), a.svg, run.guards)
    alpha = res.solution.total_mass / n
    ok = (_report_invariants(res) and alpha <= sched.alpha_target
          and run.feasible_fraction >= 1 - a.delta and run.coverage >= 1 - a.delta)
    print(f"total mass {res.solution.total_mass:.6f}, guards {len(run.guards)}, "
          f"coverage {float(run.coverage):.6f}, iterations {res.iterations}, "
          f"oracle calls {res.extras.get('fresh_calls')}", file=sys.stderr)
    return 0 if ok else 2


def cmd_bg_finite(a) -> int:
    from .bg import bg_hitting_set, round_bound
    from .finite import load_instance
    from .records import bg_record

    inst = load_instance(a.instance)
    if a.opt_upper is not None:
        inst = inst.with_opt_upper(a.opt_upper)
    n = max(inst.opt_upper_bound, 1)
    eps = a.bg_eps or 1 / (2 * n)
    bound = math.ceil(round_bound(n, 1 / max(inst.n_points, 2)))
    start = time.perf_counter()
    res = bg_hitting_set(inst, eps, iter_cap=bound + 1, rng_seed=a.seed, c_net=a.net_c)
    wall = time.perf_counter() - start
    _emit(bg_record(a.instance, _params(a) | {"bg_eps": repr(eps)}, res, bound, wall).text(), a.out)
    print(f"rounds {res.rounds} (bound {bound}), doublings {res.doublings}, "
          f"hitting set {len(res.points or ())}", file=sys.stderr)
    return 0 if res.success and res.step_ratio_ok else 2


def cmd_gen_instance(a) -> int:
    from .finite import format_instance, random_instance

    inst = random_instance(a.points, a.ranges, a.density, a.seed)
    _emit(format_instance(inst), a.out)
    return 0


def cmd_verify(a) -> int:
    from .records import verify_record

    rep = verify_record(a.record, a.instance)
    print("\n".join(rep.lines))
    print("verified" if rep.exit_code == 0 else f"{rep.failed} claim(s) failed")
    return rep.exit_code


COMMANDS = {
    "solve-finite": cmd_solve_finite,
    "solve-gallery": cmd_solve_gallery,
    "bg-finite": cmd_bg_finite,
    "gen-instance": cmd_gen_instance,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    from .mwu import IterationBoundExceeded

    a = build_parser().parse_args(argv)
    try:
        return COMMANDS[a.command](a)
    except IterationBoundExceeded as e:
        print(f"fracthit: {e}", file=sys.stderr)
        return 2
    except (OSError, ValueError, RuntimeError) as e:
        print(f"fracthit: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
