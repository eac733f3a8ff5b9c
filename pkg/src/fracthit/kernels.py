"""Numeric hot loops with two interchangeable backends.

``FRACTHIT_BACKEND=numba`` (the default when numba imports) compiles the
loops with ``@njit``; ``FRACTHIT_BACKEND=numpy`` uses vectorised numpy
versions with identical semantics.  Argmax ties are broken towards the
smallest index among candidates within a relative 1e-12 of the maximum,
so the two backends agree even though their summation orders differ.
"""

from __future__ import annotations

import itertools
import os

import numpy as np

TIE_REL = 1e-12

# status codes shared by both pool-batch implementations
DONE, NEED_BETTER, SHIFTED, BATCH_FULL, OVER_TMAX = 0, 1, 2, 3, 4

try:  # pragma: no cover - depends on the environment
    import numba
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


def _choose_backend() -> str:
    want = os.environ.get("FRACTHIT_BACKEND", "").strip().lower()
    if want in ("numpy", "python", "off"):
        return "numpy"
    if want == "numba" and not HAVE_NUMBA:
        raise RuntimeError("FRACTHIT_BACKEND=numba but numba is not importable")
    return "numba" if HAVE_NUMBA else "numpy"


BACKEND = _choose_backend()

if HAVE_NUMBA:  # pragma: no cover - thread count is environment specific
    _threads = os.environ.get("FRACTHIT_THREADS")
    if _threads:
        try:
            numba.set_num_threads(max(1, min(int(_threads), numba.config.NUMBA_NUM_THREADS)))
        except ValueError:
            pass


# ---------------------------------------------------------------------------
# numpy reference implementations


def _argmax_tie_np(scores: np.ndarray) -> int:
    mx = scores.max()
    return int(np.flatnonzero(scores >= mx * (1.0 - TIE_REL))[0]) if mx > 0 else 0


def _mwu_finite_np(inc, w0, eps, T, stop_measure, t_max, chosen, ratio, log_phi, act_meas):
    m, n = inc.shape
    incf = inc.astype(np.float64)
    hits = np.zeros(m, np.int64)
    active = np.ones(m, np.bool_)
    lq = np.log1p(-eps)
    lw0 = np.log(w0)
    act = w0.sum()
    t = 0
    while True:
        if not active.any():
            log_phi[t] = -np.inf
            act_meas[t] = 0.0
            return t
        lw = np.where(active, hits * lq + lw0, -np.inf)
        mx = lw.max()
        w = np.exp(lw - mx)
        phi = w.sum()
        log_phi[t] = mx + np.log(phi)
        act_meas[t] = act
        if act < stop_measure:
            return t
        if t >= t_max:
            return -1
        scores = w @ incf
        best = _argmax_tie_np(scores)
        chosen[t] = best
        ratio[t] = scores[best] / phi
        hit = (inc[:, best] != 0) & active
        hits[hit] += 1
        done = hit & (hits >= T)
        if done.any():
            active &= ~done
            act = w0[active].sum()
        t += 1


def _pool_batch_np(
    indptr, cells_of, area, deg, mult, T, eps, stop_area, t0, t_max, hard_ratio,
    tv_threshold, ref, max_steps, chosen, ratio, log_phi, act_out,
):
    C = area.shape[0]
    G = mult.shape[0]
    lq = np.log1p(-eps)
    la = np.log(area)
    active = deg < T
    act = area[active].sum()
    seg = np.repeat(np.arange(G), np.diff(indptr))
    steps = 0
    while True:
        t = t0 + steps
        if act < stop_area:
            return steps, DONE
        if t >= t_max:
            return steps, OVER_TMAX
        if steps >= max_steps:
            return steps, BATCH_FULL
        lw = np.where(active, deg * lq + la, -np.inf)
        mx = lw.max()
        w = np.exp(lw - mx)
        phi = w.sum()
        if tv_threshold > 0 and 0.5 * np.abs(w / phi - ref).sum() > tv_threshold:
            return steps, SHIFTED
        scores = np.zeros(G)
        np.add.at(scores, seg, w[cells_of])
        best = _argmax_tie_np(scores)
        r = scores[best] / phi
        if r < hard_ratio:
            return steps, NEED_BETTER
        chosen[steps] = best
        ratio[steps] = r
        log_phi[steps] = mx + np.log(phi)
        act_out[steps] = act
        mult[best] += 1
        cs = cells_of[indptr[best] : indptr[best + 1]]
        deg[cs] += 1
        sat = cs[deg[cs] == T]
        if sat.size:
            active[sat] = False
            act = area[active].sum()
        steps += 1


def _dual_counts_np(inc, sample):
    return inc[sample].sum(axis=0, dtype=np.int64)


def _greedy_cover_np(inc):
    h, n = inc.shape
    unhit = np.ones(h, np.bool_)
    picks = []
    incb = inc != 0
    while unhit.any():
        cover = incb[unhit].sum(axis=0)
        p = int(np.argmax(cover))
        if cover[p] == 0:
            return np.zeros(0, np.int64)
        picks.append(p)
        unhit &= ~incb[:, p]
    return np.array(picks, np.int64)


def _min_hitting_mask_np(masks, n):
    masks = [int(x) for x in masks]
    if not masks:
        return 0
    for k in range(0, n + 1):
        for combo in itertools.combinations(range(n), k):
            s = 0
            for i in combo:
                s |= 1 << i
            if all(m & s for m in masks):
                return s
    return -1


# ---------------------------------------------------------------------------
# numba implementations

if HAVE_NUMBA:

    @njit(cache=True)
    def _argmax_tie_nb(scores):
        mx = scores[0]
        for i in range(1, scores.shape[0]):
            if scores[i] > mx:
                mx = scores[i]
        if mx <= 0:
            return 0
        thr = mx * (1.0 - TIE_REL)
        for i in range(scores.shape[0]):
            if scores[i] >= thr:
                return i
        return 0

    @njit(cache=True)
    def _mwu_finite_nb(inc, w0, eps, T, stop_measure, t_max, chosen, ratio, log_phi, act_meas):
        m, n = inc.shape
        hits = np.zeros(m, np.int64)
        active = np.ones(m, np.bool_)
        lq = np.log1p(-eps)
        lw0 = np.log(w0)
        w = np.empty(m)
        scores = np.empty(n)
        act = 0.0
        for r in range(m):
            act += w0[r]
        t = 0
        while True:
            mx = -np.inf
            for r in range(m):
                if active[r]:
                    v = hits[r] * lq + lw0[r]
                    if v > mx:
                        mx = v
            phi = 0.0
            for r in range(m):
                if active[r]:
                    w[r] = np.exp(hits[r] * lq + lw0[r] - mx)
                    phi += w[r]
                else:
                    w[r] = 0.0
            log_phi[t] = mx + np.log(phi) if phi > 0 else -np.inf
            act_meas[t] = act
            if act < stop_measure:
                return t
            if t >= t_max:
                return -1
            for p in range(n):
                scores[p] = 0.0
            for r in range(m):
                if w[r] > 0:
                    for p in range(n):
                        if inc[r, p]:
                            scores[p] += w[r]
            best = _argmax_tie_nb(scores)
            chosen[t] = best
            ratio[t] = scores[best] / phi
            changed = False
            for r in range(m):
                if active[r] and inc[r, best]:
                    hits[r] += 1
                    if hits[r] >= T:
                        active[r] = False
                        changed = True
            if changed:
                act = 0.0
                for r in range(m):
                    if active[r]:
                        act += w0[r]
            t += 1

    @njit(cache=True)
    def _pool_batch_nb(
        indptr, cells_of, area, deg, mult, T, eps, stop_area, t0, t_max, hard_ratio,
        tv_threshold, ref, max_steps, chosen, ratio, log_phi, act_out,
    ):
        C = area.shape[0]
        G = mult.shape[0]
        lq = np.log1p(-eps)
        la = np.log(area)
        w = np.empty(C)
        scores = np.empty(G)
        act = 0.0
        for c in range(C):
            if deg[c] < T:
                act += area[c]
        steps = 0
        while True:
            t = t0 + steps
            if act < stop_area:
                return steps, DONE
            if t >= t_max:
                return steps, OVER_TMAX
            if steps >= max_steps:
                return steps, BATCH_FULL
            mx = -np.inf
            for c in range(C):
                if deg[c] < T:
                    v = deg[c] * lq + la[c]
                    if v > mx:
                        mx = v
            phi = 0.0
            for c in range(C):
                if deg[c] < T:
                    w[c] = np.exp(deg[c] * lq + la[c] - mx)
                    phi += w[c]
                else:
                    w[c] = 0.0
            if tv_threshold > 0:
                tv = 0.0
                for c in range(C):
                    tv += abs(w[c] / phi - ref[c])
                if 0.5 * tv > tv_threshold:
                    return steps, SHIFTED
            for g in range(G):
                s = 0.0
                for k in range(indptr[g], indptr[g + 1]):
                    s += w[cells_of[k]]
                scores[g] = s
            best = _argmax_tie_nb(scores)
            r = scores[best] / phi
            if r < hard_ratio:
                return steps, NEED_BETTER
            chosen[steps] = best
            ratio[steps] = r
            log_phi[steps] = mx + np.log(phi)
            act_out[steps] = act
            mult[best] += 1
            sat = False
            for k in range(indptr[best], indptr[best + 1]):
                c = cells_of[k]
                deg[c] += 1
                if deg[c] == T:
                    sat = True
            if sat:
                act = 0.0
                for c in range(C):
                    if deg[c] < T:
                        act += area[c]
            steps += 1

    @njit(cache=True)
    def _dual_counts_nb(inc, sample):
        n = inc.shape[1]
        out = np.zeros(n, np.int64)
        for s in range(sample.shape[0]):
            r = sample[s]
            for p in range(n):
                if inc[r, p]:
                    out[p] += 1
        return out

    @njit(cache=True)
    def _greedy_cover_nb(inc):
        h, n = inc.shape
        unhit = np.ones(h, np.bool_)
        left = h
        picks = np.empty(n, np.int64)
        k = 0
        cover = np.empty(n, np.int64)
        while left > 0:
            for p in range(n):
                cover[p] = 0
            for r in range(h):
                if unhit[r]:
                    for p in range(n):
                        if inc[r, p]:
                            cover[p] += 1
            best = 0
            for p in range(1, n):
                if cover[p] > cover[best]:
                    best = p
            if cover[best] == 0:
                return picks[:0]
            picks[k] = best
            k += 1
            for r in range(h):
                if unhit[r] and inc[r, best]:
                    unhit[r] = False
                    left -= 1
        return picks[:k]

    @njit(cache=True)
    def _min_hitting_mask_nb(masks, n):
        m = masks.shape[0]
        if m == 0:
            return 0
        for k in range(1, n + 1):
            s = (1 << k) - 1
            limit = 1 << n
            while s < limit:
                ok = True
                for i in range(m):
                    if masks[i] & s == 0:
                        ok = False
                        break
                if ok:
                    return s
                # Gosper's hack: next integer with the same popcount
                c = s & -s
                r = s + c
                s = (((r ^ s) >> 2) // c) | r
        return -1


# ---------------------------------------------------------------------------
# public dispatchers


def _pick(name):
    if BACKEND == "numba":
        return globals()[f"_{name}_nb"]
    return globals()[f"_{name}_np"]


def mwu_finite(inc, w0, eps, T, stop_measure, t_max):
    """Run the whole finite MWU loop with the exact oracle.

    Returns (iterations or -1 on t_max overflow, chosen, ratio, log_phi,
    active_measure) where the trace arrays are cut to length.
    """
    cap = int(t_max) + 1
    chosen = np.zeros(cap, np.int64)
    ratio = np.zeros(cap)
    log_phi = np.zeros(cap)
    act = np.zeros(cap)
    inc = np.ascontiguousarray(inc, dtype=np.uint8)
    w0 = np.ascontiguousarray(w0, dtype=np.float64)
    t = _pick("mwu_finite")(inc, w0, float(eps), int(T), float(stop_measure), int(t_max),
                            chosen, ratio, log_phi, act)
    k = cap - 1 if t < 0 else t
    return int(t), chosen[:k], ratio[:k], log_phi[: k + 1], act[: k + 1]


def pool_batch(indptr, cells_of, area, deg, mult, T, eps, stop_area, t0, t_max, hard_ratio,
               tv_threshold, ref, max_steps):
    """Run pooled MWU steps until a stop condition; mutates deg and mult."""
    chosen = np.zeros(max_steps, np.int64)
    ratio = np.zeros(max_steps)
    log_phi = np.zeros(max_steps)
    act = np.zeros(max_steps)
    steps, status = _pick("pool_batch")(
        indptr, cells_of, area, deg, mult, int(T), float(eps), float(stop_area), int(t0),
        int(t_max), float(hard_ratio), float(tv_threshold), ref, int(max_steps),
        chosen, ratio, log_phi, act,
    )
    return int(steps), int(status), chosen[:steps], ratio[:steps], log_phi[:steps], act[:steps]


def dual_counts(inc, sample):
    """For each point, how many sampled ranges (rows of inc) contain it."""
    return _pick("dual_counts")(np.ascontiguousarray(inc, dtype=np.uint8),
                                np.ascontiguousarray(sample, dtype=np.int64))


def greedy_cover(inc):
    """Greedy hitting set for the rows of inc; smallest index wins ties."""
    inc = np.ascontiguousarray(inc, dtype=np.uint8)
    if inc.shape[0] == 0:
        return np.zeros(0, np.int64)
    picks = _pick("greedy_cover")(inc)
    if picks.size == 0:
        raise ValueError("some range to be hit contains no point")
    return picks


def min_hitting_mask(masks, n):
    """Bitmask of a minimum hitting set for ranges given as point bitmasks."""
    return int(_pick("min_hitting_mask")(np.asarray(masks, dtype=np.int64), int(n)))


__all__ = [
    "BACKEND",
    "HAVE_NUMBA",
    "dual_counts",
    "greedy_cover",
    "min_hitting_mask",
    "mwu_finite",
    "pool_batch",
]
