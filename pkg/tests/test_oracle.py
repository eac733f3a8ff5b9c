import math

import numpy as np
import pytest

from fracthit.core import UnsupportedOperation
from fracthit.finite import FiniteInstance, random_instance
from fracthit.gallery import GalleryInstance
from fracthit.geometry.polygon import Polygon
from fracthit.mwu import compute_schedule
from fracthit.oracle import (
    OracleConfig,
    WeightSampler,
    check_eps_approximation,
    eps_approx_sample_size,
    exact_max,
    oracle_guarantee_holds,
    sampled_max,
)


def uniform_sampler(inst, weights=None):
    w = np.ones(inst.num_ranges) if weights is None else np.asarray(weights, float)
    p = w / w.sum()
    return WeightSampler(lambda rng, n: rng.choice(inst.num_ranges, size=n, p=p), w.sum())


def test_exact_max_examples():
    inst = FiniteInstance(3, ((0, 1), (1, 2)), (1.0, 1.0))
    r = exact_max(inst, [1.0, 1.0])
    assert (r.point, r.score) == (1, 2.0)
    single = FiniteInstance(4, ((2,),), (5.0,))
    r = exact_max(single, [5.0])
    assert (r.point, r.score) == (2, 5.0)
    r = exact_max(inst, [0.0, 0.0])
    assert (r.point, r.score) == (0, 0.0)


def test_exact_max_matches_dual_class_enumeration():
    for seed in range(10):
        inst = random_instance(9, 14, 0.3, seed)
        w = np.random.default_rng(seed).random(14)
        best = max(sum(w[r] for r in range(14) if q in inst.ranges[r]) for q in range(9))
        assert exact_max(inst, w).score == pytest.approx(best, rel=1e-12)


def test_exact_max_empty_ground_set():
    with pytest.raises(ValueError):
        exact_max(FiniteInstance(0, (), ()), [])


def test_sample_size_regression():
    assert eps_approx_sample_size(1, 1, 0.5, 0.5, 1.0) == math.ceil(32 * math.log(8)) == 67


def test_sample_size_scaling_with_opt():
    for opt in (1, 2, 5, 11):
        n1 = eps_approx_sample_size(3, opt, 0.25, 0.1)
        n2 = eps_approx_sample_size(3, 2 * opt, 0.25, 0.1)
        e = 0.25 / (2 * opt)
        # both sizes are ceilings, so allow one unit of rounding in n2
        assert 4 <= n2 / n1
        assert (n2 - 1) / n1 <= 4 * (1 + math.log(2) / math.log(1 / (e * 0.1)))


def test_sample_size_override_and_validation():
    assert eps_approx_sample_size(14, 4, 0.25, 0.1, override=48) == 48
    with pytest.raises(ValueError):
        eps_approx_sample_size(0, 1, 0.25, 0.1)
    with pytest.raises(ValueError):
        OracleConfig(omega=1.5)


def test_sampled_max_single_range():
    inst = FiniteInstance(5, ((1, 3),), (1.0,))
    r = sampled_max(inst, uniform_sampler(inst), 0.25, 0.1, rng_seed=0,
                    config=OracleConfig(0.25, 0.1, sample_size_override=10))
    assert r.point in (1, 3)
    assert r.score == pytest.approx(1.0)


def test_sampled_max_with_every_range_sampled_is_exact():
    # the sample is the full family: the deepest dual class is the exact argmax
    inst = random_instance(8, 12, 0.3, 4)
    sampler = WeightSampler(lambda rng, n: np.arange(12), 12.0)
    r = sampled_max(inst, sampler, 0.25, 0.1, config=OracleConfig(0.25, 0.1, sample_size_override=12))
    assert r.score == pytest.approx(exact_max(inst, np.ones(12)).score)


def test_sampled_max_large_sample_meets_guarantee():
    inst = random_instance(8, 12, 0.3, 7)
    w = np.random.default_rng(1).random(12) + 0.1
    cfg = OracleConfig(0.25, 0.1, sample_size_override=2000)
    wins = sum(oracle_guarantee_holds(inst, w, sampled_max(inst, uniform_sampler(inst, w), 0.25, 0.1,
                                                           rng_seed=s, config=cfg).point, 0.25)
               for s in range(100))
    assert wins >= 90


def test_sampled_max_on_convex_gallery_hits_everything():
    H = Polygon.from_vertices([(0, 0), (2, 0), (2, 1), (0, 1)])
    inst = GalleryInstance(H)
    eng = inst.mwu_engine(compute_schedule(0.25, 0.05, 0.25, 14, 4))
    p = eng.fresh(np.random.default_rng(0))
    scores, _ = eng.pool_scores()
    assert scores[eng.gid[p]] == pytest.approx(1.0)


def test_eps_approximation_degenerate_cases():
    inst = random_instance(6, 10, 0.4, 2)
    assert check_eps_approximation(np.arange(10), inst, np.ones(10)) == pytest.approx(0.0, abs=1e-15)
    single = FiniteInstance(4, ((0, 2),), (1.0,))
    rng = np.random.default_rng(0)
    assert check_eps_approximation(rng.integers(0, 1, 7), single, [1.0]) == 0.0


def test_eps_approximation_monte_carlo():
    inst = random_instance(8, 10, 0.3, 6)
    w = np.ones(10)
    omega, sigma = 0.5, 0.1
    opt = 2
    eps = omega / (2 * opt)
    N = eps_approx_sample_size(inst.dual_dim_hint, opt, omega, sigma)
    rng = np.random.default_rng(42)
    good = sum(check_eps_approximation(rng.choice(10, size=N), inst, w) <= eps for _ in range(200))
    assert good >= 180


def test_eps_approximation_gallery_area_measure():
    H = Polygon.from_vertices([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)])
    inst = GalleryInstance(H)
    pts = [(0.25, 0.25), (1.5, 0.5), (0.5, 1.5)]
    exact = inst.exact_depths(pts)
    assert exact == pytest.approx([1.0, 2.5 / 3, 2.5 / 3])
    # a sample of the three points themselves
    dev = check_eps_approximation(pts, inst, None, points=pts)
    assert dev == pytest.approx(max(abs(1 - 1.0), abs(2 / 3 - 2.5 / 3)))


def test_eps_approximation_unsupported():
    class NoDepths:
        pass

    with pytest.raises(UnsupportedOperation):
        check_eps_approximation([0], NoDepths(), None)


def test_count_sampling_matches_ordered_sampling_in_distribution():
    from scipy.stats import chi2_contingency

    from fracthit.finite import FiniteInstance

    inst = FiniteInstance(4, ((0,), (1,), (2, 3), (0, 1, 2), (3,)), (1.0, 2.0, 1.0, 1.5, 0.5))
    w = np.array(inst.weights)
    p = w / w.sum()
    n, trials = 5, 6000
    rng = np.random.default_rng(1)
    ordered = np.zeros((4, n + 1))
    counted = np.zeros((4, n + 1))
    for _ in range(trials):
        pt, d = inst.dual_argmax(rng.choice(5, size=n, p=p))
        ordered[pt, d] += 1
        pt, d = inst.dual_argmax_counts(rng.multinomial(n, p), rng)
        counted[pt, d] += 1
    keep = (ordered + counted).ravel() > 0
    table = np.vstack([ordered.ravel()[keep], counted.ravel()[keep]])
    assert chi2_contingency(table).pvalue > 0.001


def test_eps_check_counts_form_matches_sample_form():
    from fracthit.finite import random_instance

    inst = random_instance(9, 14, 0.4, 3)
    rng = np.random.default_rng(0)
    w = rng.random(14)
    sample = rng.integers(0, 14, 500)
    c = np.bincount(sample, minlength=14)
    a = check_eps_approximation(sample, inst, w)
    assert check_eps_approximation(None, inst, w, counts=c) == pytest.approx(a, abs=1e-15)
