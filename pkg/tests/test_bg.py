import math

import pytest

from fracthit.bg import BG_CONST, bg_binary_search, bg_hitting_set, delta0_estimate, round_bound
from fracthit.finite import FiniteInstance, brute_force_opt, disjoint_singletons, random_instance
from fracthit.gallery import GalleryInstance
from fracthit.geometry.polygon import Polygon

TWO = FiniteInstance(3, ((0, 1), (1, 2)), (1.0, 1.0))


def hits_all(inst, P):
    return all(set(R) & set(P) for R in inst.ranges)


def test_round_bound_constant():
    assert BG_CONST == pytest.approx(1 / (math.log(2) - 0.5))
    assert round_bound(2, 1 / 8) == pytest.approx(BG_CONST * 2 * math.log(8))


def test_common_point_instance():
    inst = FiniteInstance(5, ((0, 2), (2, 3), (1, 2, 4)), (1.0,) * 3)
    for net in ("greedy", "random"):
        res = bg_hitting_set(inst, 0.5, iter_cap=math.ceil(round_bound(1, 1 / 5)), net=net)
        assert res.success and hits_all(inst, res.points)


def test_two_range_fixture_within_bound():
    cap = math.ceil(round_bound(1, 1 / 3))
    for seed in range(10):
        res = bg_hitting_set(TWO, 0.5, iter_cap=cap, rng_seed=seed, net="random")
        assert res.success and hits_all(TWO, res.points) and res.rounds <= cap


def test_cap_zero_returns_none():
    res = bg_hitting_set(TWO, 0.5, iter_cap=0)
    assert res.points is None and not res.success


def test_bookkeeping_and_step_ratio():
    for seed in range(20):
        inst = random_instance(12, 24, 0.2, seed)
        opt = brute_force_opt(inst)[0]
        res = bg_hitting_set(inst, 1 / (2 * opt), iter_cap=500, rng_seed=seed)
        assert res.success and res.step_ratio_ok and res.bookkeeping_ok
        assert res.doublings == len(res.history) == res.rounds - 1


def test_custom_builders_are_used():
    calls = []

    def builder(state, eps, rng):
        calls.append(eps)
        return [1]

    res = bg_hitting_set(TWO, 0.5, net_builder=builder, violation_finder=lambda st, P: None)
    assert res.points == [1] and calls == [0.5]


def test_binary_search_examples():
    inst = FiniteInstance(4, ((0, 3), (1, 3), (3,)), (1.0,) * 3)
    assert bg_binary_search(inst).points == [3]
    k = 4
    res = bg_binary_search(disjoint_singletons(k))
    assert len(res.points) >= k and hits_all(disjoint_singletons(k), res.points)
    res = bg_binary_search(TWO)
    assert len(res.points) <= 2 and hits_all(TWO, res.points)


def test_binary_search_inconsistent_bound():
    inst = disjoint_singletons(4).with_opt_upper(1)
    with pytest.raises(RuntimeError, match="inconsistent"):
        bg_binary_search(inst, net="greedy", c_net=4.0)


def test_delta0():
    assert delta0_estimate(random_instance(8, 3, 0.5, 0)) == 1 / 8
    assert delta0_estimate(FiniteInstance(1, ((0,),), (1.0,))) == 1.0
    sq = Polygon.from_vertices([(0, 0), (1, 0), (1, 1), (0, 1)])
    assert delta0_estimate(GalleryInstance(sq)) == 1e-6
