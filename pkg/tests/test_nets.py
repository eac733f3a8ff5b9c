import itertools
import math

import numpy as np
import pytest

from fracthit.core import FractionalSolution
from fracthit.finite import FiniteInstance, brute_force_opt, disjoint_singletons, random_instance
from fracthit.mwu import compute_schedule, solve_fractional
from fracthit.nets import (
    NetConstructionError,
    NetRequest,
    greedy_net,
    heavy_classes,
    net_sample_size,
    random_net,
    reduce_to_unweighted,
    round_to_hitting_set,
    verify_net,
)

TWO = FiniteInstance(3, ((0, 1), (1, 2)), (1.0, 1.0))


def heavy_ranges(inst, sol, eps):
    """Ranges with μ(R) >= eps·μ(Q), by direct enumeration."""
    mass = dict(sol.support)
    return [r for r, R in enumerate(inst.ranges)
            if sum(mass.get(p, 0.0) for p in R) >= eps * sol.total_mass * (1 - 1e-9)]


def test_net_sample_size():
    assert net_sample_size(0.5, 2, 4.0) == math.ceil(4 * 4 * math.log(2) + 2)
    assert net_sample_size(1.0, 3) == 3


def test_net_request_validation():
    sol = FractionalSolution.from_masses([(0, 1.0)])
    with pytest.raises(ValueError):
        NetRequest(0.0, sol)
    with pytest.raises(ValueError):
        NetRequest(0.5, FractionalSolution.from_masses([]))


def test_random_net_vacuous_and_nonvacuous():
    sol = FractionalSolution.from_masses([(0, 1.0), (2, 1.0)])
    # eps = 1 : heavy iff the range holds all the mass; no range contains both 0 and 2
    assert random_net(TWO, NetRequest(1.0, sol), 1, rng_seed=0) == []
    net = random_net(TWO, NetRequest(0.5, sol), 1, rng_seed=0)
    assert net and verify_net(net, TWO, sol, 0.5) is None


def test_random_net_point_mass():
    inst = random_instance(8, 12, 0.4, 3)
    sol = FractionalSolution.from_masses([(5, 2.0)])
    assert random_net(inst, NetRequest(0.1, sol), 3, rng_seed=1) == [5]


def test_random_net_failure_reports_range():
    inst = FiniteInstance(4, ((0,), (1,), (2,), (3,)), (1.0,) * 4)
    sol = FractionalSolution.from_masses([(i, 1.0) for i in range(4)])
    with pytest.raises(NetConstructionError) as e:
        random_net(inst, NetRequest(0.25, sol, confidence_retries=1, c_net=1e-9), 0, rng_seed=0)
    assert e.value.violating in range(4)


def test_verify_net_examples():
    sol = FractionalSolution.from_masses([(0, 0.5), (1, 0.5)])
    assert verify_net(sol.points, TWO, sol, 0.3) is None
    assert verify_net([], TWO, sol, 1.0) == 0  # range {0,1} holds all the mass
    assert verify_net([], TWO, sol, 1.5) is None


def test_verify_net_against_enumeration():
    for seed in range(10):
        inst = random_instance(7, 10, 0.35, seed)
        rng = np.random.default_rng(seed)
        sol = FractionalSolution.from_masses([(p, float(m)) for p, m in enumerate(rng.random(7))])
        for eps in (0.2, 0.4):
            heavy = heavy_ranges(inst, sol, eps)
            for P in itertools.combinations(range(7), 2):
                missed = [r for r in heavy if not set(inst.ranges[r]) & set(P)]
                v = verify_net(list(P), inst, sol, eps)
                assert (v is None) == (not missed)
                if v is not None:
                    assert v in missed


def test_greedy_net_examples():
    uniform = FractionalSolution.from_masses([(i, 1.0) for i in range(3)])
    assert greedy_net(TWO, uniform, 0.3, reduction=False) == [1]
    assert greedy_net(TWO, uniform, 0.3) == [1]
    assert greedy_net(TWO, uniform, 2.0, reduction=False) == []
    k = 5
    inst = disjoint_singletons(k)
    sol = FractionalSolution.from_masses([(i, 1.0) for i in range(k)])
    assert sorted(greedy_net(inst, sol, 1 / k, reduction=False)) == list(range(k))


def test_greedy_net_is_a_net_and_not_larger_than_heavy_count():
    for seed in range(10):
        inst = random_instance(10, 18, 0.25, seed)
        rng = np.random.default_rng(seed)
        sol = FractionalSolution.from_masses([(p, float(m)) for p, m in enumerate(rng.random(10))])
        for eps in (0.15, 0.3):
            net = greedy_net(inst, sol, eps)
            assert verify_net(net, inst, sol, eps) is None
            exact = greedy_net(inst, sol, eps, reduction=False)
            assert len(exact) <= len(heavy_ranges(inst, sol, eps))


def test_weighted_to_unweighted_copies():
    sol = FractionalSolution.from_masses([(0, 3.0), (1, 1.0)])
    # K = 2: floor(3·2/4 + 1) = 2, floor(1·2/4 + 1) = 1
    assert reduce_to_unweighted(sol) == [2, 1]
    assert reduce_to_unweighted(sol, K=8) == [7, 3]


def test_round_point_mass():
    inst = FiniteInstance(2, ((1,),), (1.0,))
    assert round_to_hitting_set(FractionalSolution.from_masses([(1, 1.0)]), inst, 1, 0) == [1]


def test_round_solver_output_two_range_fixture():
    s = compute_schedule(0.25, 0.1, 0.25, TWO.growth_exponent, TWO.opt_upper_bound)
    sol = solve_fractional(TWO, s).solution
    for strategy in ("random", "best"):
        H = round_to_hitting_set(sol, TWO, TWO.vc_dim_hint, 0, strategy=strategy)
        assert all(set(R) & set(H) for R in TWO.ranges)
        assert len(H) <= 2


def test_heavy_classes_use_exact_counts_at_threshold():
    sol = FractionalSolution.from_multiset([0, 0, 1], 2)  # masses 1 and 1/2, total 3/2
    cls = heavy_classes(TWO, sol, 1 / sol.total_mass)
    # range {0,1} has mass 3/2 >= 1, range {1,2} has 1/2 < 1
    assert [tr for tr, _ in cls] == [frozenset({0, 1})]


@pytest.mark.parametrize("seed", range(5))
def test_round_random_instances(seed):
    inst = random_instance(12, 20, 0.25, seed)
    s = compute_schedule(0.25, 0.05, 0.25, inst.growth_exponent, inst.opt_upper_bound)
    sol = solve_fractional(inst, s).solution
    H = round_to_hitting_set(sol, inst, inst.vc_dim_hint, seed)
    idx = {p: i for i, p in enumerate(sol.points)}
    for R in inst.ranges:
        if sol.reaches_one([idx[p] for p in R if p in idx]):
            assert set(R) & set(H)
    assert len(H) >= brute_force_opt(inst)[0] or not all(set(R) & set(H) for R in inst.ranges)
