import itertools

import numpy as np
import pytest

from fracthit.finite import (
    BRUTE_FORCE_CAP,
    FiniteInstance,
    InstanceFormatError,
    brute_force_opt,
    disjoint_singletons,
    format_instance,
    load_instance,
    parse_instance,
    random_instance,
)


def test_brute_force_examples():
    assert brute_force_opt(FiniteInstance(3, ((0, 1), (1, 2)), (1.0, 1.0))) == (1, (1,))
    assert brute_force_opt(disjoint_singletons(5))[0] == 5
    pairs = tuple(itertools.combinations(range(4), 2))
    assert brute_force_opt(FiniteInstance(4, pairs, (1.0,) * 6))[0] == 3


def test_brute_force_agrees_with_naive_search():
    for seed in range(15):
        inst = random_instance(8, 12, 0.3, seed)
        size, wit = brute_force_opt(inst)
        assert all(set(R) & set(wit) for R in inst.ranges)
        for k in range(size):
            for S in itertools.combinations(range(8), k):
                assert not all(set(R) & set(S) for R in inst.ranges)


def test_brute_force_cap():
    with pytest.raises(ValueError):
        brute_force_opt(disjoint_singletons(BRUTE_FORCE_CAP + 1))


def test_brute_force_bounded_by_points():
    for seed in range(10):
        inst = random_instance(10, 20, 0.15, seed)
        assert brute_force_opt(inst)[0] <= inst.n_points


def test_random_instance_contract():
    full = random_instance(6, 5, 1.0, 0)
    assert all(R == tuple(range(6)) for R in full.ranges)
    assert brute_force_opt(full)[0] == 1
    assert random_instance(7, 9, 0.3, 11) == random_instance(7, 9, 0.3, 11)
    assert random_instance(7, 9, 0.3, 11) != random_instance(7, 9, 0.3, 12)
    empty = random_instance(5, 0, 0.5, 1)
    assert brute_force_opt(empty) == (0, ())
    with pytest.raises(ValueError):
        random_instance(5, 5, 0.0, 1)


def test_random_instance_has_no_empty_ranges():
    inst = random_instance(5, 200, 0.05, 3)
    assert all(len(R) >= 1 for R in inst.ranges)


def test_instance_validation():
    with pytest.raises(ValueError):
        FiniteInstance(3, ((),), (1.0,))
    with pytest.raises(ValueError):
        FiniteInstance(3, ((0, 3),), (1.0,))
    with pytest.raises(ValueError):
        FiniteInstance(3, ((0,),), (0.0,))


def test_load_roundtrip(tmp_path):
    inst = random_instance(9, 7, 0.4, 2)
    path = tmp_path / "i.txt"
    path.write_text(format_instance(inst))
    assert load_instance(path) == inst


def test_parse_with_comments_and_weights():
    text = "# toy\npoints 3\nw 2.5 : 0 1  # first\n\nw 1 : 2\n"
    inst = parse_instance(text)
    assert inst.ranges == ((0, 1), (2,))
    assert inst.weights == (2.5, 1.0)


@pytest.mark.parametrize("text,lineno", [
    ("points 3\nw 1 :\n", 2),
    ("points 3\nw 0 : 1\n", 2),
    ("points 3\nw -1 : 1\n", 2),
    ("points 3\nw 1 : 0 7\n", 2),
    ("points 3\n# c\nbogus\n", 3),
    ("w 1 : 0\n", 1),
])
def test_parse_errors_carry_line_numbers(text, lineno):
    with pytest.raises(InstanceFormatError, match=f":{lineno}:"):
        parse_instance(text)


def test_parse_missing_header():
    with pytest.raises(InstanceFormatError):
        parse_instance("# nothing\n")


def test_subsystem_traces_are_distinct_subsets():
    inst = random_instance(10, 30, 0.3, 4)
    P = [1, 4, 6, 9]
    tr = inst.subsystem(P)
    assert len(tr) == len(set(tr))
    assert all(t <= frozenset(range(len(P))) for t in tr)
    assert len(tr) <= len(P) ** inst.growth_exponent


def test_membership_and_measure():
    inst = FiniteInstance(3, ((0, 1), (1, 2)), (1.0, 3.0))
    assert inst.membership(1, 0) and not inst.membership(2, 0)
    assert inst.base_measure() == 4.0
    assert inst.base_measure([]) == 0.0
    assert inst.base_measure([1]) == 3.0
    with pytest.raises(KeyError):
        inst.membership(0, 2)


def test_opt_upper_and_delta0():
    inst = random_instance(8, 3, 0.5, 0)
    assert inst.opt_upper_bound == 3
    assert inst.with_opt_upper(2).opt_upper_bound == 2
    assert inst.delta0_estimate() == 1 / 8
    assert FiniteInstance(1, ((0,),), (1.0,)).delta0_estimate() == 1.0


def test_dual_argmax_tie_rule():
    # sample ranges [0, 1]: point 0 is in range 0 only, point 2 in range 1 only
    inst = FiniteInstance(3, ((0,), (2,)), (1.0, 1.0))
    p, depth = inst.dual_argmax([0, 1])
    assert depth == 1
    assert p == 0  # class {sample 0} beats {sample 1}
    p, _ = inst.dual_argmax([1, 0])
    assert p == 2


def test_incidence_read_only():
    inst = random_instance(4, 4, 0.5, 0)
    with pytest.raises(ValueError):
        inst.incidence[0, 0] = 1
    assert isinstance(inst.incidence, np.ndarray)
