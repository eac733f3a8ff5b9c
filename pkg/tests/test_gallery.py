import random

import numpy as np
import pytest

from fracthit.core import check_feasibility
from fracthit.gallery import (
    GalleryInstance,
    comb_guards,
    comb_polygon,
    coverage_fraction,
    gallery_membership,
    gallery_weight_oracle,
    solve_gallery,
    update_on_chosen_point,
)
from fracthit.geometry.overlay import sample_point_in_complex
from fracthit.geometry.polygon import GeometryError, Polygon
from fracthit.geometry.rational import Q
from fracthit.geometry.visibility import visibility_polygon
from fracthit.mwu import compute_schedule

L_SHAPE = Polygon.from_vertices([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)])
SQUARE = Polygon.from_vertices([(0, 0), (1, 0), (1, 1), (0, 1)])


def test_membership_examples():
    q = (Q(1, 3), Q(1, 5))
    assert gallery_membership(L_SHAPE, q, q)
    assert gallery_membership(SQUARE, (0, 0), (1, 1))
    assert gallery_membership(SQUARE, (Q(1, 7), Q(6, 7)), (Q(1, 2), 0))
    assert not gallery_membership(L_SHAPE, (Q(1, 4), Q(7, 4)), (Q(7, 4), Q(1, 2)))
    assert gallery_membership(L_SHAPE, (Q(1, 4), Q(1, 4)), (Q(7, 4), Q(1, 2)))
    with pytest.raises(GeometryError):
        gallery_membership(L_SHAPE, (Q(3, 2), Q(3, 2)), (0, 0))


def test_membership_is_symmetric():
    rng = random.Random(2)
    pts = [(Q(rng.randrange(1, 32), 16), Q(rng.randrange(1, 16), 16)) for _ in range(40)]
    pts = [p for p in pts if L_SHAPE.classify(p) >= 0]
    for a in pts[:10]:
        for b in pts[:10]:
            assert gallery_membership(L_SHAPE, a, b) == gallery_membership(L_SHAPE, b, a)


def test_update_convex_one_step():
    eng = GalleryInstance(SQUARE).tracker(T=1)
    assert update_on_chosen_point(eng, (Q(1, 2), Q(1, 2))) == 0


def test_update_convex_three_steps():
    eng = GalleryInstance(SQUARE).tracker(T=3)
    pts = [(Q(1, 4), Q(1, 4)), (Q(3, 4), Q(1, 2)), (0, 1)]
    got = [update_on_chosen_point(eng, p) for p in pts]
    assert got == [1, 1, 0]


def test_update_comb_drops_by_visible_area():
    H = comb_polygon(2)
    inst = GalleryInstance(H)
    eng = inst.tracker(T=1)
    p = comb_guards(2)[0]
    after = update_on_chosen_point(eng, p)
    assert after == H.area - visibility_polygon(H, p).area
    assert 0 < after < H.area


def test_weight_oracle_examples():
    inst = GalleryInstance(L_SHAPE)
    eng = inst.tracker(T=2, eps=0.5)
    w = gallery_weight_oracle(eng)
    assert w(frozenset()) == 1
    eng.apply((Q(1, 4), Q(1, 4)))
    g = eng.gid[(Q(1, 4), Q(1, 4))]
    assert w(frozenset({g})) == 0.5
    eng.apply((Q(1, 4), Q(1, 4)))
    assert w(frozenset({g})) == 0  # deg == T
    eng3 = inst.tracker(T=3, eps=0.5)
    eng3.apply((Q(1, 4), Q(1, 4)))
    eng3.apply((Q(1, 4), Q(1, 4)))
    assert gallery_weight_oracle(eng3)(frozenset({0})) == 0.25


def test_coverage_examples():
    assert coverage_fraction(SQUARE, [(Q(1, 2), Q(1, 2))]) == 1
    assert coverage_fraction(SQUARE, []) == 0
    assert coverage_fraction(comb_polygon(3), comb_guards(3)) == 1
    assert coverage_fraction(comb_polygon(3), comb_guards(3)[:2]) < 1
    part = coverage_fraction(L_SHAPE, [(Q(7, 4), Q(3, 4))])
    assert part == Q(13, 6) / 3


def test_double_counting_identity():
    H = comb_polygon(3)
    inst = GalleryInstance(H)
    eng = inst.tracker(T=10)
    cx = inst.arrangement([])
    rng = random.Random(4)
    pts = [sample_point_in_complex(cx, lambda l: 1, rng=rng, grid_bits=6) for _ in range(6)]
    for p in pts + pts[:2]:
        eng.apply(p)
    lhs = sum((int(d) * a for d, a in zip(eng.deg, eng.cx.areas)), Q(0))
    rhs = sum((inst.visibility(p).area for p in pts + pts[:2]), Q(0))
    assert lhs == rhs


def test_active_area_is_monotone():
    H = comb_polygon(2)
    inst = GalleryInstance(H)
    eng = inst.tracker(T=2)
    cx = inst.arrangement([])
    rng = random.Random(9)
    last = H.area
    for _ in range(8):
        cur = update_on_chosen_point(eng, sample_point_in_complex(cx, lambda l: 1, rng=rng, grid_bits=6))
        assert cur <= last
        last = cur


def test_range_classes_partition_area():
    inst = GalleryInstance(L_SHAPE)
    pts = [(Q(7, 4), Q(1, 2)), (Q(1, 4), Q(7, 4))]
    classes = list(inst.range_classes(pts))
    assert abs(sum(a for _, a, _ in classes) - 3.0) < 1e-12
    for label, _, r in classes:
        for i, p in enumerate(pts):
            assert (i in label) == gallery_membership(L_SHAPE, p, r)


def test_comb_default_opt_upper_is_vertex_count():
    inst = GalleryInstance(comb_polygon(3))
    assert inst.opt_upper_bound == len(comb_polygon(3))
    assert GalleryInstance(comb_polygon(3), opt_upper=3).opt_upper_bound == 3
    with pytest.raises(TypeError):
        inst.base_measure([1, 2])


@pytest.mark.parametrize("poly,opt", [(SQUARE, 1), (L_SHAPE, 1)])
def test_solve_gallery_small(poly, opt):
    inst = GalleryInstance(poly, opt_upper=opt)
    sched = compute_schedule(0.25, 0.05, 0.25, inst.growth_exponent, opt)
    run = solve_gallery(inst, sched, 3, debug_invariants=True, opt_reference=opt)
    res = run.fractional
    assert res.invariants.ok
    assert res.iterations <= sched.t_max
    assert res.solution.total_mass <= sched.alpha_target * opt + 1e-9
    assert run.feasible_fraction >= 1 - 0.05
    assert check_feasibility(res.solution, inst).feasible_mass_fraction == run.feasible_fraction
    assert run.coverage >= Q(95, 100)
    assert run.coverage == coverage_fraction(poly, run.guards)
    assert res.extras["forced_steps"] == 0


def test_solve_gallery_is_deterministic():
    inst = GalleryInstance(L_SHAPE, opt_upper=1)
    sched = compute_schedule(0.25, 0.05, 0.25, inst.growth_exponent, 1)
    a = solve_gallery(inst, sched, 7)
    b = solve_gallery(GalleryInstance(L_SHAPE, opt_upper=1), sched, 7)
    assert a.guards == b.guards
    assert a.fractional.solution.support == b.fractional.solution.support
