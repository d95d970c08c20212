import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from certopt import benchmarks, tape
from certopt._pykernel import DROP, MONOTONE
from certopt.contractor import (DISCARD, KEEP, Constraint, fixpoint_contract, hc4_revise,
                                stationarity_prune, width_sum)
from certopt.expr import fabs, sin, var
from certopt.interval import Box, Interval
from helpers import random_point, random_subbox

x, y = var(0), var(1)


def close_box(B, expected, ulps=4):
    return all(Interval(*e) in c and c in Interval(*e).widen(ulps)
               for c, e in zip(B, expected))


# -- hc4_revise --------------------------------------------------------------------


def test_hc4_linear():
    B = hc4_revise(Constraint.leq(x + y - 1), Box([(0, 2), (0.5, 1)]))
    assert close_box(B, [(0, 0.5), (0.5, 1)])


def test_hc4_even_power():
    B = hc4_revise(Constraint.leq(x ** 2 - 4), Box([(0, 10)]))
    assert close_box(B, [(0, 2)])


def test_hc4_proves_infeasible():
    assert hc4_revise(Constraint.leq(x + y + 5), Box([(0, 1), (0, 1)])).is_empty


def test_hc4_normalizations():
    # 1 <= x  and  x >= 1 describe the same set
    a = hc4_revise(Constraint.geq(x, 1.0), Box([(0, 3)]))
    b = hc4_revise(Constraint.leq(1.0, x), Box([(0, 3)]))
    assert a == b and close_box(a, [(1, 3)])


def test_hc4_abs_keeps_both_branches():
    B = hc4_revise(Constraint.leq(fabs(x) - 1), Box([(-5, 5)]))
    assert close_box(B, [(-1, 1)])


def test_hc4_sin_branches():
    # sin x <= -0.5 on [0, 6]: only [7π/6, 11π/6] survives
    B = hc4_revise(Constraint.leq(sin(x) + 0.5), Box([(0, 6)]))
    lo, hi = B[0].lo, B[0].hi
    assert lo <= 7 * math.pi / 6 and hi >= 11 * math.pi / 6
    assert lo > 3.6 and hi < 5.8


def test_hc4_sin_over_a_full_period_is_not_contracted():
    assert hc4_revise(Constraint.leq(sin(x) + 0.5), Box([(0, 7)])) == Box([(0, 7)])


def test_hc4_on_empty_box_is_empty():
    assert hc4_revise(Constraint.leq(x), Box([Interval.empty()])).is_empty


# -- fixpoint --------------------------------------------------------------------------


def test_fixpoint_at_fixpoint_unchanged():
    B = Box([(0, 0.5), (0.5, 1)])
    assert fixpoint_contract([Constraint.leq(x + y - 1)], B) == B


def test_fixpoint_two_sided_pins_point():
    B = fixpoint_contract([Constraint.leq(x), Constraint.leq(-x)], Box([(-1, 1)]))
    assert B[0] == Interval(0, 0)


def test_fixpoint_keane_excludes_origin():
    p = benchmarks.make_problem("keane", 2)
    B = fixpoint_contract(p.constraints, p.domain)
    assert B[0].lo >= 0.075 - 1e-12 and B[1].lo >= 0.075 - 1e-12
    assert B[0].hi == 10 and B[1].hi == 10


def test_fixpoint_with_objective_cut():
    # x^2 <= 1 on [-3, 3] via the cut-off constraint
    B = fixpoint_contract([], Box([(-3, 3)]), objective=x ** 2, f_ub=1.0)
    assert close_box(B, [(-1, 1)])


def test_fixpoint_needs_several_passes():
    # y <= x - 1 and x <= y / 2 on the positive quadrant has no solution; one
    # pass alone does not see it
    cs = [Constraint.leq(y - x + 1), Constraint.leq(x - y / 2)]
    B = Box([(0, 10), (0, 10)])
    one = B
    for c in cs:
        one = hc4_revise(c, one)
    assert not one.is_empty
    assert fixpoint_contract(cs, B, rtol=0.0).is_empty


# -- properties --------------------------------------------------------------------------


@pytest.mark.parametrize("n", [2, 3, 4])
def test_keane_contraction_is_sound(n):
    p = benchmarks.make_problem("keane", n)
    rng = random.Random(n)
    survived = 0
    while survived < 10_000:
        lo, hi = random_subbox(rng, p.domain.lo, p.domain.hi, rng.choice([1.0, 0.3, 0.05]))
        pts = []
        for _ in range(200):
            pt = random_point(rng, lo, hi)
            # a small margin keeps float-rounded feasibility honest
            if all(v <= -1e-9 for v in p.constraint_values(pt)):
                pts.append(pt)
            if len(pts) == 25:
                break
        if not pts:
            continue
        C = fixpoint_contract(p.constraints, Box.from_bounds(lo, hi))
        assert not C.is_empty
        for pt in pts:
            assert pt in C
        survived += len(pts)


@pytest.mark.parametrize("name", ["keane", "rana", "egg_holder", "shekel"])
def test_contractance(name):
    p = benchmarks.make_problem(name, 3)
    cs = list(p.constraints) or [Constraint.leq(p.objective, p.known_minimum.value + 50.0)]
    rng = random.Random(3)
    for _ in range(300):
        lo, hi = random_subbox(rng, p.domain.lo, p.domain.hi)
        B = Box.from_bounds(lo, hi)
        for c in cs:
            C = hc4_revise(c, B)
            assert C.is_empty or all(ci.subset(bi) for ci, bi in zip(C, B))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([2, 3, 4]))
def test_fixpoint_idempotent(seed, n):
    p = benchmarks.make_problem("keane", n)
    rng = random.Random(seed)
    lo, hi = random_subbox(rng, p.domain.lo, p.domain.hi)
    once = fixpoint_contract(p.constraints, Box.from_bounds(lo, hi))
    twice = fixpoint_contract(p.constraints, once)
    if once.is_empty:
        assert twice.is_empty
        return
    assert all(t.subset(o) for t, o in zip(twice, once))
    w1, w2 = width_sum(once.lo, once.hi), width_sum(twice.lo, twice.hi)
    assert w2 >= 0.99 * w1 - 1e-12


# -- stationarity ------------------------------------------------------------------------


def test_stationarity_examples():
    D = Box([(-10, 10)])
    assert stationarity_prune(x ** 2, Box([(1, 2)]), D) == DISCARD
    assert stationarity_prune(x ** 2, Box([(-1, 1)]), D) == KEEP
    assert stationarity_prune(x ** 2, Box([(1, 10)]), D) == KEEP  # touches the boundary


def test_stationarity_keeps_abs_kinks():
    D = Box([(-10, 10)])
    # |x| + x is monotone on each side but the kink makes the test inapplicable
    assert stationarity_prune(fabs(x) + 2 * x, Box([(-1, 1)]), D) == KEEP
    assert stationarity_prune(fabs(x) + 2 * x, Box([(1, 2)]), D) == DISCARD


def _boxes_around(rng, pt, lo, hi, count):
    for _ in range(count):
        blo, bhi = [], []
        for v, a, b in zip(pt, lo, hi):
            r1 = 10 ** rng.uniform(-5, math.log10(b - a))
            r2 = 10 ** rng.uniform(-5, math.log10(b - a))
            blo.append(max(a, v - r1))
            bhi.append(min(b, v + r2))
        yield blo, bhi


REFERENCE = [(r["function"], r["n"]) for r in benchmarks.reference_minima()
             if r["solution"] is not None and r["n"] <= 6]


@pytest.mark.parametrize("name,n", REFERENCE)
def test_stationarity_never_discards_minimizers(name, n):
    p = benchmarks.make_problem(name, n)
    sol = p.known_minimum.solution
    rng = random.Random(n)
    for blo, bhi in _boxes_around(rng, sol, p.domain.lo, p.domain.hi, 200):
        if not p.constraints:
            B = Box.from_bounds(blo, bhi)
            assert stationarity_prune(p.objective, B, p.domain) == KEEP
        # the solver's box step must keep the box too (constraints included)
        fk = p.objective.tape.kernel
        cks = [c.body.tape.kernel for c in p.constraints]
        proc = tape.processor_class(fk.backend)(fk, cks, p.domain.lo, p.domain.hi)
        code = proc.process(list(blo), list(bhi), -math.inf, math.inf, 1e-6)[0]
        assert code not in (DROP, MONOTONE)
