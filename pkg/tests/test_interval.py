import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from certopt.interval import (PI, Box, CannotBranch, DomainError, Interval, arith, bisect,
                              elem, hull, intersect, widest_index)

mpmath.mp.prec = 200

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)
tiny_or_big = st.one_of(finite, st.floats(min_value=-1e300, max_value=1e300),
                        st.floats(min_value=-1e-300, max_value=1e-300))


@st.composite
def intervals(draw, elements=finite):
    a, b = draw(elements), draw(elements)
    return Interval(min(a, b), max(a, b))


@st.composite
def interval_and_point(draw, elements=finite):
    x = draw(intervals(elements))
    t = draw(st.floats(min_value=0.0, max_value=1.0))
    p = x.lo + t * (x.hi - x.lo)
    return x, min(max(p, x.lo), x.hi)


def contains_exact(x: Interval, value: Fraction) -> bool:
    lo_ok = x.lo == -math.inf or Fraction(x.lo) <= value
    hi_ok = x.hi == math.inf or value <= Fraction(x.hi)
    return lo_ok and hi_ok


def tight(r: Interval, lo: float, hi: float, ulps: int = 1) -> bool:
    """``r`` encloses ``[lo, hi]`` and exceeds it by at most ``ulps`` per side."""
    return Interval(lo, hi) in r and r in Interval(lo, hi).widen(ulps)


def contains_mp(x: Interval, value) -> bool:
    return mpmath.mpf(x.lo) <= value <= mpmath.mpf(x.hi)


# -- examples -------------------------------------------------------------------


def test_add_integers():
    assert tight(arith("add", Interval(1, 2), Interval(3, 4)), 4, 6)


def test_mul_without_square_rule():
    assert tight(arith("mul", Interval(-1, 4), Interval(-1, 4)), -4, 16)


def test_div_spanning_zero_is_entire():
    r = arith("div", Interval(1, 1), Interval(-1, 1))
    assert r.lo == -math.inf and r.hi == math.inf


def test_div_by_half_open_zero_gives_half_line():
    r = arith("div", Interval(1, 2), Interval(0, 1))
    assert r.hi == math.inf and 0.0 < r.lo <= 1.0


def test_div_zero_by_zero_is_empty():
    assert arith("div", Interval(0), Interval(0)).is_empty


def test_even_power_spanning_zero():
    assert tight(elem("pow_k", Interval(-1, 4), 2), 0, 16)
    # two squarings, each widened by one ulp
    assert tight(elem("pow_k", Interval(-1, 4), 4), 0, 256, ulps=3)
    assert elem("pow_k", Interval(-1, 4), 4).lo == 0.0


def test_odd_power_keeps_sign():
    assert tight(elem("pow_k", Interval(-1, 4), 3), -1, 64, ulps=2)


def test_sin_over_pi_enclosure():
    r = elem("sin", Interval(0.0, PI.hi))
    assert r.hi == 1.0
    assert r.lo <= 0.0 and r.lo > -1e-15


def test_sin_cos_wide_argument_is_unit():
    assert elem("sin", Interval(0, 7)) == Interval(-1, 1)
    assert elem("cos", Interval(-10, 10)) == Interval(-1, 1)


def test_cos_critical_point_at_zero():
    r = elem("cos", Interval(-0.1, 0.2))
    assert r.hi == 1.0 and r.lo <= math.cos(0.2)


def test_exp_and_abs():
    r = elem("exp", Interval(0, 1))
    assert r.lo <= 1.0 <= r.hi and r.lo <= math.e <= r.hi
    assert elem("abs", Interval(-3, 2)) == Interval(0, 3)  # exact: no rounding involved
    assert elem("abs", Interval(-3, -2)) == Interval(2, 3)


def test_sqrt_clamps_partially_negative():
    r = elem("sqrt", Interval(-1, 4))
    assert r.lo == 0.0 and 2.0 <= r.hi <= math.nextafter(2.0, 3.0)


def test_sqrt_of_negative_interval_raises():
    with pytest.raises(DomainError):
        elem("sqrt", Interval(-2, -1))


def test_unknown_function_and_bad_exponent():
    with pytest.raises(ValueError):
        elem("tan", Interval(0, 1))
    with pytest.raises(ValueError):
        elem("pow_k", Interval(0, 1), -2)
    with pytest.raises(ValueError):
        arith("pow", Interval(0, 1), Interval(0, 1))


def test_intersect_examples():
    assert intersect(Interval(0, 2), Interval(1, 3)) == Interval(1, 2)
    assert intersect(Interval(0, 1), Interval(2, 3)).is_empty
    assert intersect(Interval(-7, 14), Interval(-math.inf, -3)) == Interval(-7, -3)


def test_hull_ignores_empty():
    assert hull(Interval.empty(), Interval(1, 2)) == Interval(1, 2)
    assert hull(Interval(-1, 0), Interval(1, 2)) == Interval(-1, 2)


def test_constructor_rejects_bad_bounds():
    with pytest.raises(ValueError):
        Interval(2, 1)
    with pytest.raises(ValueError):
        Interval(math.nan, 1)


def test_pi_encloses_real_pi():
    assert contains_mp(PI, mpmath.pi)
    assert PI.hi == math.nextafter(PI.lo, 4.0)


def test_bisect_widest_component():
    left, right = bisect(Box([(0, 4), (0, 1)]))
    assert left == Box([(0, 2), (0, 1)]) and right == Box([(2, 4), (0, 1)])


def test_bisect_tie_breaks_on_lowest_index():
    left, right = bisect(Box([(0, 1), (0, 1)]))
    assert left[0] == Interval(0, 0.5) and left[1] == Interval(0, 1)


def test_bisect_one_dimensional():
    left, right = bisect(Box([(-1, 4)]))
    assert left == Box([(-1, 1.5)]) and right == Box([(1.5, 4)])


def test_bisect_degenerate_box_cannot_branch():
    with pytest.raises(CannotBranch):
        bisect(Box([(1, 1), (2, 2)]))


def test_widest_index_ties():
    assert widest_index([0, 0, 0], [1, 2, 2]) == 1


def test_midpoint_of_huge_interval_is_finite():
    x = Interval(-1.7e308, 1.7e308)
    assert math.isfinite(x.mid) and x.lo <= x.mid <= x.hi


def test_box_measures():
    B = Box([(0, 1), (2, 5)])
    assert B.n == 2 and B.width == 3 and B.mid == [0.5, 3.5]
    assert [0.5, 4] in B and [2, 4] not in B


# -- properties -------------------------------------------------------------------

OPS = {"add": lambda a, b: a + b, "sub": lambda a, b: a - b,
       "mul": lambda a, b: a * b, "div": lambda a, b: a / b}


@settings(max_examples=400)
@given(st.sampled_from(sorted(OPS)), interval_and_point(tiny_or_big),
       interval_and_point(tiny_or_big))
def test_arith_inclusion_exact(op, xp, yp):
    (X, x), (Y, y) = xp, yp
    if op == "div":
        assume(y != 0.0)
    exact = OPS[op](Fraction(x), Fraction(y))
    assert contains_exact(arith(op, X, Y), exact)


@settings(max_examples=300)
@given(st.sampled_from(["sin", "cos", "exp", "sqrt", "abs"]),
       interval_and_point(st.floats(min_value=-700, max_value=700)))
def test_elem_inclusion(fn, xp):
    X, x = xp
    if fn == "sqrt":
        assume(x >= 0.0)
    ref = {"sin": mpmath.sin, "cos": mpmath.cos, "exp": mpmath.exp, "sqrt": mpmath.sqrt,
           "abs": abs}[fn](mpmath.mpf(x))
    assert contains_mp(elem(fn, X), ref)


@settings(max_examples=300)
@given(interval_and_point(st.floats(min_value=-50, max_value=50)), st.integers(0, 21))
def test_pow_inclusion(xp, k):
    X, x = xp
    assert contains_exact(elem("pow_k", X, k), Fraction(x) ** k)


@given(st.sampled_from(sorted(OPS)), intervals(), intervals(), intervals(), intervals())
def test_arith_monotone(op, X, Y, dx, dy):
    Xb = hull(X, dx)
    Yb = hull(Y, dy)
    assert arith(op, X, Y) in arith(op, Xb, Yb)


@given(st.sampled_from(["sin", "cos", "exp", "abs"]), intervals(st.floats(-600, 600)),
       intervals(st.floats(-600, 600)))
def test_elem_monotone(fn, X, dx):
    assert elem(fn, X) in elem(fn, hull(X, dx))


@given(st.sampled_from(sorted(OPS)), intervals())
def test_empty_is_absorbing(op, X):
    E = Interval.empty()
    assert arith(op, E, X).is_empty and arith(op, X, E).is_empty
    for fn in ("sin", "cos", "exp", "sqrt", "abs"):
        assert elem(fn, E).is_empty
    assert elem("pow_k", E, 3).is_empty


@settings(max_examples=300)
@given(st.sampled_from(sorted(OPS)), finite, finite)
def test_one_ulp_perturbation(op, a, b):
    """Point intervals: the exact result is inside and the bounds are at most
    one ulp away from the rounded-to-nearest result."""
    if op == "div":
        assume(b != 0.0)
    r = arith(op, Interval(a), Interval(b))
    exact = OPS[op](Fraction(a), Fraction(b))
    assert contains_exact(r, exact)
    nearest = OPS[op](a, b)
    if exact != 0:
        assert r.lo >= math.nextafter(nearest, -math.inf)
        assert r.hi <= math.nextafter(nearest, math.inf)


@pytest.mark.parametrize("fn", ["sin", "cos"])
def test_critical_points_near_representability(fn):
    # arguments within a few ulps of k*pi/2, where the extremum test is delicate
    f = {"sin": mpmath.sin, "cos": mpmath.cos}[fn]
    for k in range(-40, 41):
        c = k * math.pi / 2
        for d in (-3, -1, 0, 1, 3):
            x = c
            for _ in range(abs(d)):
                x = math.nextafter(x, math.copysign(math.inf, d))
            X = Interval(x, math.nextafter(x, math.inf))
            r = elem(fn, X)
            assert contains_mp(r, f(mpmath.mpf(x))) and contains_mp(r, f(mpmath.mpf(X.hi)))


def test_fuzz_inclusion_10k(rng):
    """10^4 random points drawn from random intervals, every operation."""
    for _ in range(10_000):
        a, b = sorted((rng.uniform(-100, 100), rng.uniform(-100, 100)))
        c, d = sorted((rng.uniform(-100, 100), rng.uniform(-100, 100)))
        x, y = rng.uniform(a, b), rng.uniform(c, d)
        X, Y = Interval(a, b), Interval(c, d)
        for op, f in OPS.items():
            if op == "div" and y == 0.0:
                continue
            assert contains_exact(arith(op, X, Y), f(Fraction(x), Fraction(y)))
        assert contains_mp(elem("sin", X), mpmath.sin(x))
        assert contains_mp(elem("cos", X), mpmath.cos(x))
        assert contains_mp(elem("exp", Interval(a / 10, b / 10)), mpmath.exp(mpmath.mpf(x / 10)))
        if b >= 0.0:
            assert contains_mp(elem("sqrt", X), mpmath.sqrt(mpmath.mpf(max(x, 0.0))))
        assert abs(x) in elem("abs", X)
        assert contains_exact(elem("pow_k", X, 3), Fraction(x) ** 3)
