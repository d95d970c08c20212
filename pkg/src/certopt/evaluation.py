"""Interval evaluation of expressions: natural extension, certified point
values and interval gradients."""

from __future__ import annotations

from typing import Sequence

from certopt.expr import OP_NAMES, Expr, to_string
from certopt.interval import Box, DomainError, Interval


def _as_box(B) -> Box:
    return B if isinstance(B, Box) else Box(B)


def _bounds(e: Expr, B: Box):
    ce = e.tape
    if B.n < ce.nvars:
        raise ValueError(f"box has {B.n} components but the expression uses x{ce.nvars - 1}")
    return ce, B.lo, B.hi


def _domain_error(ce, lo, hi) -> DomainError:
    i = ce.first_empty_node(lo, hi)
    node = ce.nodes[i]
    return DomainError(f"{OP_NAMES[node.op]} undefined on the whole argument range "
                       f"at node {i}: {to_string(node)}")


def natural_extension(e: Expr, B) -> Interval:
    """Enclosure of the range of ``e`` over ``B``.

    Every elementary operation is replaced by its outward-rounded interval
    counterpart.

    Raises
    ------
    DomainError
        When some node has no point of its argument in its domain (for
        example ``sqrt`` of an entirely negative interval).
    """
    B = _as_box(B)
    if B.is_empty:
        return Interval.empty()
    ce, lo, hi = _bounds(e, B)
    r = ce.kernel.forward(lo, hi)
    if r[0] > r[1]:
        raise _domain_error(ce, lo, hi)
    return Interval._raw(r)


def certified_point_value(e: Expr, x: Sequence[float]) -> Interval:
    """Interval enclosure of ``e(x)``; its upper bound is rigorous."""
    return natural_extension(e, Box.point(x))


class GradientEnclosure(tuple):
    """Interval gradient; ``kink`` is set when an ``abs`` argument spans 0."""

    kink: bool

    def __new__(cls, components, kink=False):
        obj = super().__new__(cls, components)
        obj.kink = kink
        return obj

    def excludes_zero(self) -> bool:
        return any(0.0 not in g for g in self)


def gradient_enclosure(e: Expr, B) -> GradientEnclosure:
    """Forward-mode interval AD of ``e`` over ``B`` (one component per
    box dimension; ``abs`` uses the three-case subderivative)."""
    B = _as_box(B)
    ce, lo, hi = _bounds(e, B)
    r = ce.kernel.forward(lo, hi)
    if r[0] > r[1]:
        raise _domain_error(ce, lo, hi)
    glo, ghi, kink = ce.kernel.gradient(lo, hi)
    comps = [Interval._raw((glo[j], ghi[j])) if j < ce.nvars else Interval(0.0)
             for j in range(B.n)]
    return GradientEnclosure(comps, kink)
