"""Contractors: HC4 revision of inequality constraints, fixpoint
propagation, and the first-order stationarity test.

All contractors work on mutable ``lo``/``hi`` float lists internally; the
:class:`~certopt.interval.Box` wrappers are for callers outside the solver
loop.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import inf
from typing import Sequence

from certopt.expr import Expr, as_expr
from certopt.interval import Box, Interval

KEEP = "keep"
DISCARD = "discard"

#: a pass that shrinks the summed width by less than this fraction ends the
#: fixpoint loop
FIXPOINT_RTOL = 0.01
_MAX_PASSES = 100


@dataclass(frozen=True)
class Constraint:
    """Inequality ``body(x) <= 0``."""

    body: Expr

    @classmethod
    def leq(cls, lhs, rhs=0.0) -> Constraint:
        """Normalize ``lhs <= rhs`` to ``lhs - rhs <= 0``."""
        if isinstance(rhs, (int, float)) and rhs == 0:
            return cls(as_expr(lhs))
        return cls(as_expr(lhs) - as_expr(rhs))

    @classmethod
    def geq(cls, lhs, rhs=0.0) -> Constraint:
        """Normalize ``lhs >= rhs`` to ``rhs - lhs <= 0``."""
        return cls(as_expr(rhs) - as_expr(lhs))

    def __call__(self, x: Sequence[float]) -> float:
        return self.body(x)


def empty_box(n: int) -> Box:
    return Box([Interval.empty()] * n)


def width_sum(lo, hi) -> float:
    s = 0.0
    for a, b in zip(lo, hi):
        s += b - a
    return s


def contract_lists(revisers, lo, hi, rtol=FIXPOINT_RTOL):
    """Fixpoint loop over ``(kernel, tlo, thi)`` triples on float lists.

    Returns the list of root enclosures from the last pass (one per
    reviser), or ``None`` when the box is emptied.
    """
    w = width_sum(lo, hi)
    for _ in range(_MAX_PASSES):
        roots = []
        for kernel, tlo, thi in revisers:
            r = kernel.revise(lo, hi, tlo, thi)
            if r is None:
                return None
            roots.append(r)
        nw = width_sum(lo, hi)
        if not nw < (1.0 - rtol) * w:
            return roots
        w = nw
    return roots


def hc4_revise(c: Constraint, B: Box) -> Box:
    """One forward-backward pass of ``c`` over ``B``.

    Returns the contracted box, or an empty box when ``c`` is proven
    infeasible on ``B``.
    """
    if B.is_empty:
        return B
    lo, hi = B.lo, B.hi
    if c.body.tape.kernel.revise(lo, hi, -inf, 0.0) is None:
        return empty_box(B.n)
    return Box.from_bounds(lo, hi)


def fixpoint_contract(cs: Sequence[Constraint], B: Box, objective: Expr | None = None,
                      f_ub: float = inf, rtol: float = FIXPOINT_RTOL) -> Box:
    """Apply :func:`hc4_revise` over ``cs`` until a pass stops paying off.

    When ``objective`` is given, the cut-off constraint
    ``objective <= f_ub`` is propagated after the problem constraints.
    """
    if B.is_empty:
        return B
    revisers = [(c.body.tape.kernel, -inf, 0.0) for c in cs]
    if objective is not None:
        revisers.append((objective.tape.kernel, -inf, f_ub))
    if not revisers:
        return B
    lo, hi = B.lo, B.hi
    if contract_lists(revisers, lo, hi, rtol) is None:
        return empty_box(B.n)
    return Box.from_bounds(lo, hi)


def strictly_interior(lo, hi, dlo, dhi) -> bool:
    for a, b, c, d in zip(lo, hi, dlo, dhi):
        if not (c < a and b < d):
            return False
    return True


def stationarity_discards(kernel, lo, hi) -> bool:
    """True when some gradient component excludes 0 and no ``abs`` kink
    lies in the box.  The caller checks interiority and feasibility."""
    glo, ghi, kink = kernel.gradient(lo, hi)
    if kink:
        return False
    for a, b in zip(glo, ghi):
        if a > 0.0 or b < 0.0:
            return True
    return False


def stationarity_prune(f: Expr, B: Box, domain: Box) -> str:
    """``"discard"`` when ``B`` is strictly inside ``domain`` and ``f`` is
    provably monotone in some variable over ``B``; ``"keep"`` otherwise."""
    if B.is_empty:
        return DISCARD
    lo, hi = B.lo, B.hi
    if not strictly_interior(lo, hi, domain.lo, domain.hi):
        return KEEP
    r = f.tape.kernel.forward(lo, hi)
    if r[0] > r[1]:
        return KEEP
    return DISCARD if stationarity_discards(f.tape.kernel, lo, hi) else KEEP
