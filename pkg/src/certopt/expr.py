"""Expression trees for objectives and constraints.

Expressions are immutable.  They are compiled once into a flat tape (see
:mod:`certopt.tape`) which every evaluation route consumes: natural interval
extension, HC4 revision, forward-mode interval AD and plain float
evaluation.  Build them with the usual operators::

    x = variables(2)
    f = x[0] ** 4 - 4 * x[0] ** 2 + sin(x[1])
"""

from __future__ import annotations

import numbers
from collections import Counter
from functools import reduce
from typing import Iterable, Sequence

from certopt.interval import Interval

VAR, CONST, ADD, SUB, MUL, DIV, NEG, POW, SQRT, EXP, SIN, COS, ABS = range(13)

OP_NAMES = {
    VAR: "var", CONST: "const", ADD: "add", SUB: "sub", MUL: "mul",
    DIV: "div", NEG: "neg", POW: "pow", SQRT: "sqrt", EXP: "exp",
    SIN: "sin", COS: "cos", ABS: "abs",
}
_ARITY = {VAR: 0, CONST: 0, ADD: 2, SUB: 2, MUL: 2, DIV: 2, NEG: 1, POW: 1,
          SQRT: 1, EXP: 1, SIN: 1, COS: 1, ABS: 1}


class Expr:
    """A node of an expression tree.

    ``payload`` is the variable index for ``VAR``, an :class:`Interval` for
    ``CONST`` and the integer exponent for ``POW``.
    """

    __slots__ = ("op", "args", "payload", "_tape", "__weakref__")

    def __init__(self, op: int, args: tuple = (), payload=None):
        if len(args) != _ARITY[op]:
            raise ValueError(f"{OP_NAMES[op]} takes {_ARITY[op]} arguments")
        object.__setattr__(self, "op", op)
        object.__setattr__(self, "args", tuple(args))
        object.__setattr__(self, "payload", payload)
        object.__setattr__(self, "_tape", None)

    def __setattr__(self, name, value):
        raise AttributeError("Expr is immutable")

    # -- operator sugar ---------------------------------------------------

    def __add__(self, other):
        return Expr(ADD, (self, as_expr(other)))

    def __radd__(self, other):
        return Expr(ADD, (as_expr(other), self))

    def __sub__(self, other):
        return Expr(SUB, (self, as_expr(other)))

    def __rsub__(self, other):
        return Expr(SUB, (as_expr(other), self))

    def __mul__(self, other):
        return Expr(MUL, (self, as_expr(other)))

    def __rmul__(self, other):
        return Expr(MUL, (as_expr(other), self))

    def __truediv__(self, other):
        return Expr(DIV, (self, as_expr(other)))

    def __rtruediv__(self, other):
        return Expr(DIV, (as_expr(other), self))

    def __neg__(self):
        return Expr(NEG, (self,))

    def __pow__(self, k):
        if not isinstance(k, numbers.Integral) or k < 0:
            raise TypeError("only nonnegative integer powers are supported")
        return Expr(POW, (self,), int(k))

    def __abs__(self):
        return Expr(ABS, (self,))

    # -- inspection -------------------------------------------------------

    def walk(self):
        """Yield every node occurrence in prefix order (shared nodes repeat)."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.args))

    def occurrences(self) -> Counter:
        """Number of syntactic occurrences of each variable index."""
        return Counter(node.payload for node in self.walk() if node.op == VAR)

    def variables(self) -> set[int]:
        return set(self.occurrences())

    @property
    def size(self) -> int:
        return sum(1 for _ in self.walk())

    @property
    def tape(self):
        """The compiled tape, built on first use."""
        if self._tape is None:
            from certopt.tape import compile_expr
            object.__setattr__(self, "_tape", compile_expr(self))
        return self._tape

    def __call__(self, x: Sequence[float]) -> float:
        """Plain floating-point value at ``x``."""
        return self.tape.eval_float([float(v) for v in x])

    def __repr__(self):
        return to_string(self)


def var(i: int) -> Expr:
    if i < 0:
        raise ValueError("variable indices start at 0")
    return Expr(VAR, (), int(i))


def variables(n: int) -> list[Expr]:
    return [var(i) for i in range(n)]


def const(lo: float, hi: float | None = None) -> Expr:
    """Constant node; a pair of bounds gives an interval constant."""
    return Expr(CONST, (), Interval(lo, hi))


def as_expr(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, Interval):
        return Expr(CONST, (), v)
    if isinstance(v, numbers.Real):
        return const(float(v))
    raise TypeError(f"cannot convert {type(v).__name__} to an expression")


def sin(e) -> Expr:
    return Expr(SIN, (as_expr(e),))


def cos(e) -> Expr:
    return Expr(COS, (as_expr(e),))


def exp(e) -> Expr:
    return Expr(EXP, (as_expr(e),))


def sqrt(e) -> Expr:
    return Expr(SQRT, (as_expr(e),))


def fabs(e) -> Expr:
    return Expr(ABS, (as_expr(e),))


def esum(terms: Iterable) -> Expr:
    """Left-nested binary sum."""
    terms = [as_expr(t) for t in terms]
    if not terms:
        return const(0.0)
    return reduce(lambda a, b: Expr(ADD, (a, b)), terms)


def eprod(factors: Iterable) -> Expr:
    """Left-nested binary product."""
    factors = [as_expr(t) for t in factors]
    if not factors:
        return const(1.0)
    return reduce(lambda a, b: Expr(MUL, (a, b)), factors)


_INFIX = {ADD: "+", SUB: "-", MUL: "*", DIV: "/"}


def to_string(e: Expr) -> str:
    if e.op == VAR:
        return f"x{e.payload}"
    if e.op == CONST:
        c = e.payload
        return repr(c.lo) if c.lo == c.hi else f"[{c.lo!r}, {c.hi!r}]"
    if e.op in _INFIX:
        a, b = e.args
        return f"({to_string(a)} {_INFIX[e.op]} {to_string(b)})"
    if e.op == NEG:
        return f"(-{to_string(e.args[0])})"
    if e.op == POW:
        return f"{to_string(e.args[0])}^{e.payload}"
    return f"{OP_NAMES[e.op]}({to_string(e.args[0])})"
