"""Outward-rounded intervals and boxes.

Every operation returns an enclosure of the exact real result.  The empty
set is a distinguished value that absorbs all arithmetic.

>>> Interval(1, 2) + Interval(3, 4) == Interval(4, 6).widen()
True
"""

from __future__ import annotations

import math
from typing import Iterable, Iterator, Sequence

from certopt import _ia


class DomainError(ValueError):
    """An elementary function was applied outside its real domain."""


class CannotBranch(ValueError):
    """Raised when bisecting a box whose components all have zero width."""


class Interval:
    """Closed interval ``[lo, hi]`` with 64-bit float bounds."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: float, hi: float | None = None):
        if hi is None:
            hi = lo
        lo = float(lo)
        hi = float(hi)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval bounds must not be NaN")
        if lo > hi:
            raise ValueError(f"empty bounds [{lo}, {hi}]; use Interval.empty()")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __setattr__(self, name, value):
        raise AttributeError("Interval is immutable")

    @classmethod
    def empty(cls) -> Interval:
        return cls._raw(_ia.EMPTY)

    @classmethod
    def entire(cls) -> Interval:
        return cls(-math.inf, math.inf)

    @classmethod
    def _raw(cls, pair) -> Interval:
        obj = object.__new__(cls)
        object.__setattr__(obj, "lo", pair[0])
        object.__setattr__(obj, "hi", pair[1])
        return obj

    # -- predicates -------------------------------------------------------

    @property
    def is_empty(self) -> bool:
        return not self.lo <= self.hi

    def __contains__(self, x) -> bool:
        if isinstance(x, Interval):
            return x.is_empty or (self.lo <= x.lo and x.hi <= self.hi)
        return self.lo <= x <= self.hi

    def subset(self, other: Interval) -> bool:
        return self in other

    def __eq__(self, other) -> bool:
        if not isinstance(other, Interval):
            return NotImplemented
        if self.is_empty or other.is_empty:
            return self.is_empty and other.is_empty
        return self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        return hash((self.lo, self.hi))

    # -- measures ---------------------------------------------------------

    @property
    def width(self) -> float:
        if self.is_empty:
            return 0.0
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        """Midpoint, clamped into the interval."""
        if self.is_empty:
            raise ValueError("midpoint of an empty interval")
        m = 0.5 * (self.lo + self.hi)
        if math.isinf(m):
            m = 0.5 * self.lo + 0.5 * self.hi
        return min(max(m, self.lo), self.hi)

    def widen(self, ulps: int = 1) -> Interval:
        lo, hi = self.lo, self.hi
        for _ in range(ulps):
            lo, hi = _ia.dn(lo), _ia.up(hi)
        return Interval._raw((lo, hi))

    # -- arithmetic -------------------------------------------------------

    def _binary(self, other, fn):
        if not isinstance(other, Interval):
            other = Interval(other)
        if self.is_empty or other.is_empty:
            return Interval.empty()
        return Interval._raw(fn(self.lo, self.hi, other.lo, other.hi))

    def __add__(self, other):
        return self._binary(other, _ia.add)

    def __radd__(self, other):
        return Interval(other)._binary(self, _ia.add)

    def __sub__(self, other):
        return self._binary(other, _ia.sub)

    def __rsub__(self, other):
        return Interval(other)._binary(self, _ia.sub)

    def __mul__(self, other):
        return self._binary(other, _ia.mul)

    def __rmul__(self, other):
        return Interval(other)._binary(self, _ia.mul)

    def __truediv__(self, other):
        return self._binary(other, _ia.div)

    def __rtruediv__(self, other):
        return Interval(other)._binary(self, _ia.div)

    def __neg__(self):
        if self.is_empty:
            return self
        return Interval._raw(_ia.neg(self.lo, self.hi))

    def __pow__(self, k: int):
        return elem("pow_k", self, k)

    def __abs__(self):
        return elem("abs", self)

    def __and__(self, other: Interval) -> Interval:
        return intersect(self, other)

    def __iter__(self) -> Iterator[float]:
        yield self.lo
        yield self.hi

    def __repr__(self):
        if self.is_empty:
            return "Interval.empty()"
        return f"Interval({self.lo!r}, {self.hi!r})"


_ARITH = {"add": _ia.add, "sub": _ia.sub, "mul": _ia.mul, "div": _ia.div}


def arith(op: str, x: Interval, y: Interval) -> Interval:
    """Apply one of ``add``, ``sub``, ``mul``, ``div`` to two intervals."""
    try:
        fn = _ARITH[op]
    except KeyError:
        raise ValueError(f"unknown arithmetic operator {op!r}") from None
    return x._binary(y, fn)


def elem(fn: str, x: Interval, k: int | None = None) -> Interval:
    """Apply an elementary function to ``x``.

    ``fn`` is one of ``sin``, ``cos``, ``exp``, ``sqrt``, ``abs`` or
    ``pow_k`` (which needs the integer exponent ``k >= 0``).
    """
    if x.is_empty:
        return x
    if fn == "sin":
        r = _ia.sin(x.lo, x.hi)
    elif fn == "cos":
        r = _ia.cos(x.lo, x.hi)
    elif fn == "exp":
        r = _ia.exp(x.lo, x.hi)
    elif fn == "sqrt":
        if x.hi < 0.0:
            raise DomainError(f"sqrt of negative interval {x!r}")
        r = _ia.sqrt(x.lo, x.hi)
    elif fn == "abs":
        r = _ia.iabs(x.lo, x.hi)
    elif fn == "pow_k":
        if k is None or int(k) != k or k < 0:
            raise ValueError("pow_k needs a nonnegative integer exponent")
        r = _ia.ipow(x.lo, x.hi, int(k))
    else:
        raise ValueError(f"unknown elementary function {fn!r}")
    return Interval._raw(r)


def intersect(x: Interval, y: Interval) -> Interval:
    if x.is_empty or y.is_empty:
        return Interval.empty()
    return Interval._raw(_ia.intersect(x.lo, x.hi, y.lo, y.hi))


def hull(x: Interval, y: Interval) -> Interval:
    return Interval._raw(_ia.hull(x.lo, x.hi, y.lo, y.hi))


PI = Interval._raw((_ia.PI_LO, _ia.PI_HI))


class Box(tuple):
    """Interval vector ``(X1, ..., Xn)``."""

    def __new__(cls, components: Iterable):
        comps = tuple(c if isinstance(c, Interval) else Interval(*c) for c in components)
        if not comps:
            raise ValueError("a box needs at least one component")
        return super().__new__(cls, comps)

    @classmethod
    def from_bounds(cls, lo: Sequence[float], hi: Sequence[float]) -> Box:
        return cls(Interval(a, b) for a, b in zip(lo, hi))

    @classmethod
    def point(cls, x: Sequence[float]) -> Box:
        return cls(Interval(v, v) for v in x)

    @property
    def n(self) -> int:
        return len(self)

    @property
    def lo(self) -> list[float]:
        return [c.lo for c in self]

    @property
    def hi(self) -> list[float]:
        return [c.hi for c in self]

    @property
    def width(self) -> float:
        return max(c.width for c in self)

    @property
    def mid(self) -> list[float]:
        return [c.mid for c in self]

    @property
    def is_empty(self) -> bool:
        return any(c.is_empty for c in self)

    def __contains__(self, x) -> bool:
        if isinstance(x, Box):
            return all(a in b for a, b in zip(x, self))
        return all(c.lo <= v <= c.hi for c, v in zip(self, x))

    def __repr__(self):
        return "Box(" + ", ".join(f"[{c.lo!r}, {c.hi!r}]" for c in self) + ")"


def widest_index(lo: Sequence[float], hi: Sequence[float]) -> int:
    """Index of the widest component; the lowest index wins ties."""
    best, best_w = 0, hi[0] - lo[0]
    for i in range(1, len(lo)):
        w = hi[i] - lo[i]
        if w > best_w:
            best, best_w = i, w
    return best


def split_point(a: float, b: float) -> float:
    m = 0.5 * (a + b)
    if math.isinf(m):
        m = 0.5 * a + 0.5 * b
    return min(max(m, a), b)


def bisect(box: Box) -> tuple[Box, Box]:
    """Split ``box`` at the midpoint of its widest component."""
    lo, hi = box.lo, box.hi
    i = widest_index(lo, hi)
    if not hi[i] - lo[i] > 0.0:
        raise CannotBranch("cannot branch on a degenerate box")
    m = split_point(lo[i], hi[i])
    left = list(box)
    right = list(box)
    left[i] = Interval(lo[i], m)
    right[i] = Interval(m, hi[i])
    return Box(left), Box(right)
