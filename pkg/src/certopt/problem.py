"""Optimization problem container."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from certopt.contractor import Constraint
from certopt.expr import Expr
from certopt.interval import Box


@dataclass(frozen=True)
class KnownMinimum:
    value: float
    solution: tuple


@dataclass(frozen=True)
class Problem:
    """Minimize ``objective`` over ``domain`` subject to ``g(x) <= 0``.

    Attributes
    ----------
    name : str
    objective : Expr
    domain : Box
    constraints : tuple of Constraint
    known_minimum : KnownMinimum, optional
        Published reference value and solution, when one exists.
    """

    name: str
    objective: Expr
    domain: Box
    constraints: tuple = ()
    known_minimum: Optional[KnownMinimum] = None
    options: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        nv = self.objective.tape.nvars
        for c in self.constraints:
            nv = max(nv, c.body.tape.nvars)
        if nv > self.domain.n:
            raise ValueError(f"expressions use {nv} variables, domain has {self.domain.n}")

    @property
    def n(self) -> int:
        return self.domain.n

    def constraint_values(self, x: Sequence[float]) -> list[float]:
        return [c.body(x) for c in self.constraints]
