"""Run results and their serialization."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

CERTIFIED = "certified"
TIMEOUT = "timeout"
INFEASIBLE = "infeasible"
INCOMPLETE = "incomplete"
HEURISTIC = "heuristic"


def _enc(v: float):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def _dec(v):
    return float(v) if isinstance(v, str) else v


@dataclass
class CertifiedResult:
    """Outcome of one run.

    ``f_best`` is a rigorous upper bound of the global minimum and
    ``lower_bound`` a rigorous lower bound, except for ``heuristic`` runs
    (DE alone), where ``f_best`` is a plain float value and no lower bound
    is known.
    """

    status: str
    f_best: float
    lower_bound: float
    x_best: Optional[tuple]
    wall_time: float = 0.0
    ne_de: int = 0
    ne_ibc: int = 0
    n_f_evals: int = 0
    function: str = ""
    n: int = 0
    iterations: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def gap(self) -> float:
        return self.f_best - self.lower_bound

    def to_dict(self) -> dict:
        d = asdict(self)
        d["f_best"] = _enc(self.f_best)
        d["lower_bound"] = _enc(self.lower_bound)
        d["x_best"] = None if self.x_best is None else list(self.x_best)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> CertifiedResult:
        names = {f.name for f in fields(cls)}
        kw = {k: v for k, v in d.items() if k in names}
        kw["f_best"] = _dec(kw["f_best"])
        kw["lower_bound"] = _dec(kw["lower_bound"])
        if kw.get("x_best") is not None:
            kw["x_best"] = tuple(kw["x_best"])
        return cls(**kw)

    @classmethod
    def from_json(cls, s: str) -> CertifiedResult:
        return cls.from_dict(json.loads(s))
