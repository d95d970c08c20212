"""Benchmark problems: Michalewicz, Sine Envelope, Shekel's foxholes,
Egg Holder, Rana (two syntaxes) and Keane.

Each builder returns a :class:`~certopt.problem.Problem` whose objective is
written term by term without shared subtrees, so syntactic occurrence counts
(and hence natural-extension overestimation) are those of the textbook
formulas.
"""

from __future__ import annotations

import csv
import json
import math
from functools import lru_cache
from importlib import resources

from certopt.contractor import Constraint
from certopt.expr import (Expr, as_expr, const, cos, eprod, esum, fabs, sin, sqrt,
                          var)
from certopt.interval import PI, Box
from certopt.problem import KnownMinimum, Problem


class ConfigError(ValueError):
    """Invalid benchmark name, dimension or option."""


class DataFileError(ConfigError):
    """A bundled data file is missing or malformed."""


BenchmarkProblem = Problem

RANA_SYNTAXES = ("original", "rewritten")

#: (NP, W, CR) used by default for each function
DEFAULT_DE_PARAMS = {
    "michalewicz": (50, 0.7, 0.0),
    "sine_envelope": (50, 0.7, 0.9),
    "shekel": (50, 0.7, 0.9),
    "egg_holder": (50, 0.7, 0.4),
    "rana": (50, 0.7, 0.5),
    "keane": (70, 0.7, 0.9),
}
FALLBACK_DE_PARAMS = (50, 0.7, 0.5)

_ALIASES = {
    "michalewicz": "michalewicz",
    "sineenvelope": "sine_envelope",
    "sine_envelope": "sine_envelope",
    "shekel": "shekel",
    "shekelfoxholes": "shekel",
    "eggholder": "egg_holder",
    "egg_holder": "egg_holder",
    "rana": "rana",
    "keane": "keane",
}


def canonical_name(name: str) -> str:
    key = name.strip().lower().replace("-", "_").replace(" ", "_")
    if key in _ALIASES:
        return _ALIASES[key]
    key = key.replace("_", "")
    if key in _ALIASES:
        return _ALIASES[key]
    raise ConfigError(f"unknown benchmark {name!r}; choose from {sorted(set(_ALIASES.values()))}")


def de_defaults(name: str) -> tuple:
    try:
        return DEFAULT_DE_PARAMS[canonical_name(name)]
    except ConfigError:
        return FALLBACK_DE_PARAMS


# -- data files ------------------------------------------------------------------


def _data_path(fname: str):
    return resources.files("certopt") / "data" / fname


@lru_cache(maxsize=None)
def shekel_data() -> tuple:
    """``(a, c)``: 30 foxhole centres (10 coordinates each) and 30 offsets."""
    path = _data_path("shekel_foxholes.csv")
    try:
        text = path.read_text()
    except (FileNotFoundError, OSError) as exc:
        raise DataFileError(f"Shekel data file not found: {path}") from exc
    rows = [r for r in csv.reader(line for line in text.splitlines()
                                  if line and not line.startswith("#"))]
    header, body = rows[0], rows[1:]
    if header[-1] != "c" or len(body) != 30:
        raise DataFileError("Shekel data file must have 30 rows and a final 'c' column")
    a = tuple(tuple(float(v) for v in r[:-1]) for r in body)
    c = tuple(float(r[-1]) for r in body)
    if any(ci <= 0.0 for ci in c):
        raise DataFileError("Shekel offsets c_i must be positive")
    return a, c


@lru_cache(maxsize=None)
def reference_minima() -> tuple:
    """Published certified minima as a tuple of dict records."""
    path = _data_path("reference_minima.json")
    try:
        data = json.loads(path.read_text())
    except (FileNotFoundError, OSError) as exc:
        raise DataFileError(f"reference minima file not found: {path}") from exc
    return tuple(data["records"])


def reference_minimum(name: str, n: int):
    """Record ``{function, n, value, solution, source}`` or ``None``."""
    key = canonical_name(name)
    for rec in reference_minima():
        if rec["function"] == key and rec["n"] == n:
            return rec
    return None


# -- objectives -------------------------------------------------------------------


def michalewicz(n: int) -> Expr:
    terms = []
    for i in range(n):
        x = var(i)
        arg = x ** 2 / PI if i == 0 else (i + 1) * x ** 2 / PI
        terms.append(sin(var(i)) * sin(arg) ** 20)
    return -esum(terms)


def sine_envelope(n: int) -> Expr:
    terms = []
    for i in range(n - 1):
        num = sin(sqrt(var(i + 1) ** 2 + var(i) ** 2) - 0.5) ** 2
        den = (0.001 * (var(i + 1) ** 2 + var(i) ** 2) + 1.0) ** 2
        terms.append(0.5 + num / den)
    return -esum(terms)


def shekel(n: int) -> Expr:
    a, c = shekel_data()
    if n > len(a[0]):
        raise ConfigError(f"Shekel data has {len(a[0])} columns; n={n} unsupported")
    terms = []
    for ai, ci in zip(a, c):
        s = esum((var(j) - ai[j]) ** 2 for j in range(n))
        terms.append(1.0 / (ci + s))
    return -esum(terms)


def egg_holder(n: int) -> Expr:
    terms = []
    for i in range(n - 1):
        x, y = var(i), var(i + 1)
        t1 = (var(i + 1) + 47.0) * sin(sqrt(fabs(y + 47.0 + x / 2.0)))
        t2 = var(i) * sin(sqrt(fabs(var(i) - (var(i + 1) + 47.0))))
        terms.append(t1 + t2)
    return -esum(terms)


def _rana_a(i):
    return sqrt(fabs(var(i + 1) + var(i) + 1.0))


def _rana_b(i):
    return sqrt(fabs(var(i + 1) - var(i) + 1.0))


def rana(n: int, syntax: str = "rewritten") -> Expr:
    """Rana's function.

    ``original`` is the textbook form ``x_i cos A sin B + (1 + x_{i+1})
    sin A cos B``.  ``rewritten`` replaces both products with
    ``cos u sin v = (sin(u + v) - sin(u - v)) / 2`` and collects the two
    ``sin(A + B)`` and ``sin(A - B)`` terms, leaving every variable fewer
    times in the expression.
    """
    if syntax not in RANA_SYNTAXES:
        raise ConfigError(f"Rana syntax must be one of {RANA_SYNTAXES}, got {syntax!r}")
    terms = []
    for i in range(n - 1):
        if syntax == "original":
            t = (var(i) * cos(_rana_a(i)) * sin(_rana_b(i))
                 + (1.0 + var(i + 1)) * sin(_rana_a(i)) * cos(_rana_b(i)))
        else:
            p = (var(i) + var(i + 1) + 1.0) * sin(_rana_a(i) + _rana_b(i))
            q = (var(i + 1) - var(i) + 1.0) * sin(_rana_a(i) - _rana_b(i))
            t = 0.5 * (p + q)
        terms.append(t)
    return esum(terms)


def keane(n: int) -> tuple:
    """Objective and normalized constraints ``(f, [g1, g2])``."""
    num = fabs(esum(cos(var(i)) ** 4 for i in range(n))
               - 2.0 * eprod(cos(var(i)) ** 2 for i in range(n)))
    den = sqrt(esum(var(i) ** 2 if i == 0 else (i + 1) * var(i) ** 2 for i in range(n)))
    f = -(num / den)
    g1 = Constraint(0.75 - eprod(var(i) for i in range(n)))
    g2 = Constraint(esum(var(i) for i in range(n)) - 7.5 * n)
    return f, [g1, g2]


_DOMAINS = {
    "michalewicz": (0.0, math.pi),
    "sine_envelope": (-100.0, 100.0),
    "shekel": (0.0, 10.0),
    "egg_holder": (-512.0, 512.0),
    "rana": (-512.0, 512.0),
    "keane": (0.0, 10.0),
}


def make_problem(name: str, n: int, rana_syntax: str = "rewritten") -> Problem:
    """Build benchmark ``name`` in dimension ``n``.

    Raises
    ------
    ConfigError
        Unknown name, ``n < 2`` or an unsupported option.
    DataFileError
        Shekel requested but its data file is unavailable.
    """
    key = canonical_name(name)
    if not isinstance(n, int) or n < 2:
        raise ConfigError(f"dimension must be an integer >= 2, got {n!r}")
    constraints = ()
    options = {}
    if key == "michalewicz":
        f = michalewicz(n)
    elif key == "sine_envelope":
        f = sine_envelope(n)
    elif key == "shekel":
        f = shekel(n)
    elif key == "egg_holder":
        f = egg_holder(n)
    elif key == "rana":
        f = rana(n, rana_syntax)
        options["rana_syntax"] = rana_syntax
    else:
        f, cs = keane(n)
        constraints = tuple(cs)
    lo, hi = _DOMAINS[key]
    rec = reference_minimum(key, n)
    known = None
    if rec is not None and rec["solution"] is not None:
        known = KnownMinimum(rec["value"], tuple(rec["solution"]))
    elif rec is not None:
        known = KnownMinimum(rec["value"], ())
    return Problem(key, f, Box([(lo, hi)] * n), constraints, known, options)


_PUTATIVE = {
    "michalewicz": (-0.99864, 0.30271),
    "sine_envelope": (-1.49150, 1.49150),
    "egg_holder": (-915.61991, 862.10466),
    "rana": (-511.70430, 511.68714),
}


def putative_minimum(name: str, n: int) -> float:
    """Linear-in-``n`` fit of the global minimum (not certified)."""
    key = canonical_name(name)
    if key not in _PUTATIVE:
        raise ConfigError(f"no putative-minimum formula for {name!r}")
    slope, icpt = _PUTATIVE[key]
    return slope * n + icpt


def custom_problem(name: str, objective, domain, constraints=()) -> Problem:
    """Wrap a user expression as a :class:`Problem`."""
    dom = domain if isinstance(domain, Box) else Box(domain)
    cs = tuple(c if isinstance(c, Constraint) else Constraint(as_expr(c)) for c in constraints)
    return Problem(name, as_expr(objective), dom, cs)
