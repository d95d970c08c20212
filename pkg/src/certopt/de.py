"""Differential Evolution (rand/1/bin) with bounce-back repair and
lexicographic constrained selection.

The engine evaluates the population with numpy; every time the population
best improves it is re-evaluated with interval arithmetic and, if proven
feasible, its rigorous upper bound is posted to the IB&C worker.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from math import inf
from typing import Callable, Optional, Sequence

import numpy as np

from certopt.ibc import _certify_point
from certopt.messages import Link, UpperBound

KEEP_X = "keep_x"
TAKE_Y = "take_y"


@dataclass(frozen=True)
class DEConfig:
    """DE control parameters.

    Attributes
    ----------
    NP : int
        Population size, at least 4.
    W : float
        Weighting factor, positive.
    CR : float
        Crossover rate in ``[0, 1]``.
    seed : int or None
        Seed of the numpy generator.
    """

    NP: int = 50
    W: float = 0.7
    CR: float = 0.5
    seed: Optional[int] = 0

    def __post_init__(self):
        if int(self.NP) != self.NP or self.NP < 4:
            raise ValueError(f"NP must be an integer >= 4, got {self.NP}")
        if not self.W > 0.0:
            raise ValueError(f"W must be positive, got {self.W}")
        if not 0.0 <= self.CR <= 1.0:
            raise ValueError(f"CR must lie in [0, 1], got {self.CR}")


@dataclass(frozen=True)
class EvalTriplet:
    """``(f, n_viol, s_viol)``; ``f`` is ``None`` for infeasible points."""

    f: Optional[float]
    n_viol: int
    s_viol: float

    def key(self) -> tuple:
        f = inf if self.f is None or math.isnan(self.f) else self.f
        return (self.n_viol, self.s_viol if self.n_viol else 0.0, f)

    def better_than(self, other: EvalTriplet) -> bool:
        return self.key() < other.key()


@dataclass(frozen=True)
class Individual:
    position: tuple
    eval: EvalTriplet


def select(x_eval: EvalTriplet, y_eval: EvalTriplet) -> str:
    """``"keep_x"`` if ``x`` is strictly better, else ``"take_y"``."""
    return KEEP_X if x_eval.better_than(y_eval) else TAKE_Y


def mutate_crossover(x, u, v, w, cfg: DEConfig, rng) -> np.ndarray:
    """Trial vector ``y`` from target ``x`` and donors ``u, v, w``.

    Component ``j`` takes ``u_j + W (v_j - w_j)`` when ``j == R`` or a fresh
    uniform draw is below ``CR``; otherwise it copies ``x_j``.
    """
    x, u, v, w = (np.asarray(t, dtype=float) for t in (x, u, v, w))
    n = x.shape[0]
    R = int(rng.integers(n))
    mask = rng.random(n) < cfg.CR
    mask[R] = True
    return np.where(mask, u + cfg.W * (v - w), x)


def bounce_back(y_j: float, u_j: float, bounds, rng) -> float:
    """Resample an out-of-range component between ``u_j`` and the bound."""
    lo, hi = bounds[0], bounds[1]
    if y_j > hi:
        y_j = u_j + rng.random() * (hi - u_j)
    elif y_j < lo:
        y_j = u_j + rng.random() * (lo - u_j)
    else:
        return y_j
    return min(max(y_j, lo), hi)


def evaluate_triplet(x: Sequence[float], problem) -> EvalTriplet:
    """Float evaluation; the objective is skipped when a constraint fails."""
    nv = 0
    sv = 0.0
    for c in problem.constraints:
        g = c.body(x)
        if g > 0.0 or g != g:
            nv += 1
            sv += g if g == g else inf
    if nv:
        return EvalTriplet(None, nv, sv)
    return EvalTriplet(problem.objective(x), 0, 0.0)


class DEEngine:
    """Synchronous-generation DE over a problem's domain.

    Parameters
    ----------
    problem : Problem
    cfg : DEConfig
    link : Link, optional
        Certified bounds are posted on it and injected points read from it.
    progress : callable, optional
        ``progress(event, values)`` sink.
    progress_every : int
        A ``generation`` record is emitted every that many generations (and
        on every improvement).
    """

    def __init__(self, problem, cfg: DEConfig, link: Optional[Link] = None,
                 progress: Optional[Callable] = None, progress_every: int = 1000):
        self.problem = problem
        self.cfg = cfg
        self.link = link
        self.progress = progress
        self.progress_every = max(1, int(progress_every))
        self.rng = np.random.default_rng(cfg.seed)
        self.lo = np.array(problem.domain.lo, dtype=float)
        self.hi = np.array(problem.domain.hi, dtype=float)
        self.n = problem.n
        self._fobj = problem.objective.tape
        self._gs = [c.body.tape for c in problem.constraints]
        self._fk = self._fobj.kernel
        self._cks = [g.kernel for g in self._gs]
        self.generation = 0
        self.n_f_evals = 0
        self.ne_de = 0
        self.best_certified = inf
        self.certified_point: Optional[tuple] = None
        self.stall = 0
        NP = cfg.NP
        self.pop = self.lo + self.rng.random((NP, self.n)) * (self.hi - self.lo)
        self.f, self.nv, self.sv = self._evaluate(self.pop)
        self.best = self._argbest()
        self._best_key = self._key(self.best)
        self._improved()

    # -- evaluation -------------------------------------------------------------

    def _evaluate(self, X: np.ndarray):
        m = X.shape[0]
        if self._gs:
            G = np.stack([g.eval_batch(X) for g in self._gs], axis=1)
            G = np.where(np.isnan(G), inf, G)
            viol = G > 0.0
            nv = viol.sum(axis=1)
            sv = np.where(viol, G, 0.0).sum(axis=1)
        else:
            nv = np.zeros(m, dtype=np.int64)
            sv = np.zeros(m)
        f = np.full(m, inf)
        feas = nv == 0
        k = int(feas.sum())
        if k:
            fv = self._fobj.eval_batch(X[feas])
            f[feas] = np.where(np.isnan(fv), inf, fv)
            self.n_f_evals += k
        return f, nv, sv

    def _key(self, i: int) -> tuple:
        nv = int(self.nv[i])
        return (nv, float(self.sv[i]) if nv else 0.0, float(self.f[i]))

    def _order(self) -> np.ndarray:
        s = np.where(self.nv > 0, self.sv, 0.0)
        return np.lexsort((self.f, s, self.nv))

    def _argbest(self) -> int:
        return int(self._order()[0])

    def _argworst(self) -> int:
        return int(self._order()[-1])

    def individual(self, i: int) -> Individual:
        nv = int(self.nv[i])
        f = None if nv else float(self.f[i])
        return Individual(tuple(float(v) for v in self.pop[i]),
                          EvalTriplet(f, nv, float(self.sv[i]) if nv else 0.0))

    @property
    def best_individual(self) -> Individual:
        return self.individual(self.best)

    # -- cooperation ------------------------------------------------------------

    def _emit(self, event: str, **values) -> None:
        if self.progress is not None:
            self.progress(event, values)

    def _improved(self) -> None:
        """Certify the current best and post it if it lowers the bound."""
        i = self.best
        self._emit("best", generation=self.generation, f=float(self.f[i]),
                   n_viol=int(self.nv[i]), s_viol=float(self.sv[i]) if self.nv[i] else 0.0)
        if self.nv[i]:
            return
        x = [float(v) for v in self.pop[i]]
        ub = _certify_point(self._fk, self._cks, x)
        self.ne_de += 1
        if ub < self.best_certified:
            self.best_certified = ub
            self.certified_point = tuple(x)
            if self.link is not None:
                self.link.send(UpperBound(ub, tuple(x)))

    def inject(self, point: Sequence[float]) -> None:
        """Replace the worst individual by ``point`` (clamped to the domain)."""
        p = np.clip(np.asarray(point, dtype=float), self.lo, self.hi)
        f, nv, sv = self._evaluate(p[None, :])
        w = self._argworst()
        self.pop[w] = p
        self.f[w], self.nv[w], self.sv[w] = f[0], nv[0], sv[0]

    def _refresh_best(self) -> bool:
        b = self._argbest()
        key = self._key(b)
        self.best = b
        if key < self._best_key:
            self._best_key = key
            self._improved()
            return True
        return False

    # -- generations -------------------------------------------------------------

    def step(self) -> bool:
        """One generation; returns True if the population best improved."""
        if self.link is not None:
            msgs = self.link.to_de.take_all()
            for msg in msgs:
                self.inject(msg.point)
        cfg = self.cfg
        NP, n = self.pop.shape
        rng = self.rng
        pick = rng.random((NP, NP))
        np.fill_diagonal(pick, inf)
        idx = np.argsort(pick, axis=1, kind="stable")[:, :3]
        u = self.pop[idx[:, 0]]
        v = self.pop[idx[:, 1]]
        w = self.pop[idx[:, 2]]
        R = rng.integers(n, size=NP)
        mask = rng.random((NP, n)) < cfg.CR
        mask[np.arange(NP), R] = True
        y = np.where(mask, u + cfg.W * (v - w), self.pop)
        b = rng.random((NP, n))
        y = np.where(y > self.hi, u + b * (self.hi - u), y)
        y = np.where(y < self.lo, u + b * (self.lo - u), y)
        np.clip(y, self.lo, self.hi, out=y)
        fy, nvy, svy = self._evaluate(y)
        fx, nvx, svx = self.f, self.nv, self.sv
        same = nvx == nvy
        keep = (nvx < nvy) | (same & (nvx > 0) & (svx < svy)) | (same & (nvx == 0) & (fx < fy))
        take = ~keep
        self.pop[take] = y[take]
        self.f[take] = fy[take]
        self.nv[take] = nvy[take]
        self.sv[take] = svy[take]
        self.generation += 1
        improved = self._refresh_best()
        self.stall = 0 if improved else self.stall + 1
        if self.generation % self.progress_every == 0:
            i = self.best
            self._emit("generation", generation=self.generation, f=float(self.f[i]),
                       n_viol=int(self.nv[i]))
        return improved


def de_run(problem, cfg: DEConfig, link: Optional[Link] = None,
           progress: Optional[Callable] = None, max_generations: Optional[int] = None,
           time_limit: Optional[float] = None, throttle: bool = False,
           engine: Optional[DEEngine] = None) -> DEEngine:
    """Run generations until ``link`` terminates or a budget is exhausted.

    With ``throttle`` set, a stalled population (no improvement for 20
    generations) yields the processor between generations so that a
    concurrent IB&C worker is not starved.
    """
    de = engine if engine is not None else DEEngine(problem, cfg, link, progress)
    t0 = time.perf_counter()
    while True:
        if link is not None and link.terminated:
            break
        if max_generations is not None and de.generation >= max_generations:
            break
        if time_limit is not None and time.perf_counter() - t0 > time_limit:
            break
        g0 = time.perf_counter()
        de.step()
        if throttle and de.stall >= 20:
            pause = max(0.005, 4.0 * (time.perf_counter() - g0))
            if link is not None:
                if link.wait(pause):
                    break
            else:
                time.sleep(pause)
    return de
