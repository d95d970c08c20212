"""Interval Branch and Contract.

Best-first branch and bound on boxes: each extracted box is cut off,
contracted with the problem constraints and ``f <= f~``, tested for
stationarity, used for a midpoint upper bound, then bisected.

At every iteration the pair ``(global_lower_bound, best_ub)`` brackets the
global minimum over the feasible set.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field
from math import inf
from typing import Callable, Optional, Sequence

from certopt import contractor
from certopt._pykernel import BRANCH, CUT, SMALL
from certopt.contractor import DISCARD, KEEP
from certopt.interval import Box
from certopt.messages import Inject, Link
from certopt.result import CERTIFIED, INCOMPLETE, INFEASIBLE, TIMEOUT, CertifiedResult
from certopt.tape import processor_class

MIN_WIDTH = 1e-12


@dataclass(frozen=True)
class QueueEntry:
    box: Box
    lower_bound: float


@dataclass
class SolverState:
    """Mutable IB&C state.

    ``queue`` holds heap tuples ``(lower_bound, seq, lo, hi)``; ties on the
    lower bound are broken by insertion order (oldest first).
    """

    precision: float = 1e-6
    best_ub: float = inf
    incumbent: Optional[tuple] = None
    eval_count_F: int = 0
    queue: list = field(default_factory=list)
    seq: int = 0
    cut_lb: float = inf
    unresolved_lb: float = inf
    iterations: int = 0
    n_float_evals: int = 0

    def push(self, lb: float, lo: list, hi: list) -> None:
        heapq.heappush(self.queue, (lb, self.seq, lo, hi))
        self.seq += 1

    def entries(self) -> list[QueueEntry]:
        return [QueueEntry(Box.from_bounds(lo, hi), lb) for lb, _, lo, hi in sorted(self.queue)]

    @property
    def global_lower_bound(self) -> float:
        lb = self.best_ub
        if self.queue and self.queue[0][0] < lb:
            lb = self.queue[0][0]
        if self.cut_lb < lb:
            lb = self.cut_lb
        if self.unresolved_lb < lb:
            lb = self.unresolved_lb
        return lb

    def offer(self, value: float, point) -> bool:
        """Fold a certified upper bound; True if it improved ``best_ub``."""
        if value < self.best_ub:
            self.best_ub = value
            self.incumbent = tuple(point)
            return True
        return False


def cut_off_test(entry: QueueEntry, state: SolverState) -> str:
    """``"discard"`` iff the entry cannot improve ``best_ub`` by more than ε."""
    return DISCARD if entry.lower_bound >= state.best_ub - state.precision else KEEP


def _certify_point(fk, cks, x) -> float:
    """Rigorous upper bound of f at ``x`` if ``x`` is proven feasible, else inf."""
    for ck in cks:
        if not ck.forward(x, x)[1] <= 0.0:
            return inf
    r = fk.forward(x, x)
    if r[0] > r[1]:
        return inf
    return r[1]


def midpoint_test(B: Box, problem, state: SolverState) -> SolverState:
    """Try to improve ``state.best_ub`` with the box midpoint."""
    m = B.mid
    fk = problem.objective.tape.kernel
    cks = [c.body.tape.kernel for c in problem.constraints]
    ub = _certify_point(fk, cks, m)
    state.eval_count_F += 1
    state.offer(ub, m)
    return state


def polish(fk, cks, x, step, dlo, dhi, max_evals: int):
    """Projected compass search from ``x`` in plain floating point.

    Each coordinate is moved by ``±step[j]`` (clamped to the domain); a
    move is kept when it lowers ``f`` and keeps every constraint ``<= 0``.
    Steps are halved after a sweep without progress.  Returns the final
    point and the number of objective evaluations.  The result is only a
    candidate: callers must certify it before using its value.
    """
    x = list(x)
    fx = fk.eval_float(x)
    nev = 1
    step = [s if s > 0.0 else 1e-3 for s in step]
    n = len(x)
    while nev < max_evals:
        moved = False
        for j in range(n):
            for sgn in (1.0, -1.0):
                y = x[:]
                y[j] = min(max(x[j] + sgn * step[j], dlo[j]), dhi[j])
                if y[j] == x[j]:
                    continue
                if any(not ck.eval_float(y) <= 0.0 for ck in cks):
                    continue
                fy = fk.eval_float(y)
                nev += 1
                if fy < fx:
                    x, fx, moved = y, fy, True
                    break
        if not moved:
            tiny = True
            for j in range(n):
                step[j] *= 0.5
                if step[j] > 1e-15 * (1.0 + abs(x[j])):
                    tiny = False
            if tiny:
                break
    return x, nev


class IBCSolver:
    """Steppable IB&C engine.

    Parameters
    ----------
    problem : Problem
    eps : float
        Target precision; the run certifies ``f~ - f* <= eps``.
    time_limit : float, optional
        Seconds; ``None`` for no limit.
    link : Link, optional
        Cooperation channels; upper bounds are read from it and improving
        midpoints are sent as injections.
    progress : callable, optional
        ``progress(event, values)`` sink.
    progress_every : int
        Emit an ``iteration`` record every that many iterations.
    min_width : float
        Boxes narrower than this are not split; they are reported as
        unresolved if they still hold the lower bound.
    mean_value : bool
        Also bound each box with the mean-value form (on by default).  Set
        False for natural extension plus HC4 only.
    polish : bool
        Refine every improving midpoint with :func:`polish` and offer the
        certified value of the refined point as well.
    """

    def __init__(self, problem, eps: float = 1e-6, time_limit: Optional[float] = None,
                 link: Optional[Link] = None, progress: Optional[Callable] = None,
                 progress_every: int = 10000, min_width: float = MIN_WIDTH,
                 mean_value: bool = True, polish: bool = True):
        if not eps > 0.0:
            raise ValueError("eps must be positive")
        self.problem = problem
        self.eps = eps
        self.time_limit = time_limit
        self.link = link
        self.progress = progress
        self.progress_every = max(1, int(progress_every))
        self.min_width = min_width
        self.polish = polish
        self.fk = problem.objective.tape.kernel
        self.cks = [c.body.tape.kernel for c in problem.constraints]
        self.dlo = problem.domain.lo
        self.dhi = problem.domain.hi
        self.n = problem.n
        self.proc = processor_class(self.fk.backend)(
            self.fk, self.cks, self.dlo, self.dhi, contractor.FIXPOINT_RTOL, min_width,
            mean_value=mean_value)
        self.state = SolverState(precision=eps)
        self.status: Optional[str] = None
        self._t0 = time.perf_counter()
        self._elapsed = 0.0
        lo, hi = list(self.dlo), list(self.dhi)
        r = self.fk.forward(lo, hi)
        self.state.eval_count_F += 1
        if r[0] <= r[1]:
            self.state.push(r[0], lo, hi)

    # -- bookkeeping ----------------------------------------------------------

    @property
    def done(self) -> bool:
        return self.status is not None

    def _emit(self, event: str, **values) -> None:
        if self.progress is not None:
            self.progress(event, values)

    def _record(self, event: str) -> None:
        s = self.state
        self._emit(event, iteration=s.iterations, f_best=s.best_ub,
                   lower_bound=s.global_lower_bound, queue=len(s.queue))

    def _improve(self, value: float, point, source: str) -> None:
        if self.state.offer(value, point):
            self._record("upper_bound_" + source)

    def _drain(self) -> None:
        msg = self.link.to_ibc.take()
        if msg is not None:
            self._improve(msg.value, msg.point, "de")

    def _cut(self, lb: float) -> None:
        if lb < self.state.cut_lb:
            self.state.cut_lb = lb

    # -- main loop ------------------------------------------------------------

    def step(self) -> bool:
        """Process one box; returns False once the run has finished."""
        if self.status is not None:
            return False
        s = self.state
        if self.link is not None:
            self._drain()
        if self.time_limit is not None and time.perf_counter() - self._t0 > self.time_limit:
            self._finish(TIMEOUT)
            return False
        if not s.queue:
            self._finish(None)
            return False
        lb, _, lo, hi = heapq.heappop(s.queue)
        s.iterations += 1
        if lb >= s.best_ub - self.eps:
            # best-first: every queued box is cut off as well
            self._cut(lb)
            s.queue.clear()
        else:
            self._process(lb, lo, hi)
        if s.iterations % self.progress_every == 0:
            self._record("iteration")
        return True

    def _process(self, lb, lo, hi) -> None:
        s = self.state
        code, lb, ub, m, children, cut, nev = self.proc.process(lo, hi, lb, s.best_ub, self.eps)
        s.eval_count_F += nev
        if m is not None and ub < s.best_ub:
            self._improve(ub, m, "midpoint")
            if self.polish:
                m = self._polish(m, lo, hi)
            if self.link is not None:
                self.link.send(Inject(tuple(m)))
        if code == CUT:
            self._cut(lb)
        elif code == SMALL:
            if lb < s.unresolved_lb:
                s.unresolved_lb = lb
        elif code == BRANCH:
            for clb, clo, chi in children:
                s.push(clb, clo, chi)
            if cut < inf:
                self._cut(cut)

    def _polish(self, m, lo, hi):
        step = [0.25 * (b - a) for a, b in zip(lo, hi)]
        x, nev = polish(self.fk, self.cks, m, step, self.dlo, self.dhi, 100 * self.n)
        self.state.n_float_evals += nev
        ub = _certify_point(self.fk, self.cks, x)
        self.state.eval_count_F += 1
        if ub < self.state.best_ub:
            self._improve(ub, x, "polish")
            return x
        return m

    def _finish(self, status: Optional[str]) -> None:
        s = self.state
        if status is None:
            glb = s.global_lower_bound
            if s.best_ub == inf:
                status = INCOMPLETE if s.unresolved_lb < inf else INFEASIBLE
            elif s.best_ub - glb <= self.eps:
                status = CERTIFIED
            else:
                status = INCOMPLETE
        self.status = status
        self._elapsed = time.perf_counter() - self._t0
        self._record("finished")

    def run(self) -> CertifiedResult:
        while self.step():
            pass
        return self.result()

    def result(self) -> CertifiedResult:
        s = self.state
        elapsed = self._elapsed if self.status else time.perf_counter() - self._t0
        lb = s.global_lower_bound
        if self.status == INFEASIBLE:
            lb = inf
        return CertifiedResult(
            status=self.status or TIMEOUT, f_best=s.best_ub, lower_bound=lb,
            x_best=s.incumbent, wall_time=elapsed, ne_ibc=s.eval_count_F,
            n_f_evals=s.n_float_evals,
            function=self.problem.name, n=self.n, iterations=s.iterations)


def ibc_run(problem, eps: float = 1e-6, time_limit: Optional[float] = None,
            link: Optional[Link] = None, progress: Optional[Callable] = None,
            **kw) -> CertifiedResult:
    """Run IB&C to completion (or timeout) and return the result."""
    return IBCSolver(problem, eps, time_limit, link, progress, **kw).run()
