"""Cooperation between DE and IB&C.

* DE certifies each improved best individual with interval arithmetic and
  posts the upper bound to IB&C.
* IB&C folds received bounds into ``f~`` by ``min``.
* IB&C sends every improving box midpoint to DE, which replaces its worst
  individual with it.

``run_hybrid`` runs DE in a background thread and IB&C in the caller's
thread.  ``run_interleaved`` alternates one DE generation with one IB&C
iteration on a single thread and is bit-reproducible.
"""

from __future__ import annotations

import threading
import time
from typing import Callable, Optional

from certopt.de import DEConfig, DEEngine, de_run
from certopt.ibc import IBCSolver
from certopt.messages import Inject, Link, Terminate, UpperBound  # noqa: F401
from certopt.result import HEURISTIC, CertifiedResult

IBC_ONLY = "ibc-only"
DE_ONLY = "de-only"


def _tagged(progress: Optional[Callable], worker: str):
    if progress is None:
        return None

    def sink(event, values):
        progress(worker, event, values)
    return sink


def _merge(res: CertifiedResult, de: DEEngine) -> CertifiedResult:
    res.ne_de = de.ne_de
    res.n_f_evals += de.n_f_evals
    res.extra["de_generations"] = de.generation
    return res


def run_hybrid(problem, de_cfg: DEConfig, eps: float = 1e-6,
               time_limit: Optional[float] = None, progress: Optional[Callable] = None,
               progress_every: int = 10000, throttle: bool = True) -> CertifiedResult:
    """Certify the global minimum with DE and IB&C running concurrently.

    ``progress(worker, event, values)`` receives records from both
    workers, tagged ``"de"`` or ``"ibc"``.
    """
    t0 = time.perf_counter()
    link = Link()
    de = DEEngine(problem, de_cfg, link, _tagged(progress, "de"), progress_every)
    remaining = None if time_limit is None else max(0.0, time_limit - (time.perf_counter() - t0))
    ibc = IBCSolver(problem, eps, remaining, link, _tagged(progress, "ibc"), progress_every)
    worker = threading.Thread(target=de_run, name="de-worker",
                              kwargs=dict(problem=problem, cfg=de_cfg, link=link,
                                          throttle=throttle, engine=de),
                              daemon=True)
    worker.start()
    try:
        res = ibc.run()
    finally:
        link.terminate()
        worker.join()
    link.final = Terminate(res)
    res.wall_time = time.perf_counter() - t0
    return _merge(res, de)


def run_interleaved(problem, de_cfg: DEConfig, eps: float = 1e-6,
                    time_limit: Optional[float] = None, progress: Optional[Callable] = None,
                    progress_every: int = 10000, k: int = 1) -> CertifiedResult:
    """Deterministic single-thread cooperation: ``k`` DE generations, then
    ``k`` IB&C iterations, repeated until IB&C finishes."""
    t0 = time.perf_counter()
    link = Link()
    de = DEEngine(problem, de_cfg, link, _tagged(progress, "de"), progress_every)
    ibc = IBCSolver(problem, eps, time_limit, link, _tagged(progress, "ibc"), progress_every)
    while not ibc.done:
        for _ in range(k):
            de.step()
        for _ in range(k):
            if not ibc.step():
                break
    res = ibc.result()
    link.terminate(res)
    res.wall_time = time.perf_counter() - t0
    return _merge(res, de)


def run_single(problem, mode: str, de_cfg: Optional[DEConfig] = None, eps: float = 1e-6,
               time_limit: Optional[float] = None, progress: Optional[Callable] = None,
               progress_every: int = 10000, max_generations: int = 500) -> CertifiedResult:
    """Run one engine alone.

    ``ibc-only`` certifies without DE bounds.  ``de-only`` runs
    ``max_generations`` generations (or until ``time_limit``) and reports
    the best point found with status ``heuristic``; its ``f_best`` is a
    plain float value and ``lower_bound`` is ``-inf``.
    """
    if mode == IBC_ONLY:
        ibc = IBCSolver(problem, eps, time_limit, None, _tagged(progress, "ibc"), progress_every)
        return ibc.run()
    if mode != DE_ONLY:
        raise ValueError(f"mode must be {IBC_ONLY!r} or {DE_ONLY!r}, got {mode!r}")
    t0 = time.perf_counter()
    de = de_run(problem, de_cfg or DEConfig(), None, _tagged(progress, "de"),
                max_generations=max_generations, time_limit=time_limit)
    best = de.best_individual
    f = best.eval.f if best.eval.f is not None else float("inf")
    res = CertifiedResult(status=HEURISTIC, f_best=f, lower_bound=float("-inf"),
                          x_best=best.position, wall_time=time.perf_counter() - t0,
                          function=problem.name, n=problem.n)
    res.extra["n_viol"] = best.eval.n_viol
    res.extra["s_viol"] = best.eval.s_viol
    return _merge(res, de)
