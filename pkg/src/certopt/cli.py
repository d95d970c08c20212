"""Command-line runner.

Example::

    certopt egg_holder 3 --mode hybrid --format text
    certopt rana 2 --mode deterministic-interleaved --format json-lines
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, TextIO

from certopt import benchmarks
from certopt.benchmarks import ConfigError
from certopt.cooperation import DE_ONLY, IBC_ONLY, run_hybrid, run_interleaved, run_single
from certopt.de import DEConfig
from certopt.result import (CERTIFIED, HEURISTIC, INCOMPLETE, INFEASIBLE, TIMEOUT,
                            CertifiedResult)

HYBRID = "hybrid"
INTERLEAVED = "deterministic-interleaved"
MODES = (HYBRID, IBC_ONLY, DE_ONLY, INTERLEAVED)
FORMATS = ("text", "json-lines", "csv")

EXIT_CODES = {CERTIFIED: 0, HEURISTIC: 0, TIMEOUT: 3, INFEASIBLE: 4, INCOMPLETE: 5}
EXIT_CONFIG = 2

CSV_COLUMNS = ("function", "n", "status", "fbest", "lb", "time_s", "ne_de", "ne_ibc")


@dataclass
class RunConfig:
    """Everything needed to reproduce a run."""

    function: str
    n: int
    eps: float = 1e-6
    mode: str = HYBRID
    NP: Optional[int] = None
    W: Optional[float] = None
    CR: Optional[float] = None
    seed: Optional[int] = 0
    rana_syntax: str = "rewritten"
    time_limit: Optional[float] = None
    output_format: str = "text"
    progress_every: int = 10000
    max_generations: int = 500

    def validate(self) -> RunConfig:
        """Fill DE defaults and check every field; raises ConfigError."""
        self.function = benchmarks.canonical_name(self.function)
        if not isinstance(self.n, int) or self.n < 2:
            raise ConfigError(f"n must be an integer >= 2, got {self.n!r}")
        if not (isinstance(self.eps, (int, float)) and self.eps > 0 and math.isfinite(self.eps)):
            raise ConfigError(f"eps must be a positive number, got {self.eps!r}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.output_format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.output_format!r}")
        if self.rana_syntax not in benchmarks.RANA_SYNTAXES:
            raise ConfigError(f"rana syntax must be one of {benchmarks.RANA_SYNTAXES}")
        if self.time_limit is not None and not self.time_limit > 0:
            raise ConfigError("time limit must be positive")
        NP, W, CR = benchmarks.de_defaults(self.function)
        self.NP = NP if self.NP is None else self.NP
        self.W = W if self.W is None else self.W
        self.CR = CR if self.CR is None else self.CR
        try:
            DEConfig(self.NP, self.W, self.CR, self.seed)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self

    @property
    def de_config(self) -> DEConfig:
        return DEConfig(self.NP, self.W, self.CR, self.seed)


def run(config: RunConfig, progress: Optional[Callable] = None) -> CertifiedResult:
    """Validate ``config``, build the problem and dispatch to the mode."""
    config.validate()
    problem = benchmarks.make_problem(config.function, config.n, rana_syntax=config.rana_syntax)
    kw = dict(eps=config.eps, time_limit=config.time_limit, progress=progress,
              progress_every=config.progress_every)
    if config.mode == HYBRID:
        res = run_hybrid(problem, config.de_config, **kw)
    elif config.mode == INTERLEAVED:
        res = run_interleaved(problem, config.de_config, **kw)
    elif config.mode == IBC_ONLY:
        res = run_single(problem, IBC_ONLY, **kw)
    else:
        res = run_single(problem, DE_ONLY, config.de_config,
                         max_generations=config.max_generations, **kw)
    res.function = problem.name
    res.n = problem.n
    return res


def exit_code(result: CertifiedResult) -> int:
    return EXIT_CODES.get(result.status, 1)


# -- reporting ---------------------------------------------------------------------


def _fmt(v: float) -> str:
    if math.isinf(v):
        return "+inf" if v > 0 else "-inf"
    return f"{v:.7f}"


def report_table(results: Sequence[CertifiedResult]) -> str:
    """Plain-text table of results, values to 7 decimals.

    Certified rows show ``f~``; other rows show the bracket ``[lb, f~]``.
    """
    header = ("Function", "n", "Status", "Global minimum", "Solution", "Time (s)",
              "NE_DE + NE_IBC")
    rows = []
    for r in results:
        if r.status in (CERTIFIED, HEURISTIC):
            value = _fmt(r.f_best)
        else:
            value = f"[{_fmt(r.lower_bound)}, {_fmt(r.f_best)}]"
        sol = "-" if not r.x_best else "(" + ", ".join(f"{v:.6f}" for v in r.x_best) + ")"
        rows.append((r.function, str(r.n), r.status, value, sol, f"{r.wall_time:.2f}",
                     f"{r.ne_de} + {r.ne_ibc}"))
    widths = [max(len(h), *(len(row[i]) for row in rows)) if rows else len(h)
              for i, h in enumerate(header)]
    line = "  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()
    out = [line, "-" * len(line)]
    for row in rows:
        out.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(out) + "\n"


def csv_rows(results: Sequence[CertifiedResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in results:
        w.writerow((r.function, r.n, r.status, repr(r.f_best), repr(r.lower_bound),
                    f"{r.wall_time:.6f}", r.ne_de, r.ne_ibc))
    return buf.getvalue()


def _json_default(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return list(v)
    return str(v)


def _clean(values: dict) -> dict:
    out = {}
    for k, v in values.items():
        if isinstance(v, float) and not math.isfinite(v):
            v = repr(v)
        elif isinstance(v, tuple):
            v = list(v)
        out[k] = v
    return out


class JsonLinesSink:
    """Writes ``{worker, event, values}`` records, one per line.

    Output is serialized under a lock because both workers report
    concurrently in hybrid mode.
    """

    def __init__(self, stream: TextIO):
        import threading
        self.stream = stream
        self._lock = threading.Lock()

    def __call__(self, worker: str, event: str, values: dict) -> None:
        line = json.dumps({"worker": worker, "event": event, "values": _clean(values)},
                          sort_keys=True, default=_json_default)
        with self._lock:
            self.stream.write(line + "\n")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="certopt",
        description="Certify the global minimum of a benchmark function.")
    p.add_argument("function", help="michalewicz, sine_envelope, shekel, egg_holder, rana or keane")
    p.add_argument("n", type=int, help="dimension (>= 2)")
    p.add_argument("--eps", type=float, default=1e-6, help="certification precision")
    p.add_argument("--mode", choices=MODES, default=HYBRID)
    p.add_argument("--np", dest="NP", type=int, help="DE population size")
    p.add_argument("--w", dest="W", type=float, help="DE weighting factor")
    p.add_argument("--cr", dest="CR", type=float, help="DE crossover rate")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rana-syntax", choices=benchmarks.RANA_SYNTAXES, default="rewritten")
    p.add_argument("--time-limit", type=float, help="seconds")
    p.add_argument("--format", dest="output_format", choices=FORMATS, default="text")
    p.add_argument("--progress-every", type=int, default=10000,
                   help="iterations (generations) between progress records")
    p.add_argument("--max-generations", type=int, default=500, help="budget of de-only mode")
    return p


def main(argv: Optional[Sequence[str]] = None, stdout: TextIO = None,
         stderr: TextIO = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    cfg = RunConfig(**vars(args))
    try:
        cfg.validate()
    except ConfigError as exc:
        print(f"certopt: configuration error: {exc}", file=stderr)
        return EXIT_CONFIG
    sink = JsonLinesSink(stdout) if cfg.output_format == "json-lines" else None
    try:
        res = run(cfg, progress=sink)
    except ConfigError as exc:
        print(f"certopt: configuration error: {exc}", file=stderr)
        return EXIT_CONFIG
    if cfg.output_format == "json-lines":
        values = res.to_dict()
        if cfg.mode == INTERLEAVED:
            # keep the stream reproducible byte for byte
            values.pop("wall_time")
        sink("runner", "result", values)
    elif cfg.output_format == "csv":
        stdout.write(csv_rows([res]))
    else:
        stdout.write(report_table([res]))
    stdout.flush()
    return exit_code(res)


if __name__ == "__main__":
    sys.exit(main())
