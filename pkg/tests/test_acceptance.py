"""Acceptance criteria.

Every check prints one ``PASS``/``FAIL`` line; the lines are repeated in the
pytest terminal summary.  Run ``python3 tests/test_acceptance.py`` to get
the lines without pytest.
"""

import io
import math
import random
import time
from functools import lru_cache

import numpy as np
import pytest

from certopt import benchmarks, cli
from certopt.contractor import fixpoint_contract
from certopt.cooperation import IBC_ONLY, run_hybrid, run_single
from certopt.de import DEConfig
from certopt.evaluation import certified_point_value, natural_extension
from certopt.expr import var
from certopt.ibc import IBCSolver
from certopt.interval import Box
from certopt.result import CERTIFIED, TIMEOUT

EPS = 1e-6
TIME_BUDGET = 120.0
LINES: list = []


def report(tag: str, ok: bool, detail: str) -> bool:
    line = f"{'PASS' if ok else 'FAIL'} [{tag}] {detail}"
    LINES.append(line)
    print(line)
    return ok


@lru_cache(maxsize=None)
def certified(name: str, n: int, syntax: str = "rewritten"):
    p = benchmarks.make_problem(name, n, rana_syntax=syntax)
    t0 = time.perf_counter()
    r = run_single(p, IBC_ONLY, eps=EPS)
    return r, time.perf_counter() - t0


# -- 1. certified minima --------------------------------------------------------------------

CRITERION_1 = [
    ("michalewicz", 2, -1.8013034), ("michalewicz", 3, -2.7603947),
    ("michalewicz", 4, -3.6988571), ("michalewicz", 5, -4.6876582),
    ("egg_holder", 2, -959.6406627), ("egg_holder", 3, -1888.3213909),
    ("rana", 2, -511.7328819), ("rana", 3, -1023.4166105), ("rana", 4, -1535.1243381),
    ("sine_envelope", 2, -1.4914953), ("sine_envelope", 3, -2.9829906),
    ("keane", 2, -0.3649797),
    ("shekel", 2, -12.1190084), ("shekel", 3, -11.0307623),
    ("shekel", 4, -10.4649942), ("shekel", 5, -10.4039521),
]


@pytest.mark.parametrize("name,n,value", CRITERION_1, ids=[f"{a}-{b}" for a, b, _ in CRITERION_1])
def test_c1_certified_minimum(name, n, value):
    r, dt = certified(name, n)
    ok = r.status == CERTIFIED and abs(r.f_best - value) <= 1e-6 and dt <= TIME_BUDGET
    report("1", ok, f"{name} n={n}: {r.status} f~={r.f_best:.7f} (published {value}), "
                    f"|diff|={abs(r.f_best - value):.1e}, {dt:.2f} s")
    assert ok


def test_c1_keane_minimizer_certified_feasible():
    p = benchmarks.make_problem("keane", 2)
    r, _ = certified("keane", 2)
    feas = all(certified_point_value(c.body, r.x_best).hi <= 0.0 for c in p.constraints)
    near = max(abs(a - b) for a, b in zip(r.x_best, (1.600860, 0.468498))) <= 1e-4
    ok = feas and near
    report("1", ok, f"keane n=2: solver minimizer {tuple(round(v, 6) for v in r.x_best)} is "
                    f"interval-certified feasible and within 1e-4 of (1.600860, 0.468498)")
    assert ok


@pytest.mark.xfail(strict=True, reason="the 6-decimal published point violates g1 by ~2.9e-7")
def test_c1_keane_published_point_certified_feasible():
    p = benchmarks.make_problem("keane", 2)
    g = [certified_point_value(c.body, (1.600860, 0.468498)) for c in p.constraints]
    ok = all(e.hi <= 0.0 for e in g)
    report("1", ok, f"keane n=2: literal point (1.600860, 0.468498) certified feasible "
                    f"(g1 enclosure hi = {g[0].hi:.2e}; rounding of the published digits)")
    assert ok


# -- 3. putative-minimum fits ---------------------------------------------------------------


def _certified_or_published(name, n, here):
    """Certify here when feasible on a desktop, else use the published value."""
    if n in here:
        r, _ = certified(name, n)
        assert r.status == CERTIFIED
        return r.f_best, "certified here"
    return benchmarks.reference_minimum(name, n)["value"], "published"


@pytest.mark.parametrize("name,ns,tol,here", [
    ("sine_envelope", range(2, 7), 1e-4, (2, 3)),
    ("rana", range(2, 8), 0.05, (2, 3, 4)),
    ("michalewicz", (50,), 1e-2, ()),
])
def test_c3_putative_fits(name, ns, tol, here):
    worst, srcs = 0.0, set()
    for n in ns:
        v, src = _certified_or_published(name, n, here)
        srcs.add(src)
        worst = max(worst, abs(benchmarks.putative_minimum(name, n) - v))
    ok = worst <= tol
    report("3", ok, f"{name} n={min(ns)}..{max(ns)}: max |fit - certified| = {worst:.2e} "
                    f"<= {tol} ({' + '.join(sorted(srcs))} values)")
    assert ok


# -- 4. rewriting speedup --------------------------------------------------------------------


def test_c4_rana_rewriting_speedup():
    rew, t_rew = certified("rana", 4)
    assert rew.status == CERTIFIED
    p = benchmarks.make_problem("rana", 4, rana_syntax="original")
    limit = 10.0 * t_rew
    t0 = time.perf_counter()
    orig = run_single(p, IBC_ONLY, eps=EPS, time_limit=limit)
    t_orig = time.perf_counter() - t0
    # a timeout at 10x the rewritten time already proves the ratio
    ok = orig.status == TIMEOUT or t_orig >= 10.0 * t_rew
    ratio = ">=" if orig.status == TIMEOUT else "="
    report("4", ok, f"rana n=4: rewritten {t_rew:.2f} s, original {orig.status} after "
                    f"{t_orig:.2f} s, speedup {ratio} {t_orig / t_rew:.1f}x")
    assert ok


# -- 5. dependency showcase -------------------------------------------------------------------

x = var(0)


@pytest.mark.parametrize("label,expr,box,lo,hi,ops,scale", [
    ("x^2-2x on [1,4]", x ** 2 - 2 * x, (1, 4), -7, 14, 3, 16),
    ("(x-1)^2-1 on [1,4]", (x - 1) ** 2 - 1, (1, 4), -1, 8, 3, 9),
    ("x^4-4x^2 on [-1,4]", x ** 4 - 4 * x ** 2, (-1, 4), -64, 256, 5, 256),
    ("x^4-4x^2 on [3,4]", x ** 4 - 4 * x ** 2, (3, 4), 17, 220, 5, 256),
])
def test_c5_dependency(label, expr, box, lo, hi, ops, scale):
    r = natural_extension(expr, Box([box]))
    tol = 2 * ops * math.ulp(scale)
    ok = r.lo <= lo and hi <= r.hi and lo - r.lo <= tol and r.hi - hi <= tol
    report("5", ok, f"{label}: {r!r}, expected [{lo}, {hi}]")
    assert ok


# -- 6. property suites --------------------------------------------------------------------------

SUITE = ["michalewicz", "sine_envelope", "shekel", "egg_holder", "rana", "keane"]


def _subbox(rng, lo, hi, frac):
    blo, bhi = [], []
    for a, b in zip(lo, hi):
        w = (b - a) * rng.uniform(0.0, frac)
        s = rng.uniform(a, b - w)
        blo.append(s)
        bhi.append(min(s + w, b))
    return blo, bhi


@pytest.mark.parametrize("name", SUITE)
def test_c6_inclusion_fuzz(name):
    p = benchmarks.make_problem(name, 5)
    ce = p.objective.tape
    rng = random.Random(1)
    nprng = np.random.default_rng(1)
    bad = total = 0
    for _ in range(500):
        blo, bhi = _subbox(rng, p.domain.lo, p.domain.hi, rng.choice([1e-4, 1e-2, 0.3, 1.0]))
        F = ce.forward(blo, bhi)
        X = np.clip(np.asarray(blo) + nprng.random((20, 5)) * (np.subtract(bhi, blo)), blo, bhi)
        v = ce.eval_batch(X)
        bad += int(np.sum(~((F[0] <= v) & (v <= F[1]))))
        total += len(v)
    ok = bad == 0 and total == 10_000
    report("6", ok, f"inclusion fuzz {name} n=5: {total - bad}/{total} points inside F_N")
    assert ok


@pytest.mark.parametrize("n", [2, 3, 4])
def test_c6_contractor_soundness(n):
    p = benchmarks.make_problem("keane", n)
    rng = random.Random(n)
    total = lost = 0
    while total < 10_000:
        blo, bhi = _subbox(rng, p.domain.lo, p.domain.hi, rng.choice([1.0, 0.3, 0.05]))
        pts = []
        for _ in range(200):
            pt = [rng.uniform(a, b) for a, b in zip(blo, bhi)]
            if all(g <= -1e-9 for g in p.constraint_values(pt)):
                pts.append(pt)
            if len(pts) == 25:
                break
        if not pts:
            continue
        C = fixpoint_contract(p.constraints, Box.from_bounds(blo, bhi))
        lost += sum(1 for pt in pts if C.is_empty or pt not in C)
        total += len(pts)
    ok = lost == 0
    report("6", ok, f"contractor soundness keane n={n}: {total - lost}/{total} feasible points kept")
    assert ok


@pytest.mark.parametrize("name", SUITE)
def test_c6_gradient_finite_differences(name):
    p = benchmarks.make_problem(name, 4)
    ce = p.objective.tape
    rng = random.Random(2)
    h = 1e-5
    checked = bad = 0
    while checked < 1000:
        pt = [rng.uniform(a + 2 * h, b - 2 * h) for a, b in zip(p.domain.lo, p.domain.hi)]
        glo, ghi, kink = ce.gradient([v - h for v in pt], [v + h for v in pt])
        if kink:
            continue
        tol = 1e3 * 2.3e-16 * (abs(ce.eval_float(pt)) + 1.0) / h
        for j in range(4):
            xp, xm = pt[:], pt[:]
            xp[j] += h
            xm[j] -= h
            fd = (ce.eval_float(xp) - ce.eval_float(xm)) / (xp[j] - xm[j])
            bad += not (glo[j] - tol <= fd <= ghi[j] + tol)
        checked += 1
    ok = bad == 0
    report("6", ok, f"gradient vs central differences {name} n=4: {checked} points, "
                    f"{bad} misses")
    assert ok


def test_c6_bracketing_logged_run():
    p = benchmarks.make_problem("michalewicz", 2)
    log = []
    s = IBCSolver(p, eps=EPS, progress=lambda e, v: log.append(v) if e == "iteration" else None,
                  progress_every=1)
    s.run()
    fstar_lo, fstar_hi = -1.8013034 - 5e-8, -1.8013034 + 5e-8
    viol = sum(1 for v in log if not (v["lower_bound"] <= fstar_hi
                                      and (v["f_best"] == math.inf or v["f_best"] >= fstar_lo)))
    ok = viol == 0 and len(log) == s.state.iterations > 0
    report("6", ok, f"bracketing michalewicz n=2: {len(log)} logged iterations, {viol} violations")
    assert ok


@pytest.mark.parametrize("name,n", [("michalewicz", 2), ("michalewicz", 3), ("egg_holder", 2)])
def test_c6_hybrid_matches_ibc_only(name, n):
    a, _ = certified(name, n)
    b = run_hybrid(benchmarks.make_problem(name, n),
                   DEConfig(*benchmarks.de_defaults(name), seed=0), eps=EPS)
    ok = a.status == b.status == CERTIFIED and abs(a.f_best - b.f_best) <= 2 * EPS
    report("6", ok, f"hybrid vs ibc-only {name} n={n}: |diff| = {abs(a.f_best - b.f_best):.1e}")
    assert ok


# -- 7. determinism ---------------------------------------------------------------------------


def test_c7_deterministic_interleaved():
    outs = []
    for _ in range(2):
        buf = io.StringIO()
        code = cli.main(["rana", "2", "--mode", "deterministic-interleaved", "--format",
                         "json-lines", "--seed", "0", "--progress-every", "10"], stdout=buf)
        outs.append((code, buf.getvalue().encode()))
    ok = outs[0] == outs[1] and outs[0][0] == 0
    report("7", ok, f"rana n=2 deterministic-interleaved: two runs byte-identical "
                    f"({len(outs[0][1])} bytes)")
    assert ok


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
