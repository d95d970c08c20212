"""Pure-Python tape kernels (fallback for the compiled ``_kernel``).

A tape is a topologically ordered node list; node ``i`` has opcode
``ops[i]``, argument node indices ``a[i]``/``b[i]`` and an integer parameter
``k[i]`` (variable index or exponent).  The root is the last node.

Structural-zero rule for tangents: an exactly ``[0, 0]`` tangent is treated
as absent and never enters arithmetic, so both backends agree bit for bit.
"""

import math
from math import inf

from certopt import _ia
from certopt.expr import ABS, ADD, CONST, COS, DIV, EXP, MUL, NEG, POW, SIN, SQRT, SUB, VAR

_E0, _E1 = _ia.EMPTY
_intersect = _ia.intersect


class Tape:
    """Interval and float evaluation routines over one compiled expression."""

    backend = "python"

    def __init__(self, ops, a, b, k, clo, chi, nvars):
        self.ops = list(ops)
        self.a = list(a)
        self.b = list(b)
        self.k = list(k)
        self.clo = list(clo)
        self.chi = list(chi)
        self.nvars = nvars
        self.n_nodes = len(self.ops)
        self.var_nodes = [i for i, op in enumerate(self.ops) if op == VAR]

    def __reduce__(self):
        return (Tape, (self.ops, self.a, self.b, self.k, self.clo, self.chi, self.nvars))

    # -- forward ------------------------------------------------------------

    def _forward(self, lo, hi):
        ops, A, B, K = self.ops, self.a, self.b, self.k
        n = self.n_nodes
        vlo = [0.0] * n
        vhi = [0.0] * n
        for i in range(n):
            op = ops[i]
            if op == VAR:
                j = K[i]
                vlo[i] = lo[j]
                vhi[i] = hi[j]
                continue
            if op == CONST:
                vlo[i] = self.clo[i]
                vhi[i] = self.chi[i]
                continue
            x = A[i]
            xl = vlo[x]
            xh = vhi[x]
            if xl > xh:
                vlo[i], vhi[i] = _E0, _E1
                continue
            if op <= DIV:
                y = B[i]
                yl = vlo[y]
                yh = vhi[y]
                if yl > yh:
                    r = _ia.EMPTY
                elif op == ADD:
                    r = _ia.add(xl, xh, yl, yh)
                elif op == SUB:
                    r = _ia.sub(xl, xh, yl, yh)
                elif op == MUL:
                    r = _ia.mul(xl, xh, yl, yh)
                else:
                    r = _ia.div(xl, xh, yl, yh)
            elif op == POW:
                r = _ia.ipow(xl, xh, K[i])
            elif op == SIN:
                r = _ia.sin(xl, xh)
            elif op == COS:
                r = _ia.cos(xl, xh)
            elif op == NEG:
                r = (-xh, -xl)
            elif op == SQRT:
                r = _ia.sqrt(xl, xh)
            elif op == ABS:
                r = _ia.iabs(xl, xh)
            elif op == EXP:
                r = _ia.exp(xl, xh)
            else:
                raise ValueError(f"bad opcode {op}")
            vlo[i] = r[0]
            vhi[i] = r[1]
        return vlo, vhi

    def forward(self, lo, hi):
        """Natural interval extension over the box ``[lo, hi]``."""
        vlo, vhi = self._forward(lo, hi)
        return vlo[-1], vhi[-1]

    def node_values(self, lo, hi):
        return self._forward(lo, hi)

    # -- HC4 revise ---------------------------------------------------------

    def revise(self, lo, hi, tlo, thi):
        """Contract ``lo``/``hi`` in place w.r.t. ``root in [tlo, thi]``.

        Returns the root enclosure of the forward sweep, or ``None`` when the
        constraint is proven infeasible on the box (the box is then left in an
        unspecified state).
        """
        ops, A, B, K = self.ops, self.a, self.b, self.k
        vlo, vhi = self._forward(lo, hi)
        root = self.n_nodes - 1
        froot = (vlo[root], vhi[root])
        r = _intersect(vlo[root], vhi[root], tlo, thi)
        if r[0] > r[1]:
            return None
        vlo[root], vhi[root] = r
        for i in range(root, -1, -1):
            op = ops[i]
            if op == VAR or op == CONST:
                continue
            zl = vlo[i]
            zh = vhi[i]
            x = A[i]
            xl = vlo[x]
            xh = vhi[x]
            if op <= DIV:
                y = B[i]
                yl = vlo[y]
                yh = vhi[y]
                if op == ADD:
                    t = _ia.sub(zl, zh, yl, yh)
                    nx = _intersect(xl, xh, t[0], t[1])
                    if nx[0] > nx[1]:
                        return None
                    t = _ia.sub(zl, zh, nx[0], nx[1])
                    ny = _intersect(yl, yh, t[0], t[1])
                elif op == SUB:
                    t = _ia.add(zl, zh, yl, yh)
                    nx = _intersect(xl, xh, t[0], t[1])
                    if nx[0] > nx[1]:
                        return None
                    t = _ia.sub(nx[0], nx[1], zl, zh)
                    ny = _intersect(yl, yh, t[0], t[1])
                elif op == MUL:
                    if yl <= 0.0 <= yh and zl <= 0.0 <= zh:
                        nx = (xl, xh)
                    else:
                        t = _ia.div(zl, zh, yl, yh)
                        nx = _intersect(xl, xh, t[0], t[1])
                        if nx[0] > nx[1]:
                            return None
                    if nx[0] <= 0.0 <= nx[1] and zl <= 0.0 <= zh:
                        ny = (yl, yh)
                    else:
                        t = _ia.div(zl, zh, nx[0], nx[1])
                        ny = _intersect(yl, yh, t[0], t[1])
                else:
                    t = _ia.mul(zl, zh, yl, yh)
                    nx = _intersect(xl, xh, t[0], t[1])
                    if nx[0] > nx[1]:
                        return None
                    if nx[0] <= 0.0 <= nx[1] and zl <= 0.0 <= zh:
                        ny = (yl, yh)
                    else:
                        t = _ia.div(nx[0], nx[1], zl, zh)
                        ny = _intersect(yl, yh, t[0], t[1])
                if ny[0] > ny[1]:
                    return None
                vlo[x], vhi[x] = nx
                vlo[y], vhi[y] = ny
                continue
            if op == POW:
                kk = K[i]
                if kk == 0:
                    if not zl <= 1.0 <= zh:
                        return None
                    continue
                if kk == 1:
                    nx = _intersect(xl, xh, zl, zh)
                else:
                    nx = _ia.inv_pow(xl, xh, zl, zh, kk)
            elif op == SIN:
                nx = _ia.inv_sin(xl, xh, zl, zh)
            elif op == COS:
                nx = _ia.inv_cos(xl, xh, zl, zh)
            elif op == NEG:
                nx = _intersect(xl, xh, -zh, -zl)
            elif op == SQRT:
                nx = _ia.inv_sqrt(xl, xh, zl, zh)
            elif op == ABS:
                nx = _ia.inv_abs(xl, xh, zl, zh)
            else:
                nx = _ia.inv_exp(xl, xh, zl, zh)
            if nx[0] > nx[1]:
                return None
            vlo[x], vhi[x] = nx
        for i in self.var_nodes:
            j = K[i]
            a = vlo[i]
            b = vhi[i]
            if a > lo[j]:
                lo[j] = a
            if b < hi[j]:
                hi[j] = b
            if lo[j] > hi[j]:
                return None
        return froot

    # -- forward-mode interval AD -------------------------------------------

    def gradient(self, lo, hi):
        """Interval gradient over the box.

        Returns ``(glo, ghi, kink)`` where ``kink`` reports whether some
        ``abs`` argument straddles zero on the box.
        """
        ops, A, B, K = self.ops, self.a, self.b, self.k
        vlo, vhi = self._forward(lo, hi)
        tan = [None] * self.n_nodes
        kink = False
        for i in range(self.n_nodes):
            op = ops[i]
            if op == VAR:
                tan[i] = {K[i]: (1.0, 1.0)}
                continue
            if op == CONST:
                tan[i] = {}
                continue
            x = A[i]
            dx = tan[x]
            xl = vlo[x]
            xh = vhi[x]
            if op == ADD:
                tan[i] = _tadd(dx, tan[B[i]])
            elif op == SUB:
                tan[i] = _tsub(dx, tan[B[i]])
            elif op == MUL:
                y = B[i]
                tan[i] = _tadd(_tscale(dx, vlo[y], vhi[y]), _tscale(tan[y], xl, xh))
            elif op == DIV:
                y = B[i]
                t = _tsub(dx, _tscale(tan[y], vlo[i], vhi[i]))
                tan[i] = _tdiv(t, vlo[y], vhi[y])
            elif op == NEG:
                tan[i] = {j: (-v[1], -v[0]) for j, v in dx.items()}
            elif op == POW:
                kk = K[i]
                if kk == 0:
                    tan[i] = {}
                elif kk == 1:
                    tan[i] = dx
                else:
                    pl, ph = _ia.ipow(xl, xh, kk - 1)
                    cl, ch = _ia.mul(float(kk), float(kk), pl, ph)
                    tan[i] = _tscale(dx, cl, ch)
            elif op == SIN:
                cl, ch = _ia.cos(xl, xh)
                tan[i] = _tscale(dx, cl, ch)
            elif op == COS:
                sl, sh = _ia.sin(xl, xh)
                tan[i] = _tscale(dx, -sh, -sl)
            elif op == EXP:
                tan[i] = _tscale(dx, vlo[i], vhi[i])
            elif op == SQRT:
                dl, dh = _ia.mul(2.0, 2.0, vlo[i], vhi[i])
                tan[i] = _tdiv(dx, dl, dh)
            elif op == ABS:
                if xl <= 0.0 <= xh:
                    kink = True
                sl, sh = _ia.abs_subderivative(xl, xh)
                tan[i] = _tscale(dx, sl, sh)
        root = tan[-1]
        glo = [0.0] * self.nvars
        ghi = [0.0] * self.nvars
        for j, v in root.items():
            glo[j] = v[0]
            ghi[j] = v[1]
        return glo, ghi, kink

    # -- plain floats -------------------------------------------------------

    def eval_float(self, x):
        ops, A, B, K = self.ops, self.a, self.b, self.k
        n = self.n_nodes
        v = [0.0] * n
        for i in range(n):
            op = ops[i]
            try:
                if op == VAR:
                    v[i] = x[K[i]]
                elif op == CONST:
                    v[i] = 0.5 * (self.clo[i] + self.chi[i])
                elif op == ADD:
                    v[i] = v[A[i]] + v[B[i]]
                elif op == SUB:
                    v[i] = v[A[i]] - v[B[i]]
                elif op == MUL:
                    v[i] = v[A[i]] * v[B[i]]
                elif op == DIV:
                    v[i] = v[A[i]] / v[B[i]]
                elif op == NEG:
                    v[i] = -v[A[i]]
                elif op == POW:
                    v[i] = math.pow(v[A[i]], K[i])
                elif op == SIN:
                    v[i] = math.sin(v[A[i]])
                elif op == COS:
                    v[i] = math.cos(v[A[i]])
                elif op == EXP:
                    v[i] = math.exp(v[A[i]])
                elif op == SQRT:
                    v[i] = math.sqrt(v[A[i]])
                else:
                    v[i] = abs(v[A[i]])
            except ZeroDivisionError:
                num = v[A[i]]
                if num == 0.0 or num != num:
                    v[i] = math.nan
                else:
                    v[i] = math.copysign(inf, num) * math.copysign(1.0, v[B[i]])
            except OverflowError:
                # IEEE semantics, matching the compiled kernel
                if op == POW and K[i] & 1:
                    v[i] = math.copysign(inf, v[A[i]])
                else:
                    v[i] = inf
            except ValueError:
                v[i] = math.nan
        return v[-1]


def _tadd(p, q):
    if not q:
        return p
    if not p:
        return q
    out = dict(p)
    for j, (c, d) in q.items():
        if j in out:
            a, b = out[j]
            out[j] = _ia.add(a, b, c, d)
        else:
            out[j] = (c, d)
    return out


def _tsub(p, q):
    if not q:
        return p
    out = dict(p)
    for j, (c, d) in q.items():
        if j in out:
            a, b = out[j]
            out[j] = _ia.sub(a, b, c, d)
        else:
            out[j] = (-d, -c)
    return out


def _tscale(p, c, d):
    out = {}
    for j, (a, b) in p.items():
        r = _ia.mul(a, b, c, d)
        if r[0] != 0.0 or r[1] != 0.0:
            out[j] = r
    return out


def _tdiv(p, c, d):
    out = {}
    for j, (a, b) in p.items():
        r = _ia.div(a, b, c, d)
        if r[0] != 0.0 or r[1] != 0.0:
            out[j] = r
    return out


# -- one IB&C box step --------------------------------------------------------

# outcome codes of BoxProcessor.process
DROP, CUT, MONOTONE, SMALL, BRANCH = range(5)


def _split_point(a, b):
    m = 0.5 * (a + b)
    if m == inf or m == -inf:
        m = 0.5 * a + 0.5 * b
    return min(max(m, a), b)


class BoxProcessor:
    """Contract, test and split one box (the body of the IB&C loop).

    With ``mean_value`` set, the lower bound of each box is also taken from
    the mean-value form ``f(m) + G(X)·(X - m)``, which tightens
    quadratically with the box width.

    ``process`` returns ``(code, lb, ub, mid, children, cut_lb, n_evals)``:
    ``ub`` is the certified upper bound at the midpoint ``mid`` (``inf`` if
    the midpoint was not tested or not proven feasible), ``children`` the
    list of ``(lb, lo, hi)`` to enqueue, and ``cut_lb`` the smallest lower
    bound among children discarded by the cut-off test.
    """

    backend = "python"

    def __init__(self, fk, cks, dlo, dhi, rtol=0.01, min_width=1e-12, max_passes=100,
                 mean_value=True):
        self.fk = fk
        self.mean_value = bool(mean_value)
        self.cks = list(cks)
        self.dlo = list(dlo)
        self.dhi = list(dhi)
        self.rtol = rtol
        self.min_width = min_width
        self.max_passes = max_passes

    def certify(self, x):
        for ck in self.cks:
            if not ck.forward(x, x)[1] <= 0.0:
                return inf
        r = self.fk.forward(x, x)
        if r[0] > r[1]:
            return inf
        return r[1]

    def process(self, lo, hi, lb, best_ub, eps):
        fk = self.fk
        n = len(lo)
        nev = 1
        w = 0.0
        for j in range(n):
            w += hi[j] - lo[j]
        croots = []
        fr = None
        for _ in range(self.max_passes):
            croots = []
            for ck in self.cks:
                r = ck.revise(lo, hi, -inf, 0.0)
                if r is None:
                    return DROP, lb, inf, None, [], inf, nev
                croots.append(r)
            fr = fk.revise(lo, hi, -inf, best_ub)
            if fr is None:
                return DROP, lb, inf, None, [], inf, nev
            nw = 0.0
            for j in range(n):
                nw += hi[j] - lo[j]
            if not nw < (1.0 - self.rtol) * w:
                break
            w = nw
        if fr[0] > lb:
            lb = fr[0]
        if lb >= best_ub - eps:
            return CUT, lb, inf, None, [], inf, nev
        glo = ghi = None
        if self.mean_value:
            glo, ghi, kink = fk.gradient(lo, hi)
        interior = True
        for j in range(n):
            if not (self.dlo[j] < lo[j] and hi[j] < self.dhi[j]):
                interior = False
                break
        if interior:
            feasible = True
            for r in croots:
                if not r[1] < 0.0:
                    feasible = False
                    break
            if feasible:
                if glo is None:
                    glo, ghi, kink = fk.gradient(lo, hi)
                if not kink:
                    for a, b in zip(glo, ghi):
                        if a > 0.0 or b < 0.0:
                            return MONOTONE, lb, inf, None, [], inf, nev
        m = [_split_point(lo[j], hi[j]) for j in range(n)]
        ub = inf
        feasible = True
        for ck in self.cks:
            if not ck.forward(m, m)[1] <= 0.0:
                feasible = False
                break
        fl, fh = fk.forward(m, m)
        nev += 1
        if fl <= fh and feasible:
            ub = fh
        if fl <= fh and self.mean_value:
            # mean-value form: f(X) within f(m) + G(X) (X - m)
            al, ah = fl, fh
            for j in range(len(glo)):
                gl, gh = glo[j], ghi[j]
                if gl == 0.0 and gh == 0.0:
                    continue
                dl, dh = _ia.sub(lo[j], hi[j], m[j], m[j])
                tl, th = _ia.mul(gl, gh, dl, dh)
                al, ah = _ia.add(al, ah, tl, th)
            if al > lb:
                lb = al
        ubest = ub if ub < best_ub else best_ub
        if lb >= ubest - eps:
            return CUT, lb, ub, m, [], inf, nev
        i = 0
        wi = hi[0] - lo[0]
        for j in range(1, n):
            if hi[j] - lo[j] > wi:
                i = j
                wi = hi[j] - lo[j]
        if not wi > self.min_width:
            return SMALL, lb, ub, m, [], inf, nev
        c = _split_point(lo[i], hi[i])
        lo2 = lo[:]
        hi1 = hi[:]
        hi1[i] = c
        lo2[i] = c
        thr = ubest - eps
        children = []
        cut = inf
        for clo, chi in ((lo, hi1), (lo2, hi)):
            r = fk.forward(clo, chi)
            nev += 1
            if r[0] > r[1]:
                continue
            clb = r[0] if r[0] > lb else lb
            if clb >= thr:
                if clb < cut:
                    cut = clb
            else:
                children.append((clb, clo, chi))
        return BRANCH, lb, ub, m, children, cut, nev
