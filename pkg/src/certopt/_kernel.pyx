# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled tape kernels.

Operation-for-operation transcription of ``_ia`` and ``_pykernel``; results
are bit-identical to the pure-Python fallback.  Must be compiled without
floating-point contraction or fast-math.
"""

from libc.math cimport (INFINITY, NAN, acos, asin, ceil, copysign, cos as c_cos,
                        exp as c_exp, fabs, floor, fmod, log as c_log, nextafter,
                        pow as c_pow, sin as c_sin, sqrt as c_sqrt)
from libc.stdlib cimport free, malloc

import math

cdef enum:
    VAR = 0
    CONST = 1
    ADD = 2
    SUB = 3
    MUL = 4
    DIV = 5
    NEG = 6
    POW = 7
    SQRT = 8
    EXP = 9
    SIN = 10
    COS = 11
    ABS = 12

cdef double PI_LO = math.pi
cdef double TWO_OVER_PI = 2.0 / math.pi
cdef double TWO_PI_HI = math.nextafter(2.0 * math.pi, math.inf)
cdef double EXP_MAX = 709.782712893384
cdef int MAX_BRANCHES = 8

cdef struct iv:
    double lo
    double hi


# -- rounding helpers --------------------------------------------------------

cdef inline double dn(double x) nogil:
    return nextafter(x, -INFINITY)

cdef inline double up(double x) nogil:
    return nextafter(x, INFINITY)

cdef inline double dn2(double x) nogil:
    return nextafter(nextafter(x, -INFINITY), -INFINITY)

cdef inline double up2(double x) nogil:
    return nextafter(nextafter(x, INFINITY), INFINITY)

cdef inline iv mk(double a, double b) nogil:
    cdef iv r
    r.lo = a
    r.hi = b
    return r

cdef inline iv empty() nogil:
    return mk(INFINITY, -INFINITY)

cdef inline iv intersect(double a, double b, double c, double d) nogil:
    cdef double lo = a if a > c else c
    cdef double hi = b if b < d else d
    if lo > hi:
        return empty()
    return mk(lo, hi)

cdef inline iv hull(double a, double b, double c, double d) nogil:
    if a > b:
        return mk(c, d)
    if c > d:
        return mk(a, b)
    return mk(a if a < c else c, b if b > d else d)

# sequential min/max with the same tie behaviour as Python's min()/max()
cdef inline double min4(double p, double q, double r, double s) nogil:
    cdef double m = p
    if q < m:
        m = q
    if r < m:
        m = r
    if s < m:
        m = s
    return m

cdef inline double max4(double p, double q, double r, double s) nogil:
    cdef double m = p
    if q > m:
        m = q
    if r > m:
        m = r
    if s > m:
        m = s
    return m


# -- arithmetic ---------------------------------------------------------------

cdef inline iv add(double a, double b, double c, double d) nogil:
    return mk(dn(a + c), up(b + d))

cdef inline iv sub(double a, double b, double c, double d) nogil:
    return mk(dn(a - d), up(b - c))

cdef inline double mdn(double x, double y) nogil:
    if x == 0.0 or y == 0.0:
        return 0.0
    return nextafter(x * y, -INFINITY)

cdef inline double mup(double x, double y) nogil:
    if x == 0.0 or y == 0.0:
        return 0.0
    return nextafter(x * y, INFINITY)

cdef inline iv mul(double a, double b, double c, double d) nogil:
    return mk(min4(mdn(a, c), mdn(a, d), mdn(b, c), mdn(b, d)),
              max4(mup(a, c), mup(a, d), mup(b, c), mup(b, d)))

cdef inline double qdn(double x, double y) nogil:
    cdef double q
    if x == 0.0:
        return 0.0
    q = x / y
    if q != q:
        return -INFINITY
    return nextafter(q, -INFINITY)

cdef inline double qup(double x, double y) nogil:
    cdef double q
    if x == 0.0:
        return 0.0
    q = x / y
    if q != q:
        return INFINITY
    return nextafter(q, INFINITY)

cdef iv div(double a, double b, double c, double d) nogil:
    if c > 0.0 or d < 0.0:
        return mk(min4(qdn(a, c), qdn(a, d), qdn(b, c), qdn(b, d)),
                  max4(qup(a, c), qup(a, d), qup(b, c), qup(b, d)))
    if c == 0.0 and d == 0.0:
        return empty()
    if a == 0.0 and b == 0.0:
        return mk(0.0, 0.0)
    if c == 0.0:
        if a >= 0.0:
            return mk(qdn(a, d), INFINITY)
        if b <= 0.0:
            return mk(-INFINITY, qup(b, d))
        return mk(-INFINITY, INFINITY)
    if d == 0.0:
        if a >= 0.0:
            return mk(-INFINITY, qup(a, c))
        if b <= 0.0:
            return mk(qdn(b, c), INFINITY)
        return mk(-INFINITY, INFINITY)
    return mk(-INFINITY, INFINITY)


# -- elementary functions ----------------------------------------------------

cdef inline iv iabs(double a, double b) nogil:
    if a >= 0.0:
        return mk(a, b)
    if b <= 0.0:
        return mk(-b, -a)
    return mk(0.0, -a if -a > b else b)

cdef iv isqrt(double a, double b) nogil:
    cdef double lo, hi
    if b < 0.0:
        return empty()
    if a <= 0.0:
        lo = 0.0
    else:
        lo = dn(c_sqrt(a))
        if lo < 0.0:
            lo = 0.0
    if b == 0.0:
        hi = 0.0
    else:
        hi = up(c_sqrt(b))
    return mk(lo, hi)

cdef inline double gexp(double x) nogil:
    if x > EXP_MAX:
        return INFINITY
    return c_exp(x)

cdef iv iexp(double a, double b) nogil:
    cdef double lo = dn2(gexp(a))
    if lo < 0.0:
        lo = 0.0
    return mk(lo, up2(gexp(b)))

cdef iv ilog(double a, double b) nogil:
    cdef double lo, hi
    if b <= 0.0:
        return empty()
    if a <= 0.0:
        lo = -INFINITY
    else:
        lo = dn2(c_log(a))
    if b == INFINITY:
        hi = INFINITY
    else:
        hi = up2(c_log(b))
    return mk(lo, hi)

cdef double pow_dn(double x, long k) nogil:
    cdef double result = -1.0
    cdef double base = x
    while True:
        if k & 1:
            result = base if result < 0.0 else mdn(result, base)
        k >>= 1
        if not k:
            break
        base = mdn(base, base)
    return result if result > 0.0 else 0.0

cdef double pow_up(double x, long k) nogil:
    cdef double result = -1.0
    cdef double base = x
    while True:
        if k & 1:
            result = base if result < 0.0 else mup(result, base)
        k >>= 1
        if not k:
            break
        base = mup(base, base)
    return result

cdef iv ipow(double a, double b, long k) nogil:
    cdef double m, lo, hi
    if k == 0:
        return mk(1.0, 1.0)
    if k == 1:
        return mk(a, b)
    if k % 2 == 0:
        if a >= 0.0:
            return mk(pow_dn(a, k), pow_up(b, k))
        if b <= 0.0:
            return mk(pow_dn(-b, k), pow_up(-a, k))
        m = -a if -a > b else b
        return mk(0.0, pow_up(m, k))
    lo = pow_dn(a, k) if a >= 0.0 else -pow_up(-a, k)
    hi = pow_up(b, k) if b >= 0.0 else -pow_dn(-b, k)
    return mk(lo, hi)

cdef double root_dn(double z, long k) nogil:
    cdef double r
    cdef int it
    if z <= 0.0:
        return 0.0
    if z == INFINITY:
        return INFINITY
    if k == 2:
        r = dn(c_sqrt(z))
    else:
        r = dn(c_pow(z, 1.0 / k))
    for it in range(64):
        if r <= 0.0 or pow_up(r, k) <= z:
            return r if r > 0.0 else 0.0
        r = dn(r)
    return 0.0

cdef double root_up(double z, long k) nogil:
    cdef double r
    cdef int it
    if z <= 0.0:
        return 0.0
    if z == INFINITY:
        return INFINITY
    if k == 2:
        r = up(c_sqrt(z))
    else:
        r = up(c_pow(z, 1.0 / k))
    for it in range(64):
        if pow_dn(r, k) >= z:
            return r
        r = up(r)
    return INFINITY

cdef inline double qmargin(double q) nogil:
    return 1e-13 * (1.0 + fabs(q))

cdef inline bint has_residue(double qa, double qb, double r) nogil:
    cdef double k0 = ceil(qa)
    cdef double m = fmod(r - k0, 4.0)
    if m < 0.0:
        m += 4.0
    return k0 + m <= qb

cdef iv isin(double a, double b) nogil:
    cdef double sa, sb, lo, hi, qa, qb
    if not (b - a < TWO_PI_HI) or a == -INFINITY or b == INFINITY:
        return mk(-1.0, 1.0)
    sa = c_sin(a)
    sb = c_sin(b)
    lo = dn2(sa if sa < sb else sb)
    hi = up2(sa if sa > sb else sb)
    if lo < -1.0:
        lo = -1.0
    if hi > 1.0:
        hi = 1.0
    qa = a * TWO_OVER_PI
    qb = b * TWO_OVER_PI
    qa -= qmargin(qa)
    qb += qmargin(qb)
    if has_residue(qa, qb, 1.0):
        hi = 1.0
    if has_residue(qa, qb, 3.0):
        lo = -1.0
    return mk(lo, hi)

cdef iv icos(double a, double b) nogil:
    cdef double ca, cb, lo, hi, qa, qb
    if not (b - a < TWO_PI_HI) or a == -INFINITY or b == INFINITY:
        return mk(-1.0, 1.0)
    ca = c_cos(a)
    cb = c_cos(b)
    lo = dn2(ca if ca < cb else cb)
    hi = up2(ca if ca > cb else cb)
    if lo < -1.0:
        lo = -1.0
    if hi > 1.0:
        hi = 1.0
    qa = a * TWO_OVER_PI
    qb = b * TWO_OVER_PI
    qa -= qmargin(qa)
    qb += qmargin(qb)
    if has_residue(qa, qb, 0.0):
        hi = 1.0
    if has_residue(qa, qb, 2.0):
        lo = -1.0
    return mk(lo, hi)


# -- inverse images -----------------------------------------------------------

cdef iv inv_pow(double xa, double xb, double za, double zb, long k) nogil:
    cdef double rlo, rhi, lo, hi
    cdef iv p, n
    if k % 2 == 0:
        if za < 0.0:
            za = 0.0
        if za > zb:
            return empty()
        rlo = root_dn(za, k)
        rhi = root_up(zb, k)
        p = intersect(xa, xb, rlo, rhi)
        n = intersect(xa, xb, -rhi, -rlo)
        return hull(n.lo, n.hi, p.lo, p.hi)
    lo = root_dn(za, k) if za >= 0.0 else -root_up(-za, k)
    hi = root_up(zb, k) if zb >= 0.0 else -root_dn(-zb, k)
    return intersect(xa, xb, lo, hi)

cdef iv inv_abs(double xa, double xb, double za, double zb) nogil:
    cdef iv p, n
    if za < 0.0:
        za = 0.0
    if za > zb:
        return empty()
    p = intersect(xa, xb, za, zb)
    n = intersect(xa, xb, -zb, -za)
    return hull(n.lo, n.hi, p.lo, p.hi)

cdef iv inv_sqrt(double xa, double xb, double za, double zb) nogil:
    cdef double lo, hi
    if za < 0.0:
        za = 0.0
    if za > zb:
        return empty()
    lo = pow_dn(za, 2)
    hi = INFINITY if zb == INFINITY else pow_up(zb, 2)
    return intersect(xa, xb, lo, hi)

cdef iv inv_exp(double xa, double xb, double za, double zb) nogil:
    cdef iv r = ilog(za, zb)
    if r.lo > r.hi:
        return empty()
    return intersect(xa, xb, r.lo, r.hi)

cdef inline double branch_margin(double c) nogil:
    return 1e-15 * (1.0 + fabs(c))

cdef iv inv_sin(double xa, double xb, double za, double zb) nogil:
    cdef double qa, qb, fj0, fj1, slo, shi, c, m, blo, bhi
    cdef long long j, j0, j1
    cdef iv r, p
    if za < -1.0:
        za = -1.0
    if zb > 1.0:
        zb = 1.0
    if za > zb:
        return empty()
    if xa == -INFINITY or xb == INFINITY or not (xb - xa < TWO_PI_HI):
        return mk(xa, xb)
    qa = xa * TWO_OVER_PI
    qb = xb * TWO_OVER_PI
    qa -= qmargin(qa)
    qb += qmargin(qb)
    fj0 = floor((qa + 1.0) * 0.5)
    fj1 = floor((qb + 1.0) * 0.5)
    if fj1 - fj0 > MAX_BRANCHES:
        return mk(xa, xb)
    j0 = <long long>fj0
    j1 = <long long>fj1
    slo = dn2(asin(za))
    shi = up2(asin(zb))
    r = empty()
    for j in range(j0, j1 + 1):
        c = (<double>j) * PI_LO
        m = branch_margin(c)
        if not (j & 1):
            blo = c + slo
            bhi = c + shi
        else:
            blo = c - shi
            bhi = c - slo
        p = intersect(xa, xb, blo - m, bhi + m)
        r = hull(r.lo, r.hi, p.lo, p.hi)
    return r

cdef iv inv_cos(double xa, double xb, double za, double zb) nogil:
    cdef double qa, qb, fj0, fj1, alo, ahi, c, m, blo, bhi
    cdef long long j, j0, j1
    cdef iv r, p
    if za < -1.0:
        za = -1.0
    if zb > 1.0:
        zb = 1.0
    if za > zb:
        return empty()
    if xa == -INFINITY or xb == INFINITY or not (xb - xa < TWO_PI_HI):
        return mk(xa, xb)
    qa = xa * TWO_OVER_PI
    qb = xb * TWO_OVER_PI
    qa -= qmargin(qa)
    qb += qmargin(qb)
    fj0 = floor(qa * 0.5)
    fj1 = floor(qb * 0.5)
    if fj1 - fj0 > MAX_BRANCHES:
        return mk(xa, xb)
    j0 = <long long>fj0
    j1 = <long long>fj1
    alo = dn2(acos(zb))
    ahi = up2(acos(za))
    r = empty()
    for j in range(j0, j1 + 1):
        if not (j & 1):
            c = (<double>j) * PI_LO
            blo = c + alo
            bhi = c + ahi
        else:
            c = (<double>(j + 1)) * PI_LO
            blo = c - ahi
            bhi = c - alo
        m = branch_margin(c)
        p = intersect(xa, xb, blo - m, bhi + m)
        r = hull(r.lo, r.hi, p.lo, p.hi)
    return r

cdef inline iv abs_subderivative(double a, double b) nogil:
    if b < 0.0:
        return mk(-1.0, -1.0)
    if a > 0.0:
        return mk(1.0, 1.0)
    return mk(-1.0, 1.0)


# -- tape ---------------------------------------------------------------------

cdef class Tape:
    """Compiled counterpart of :class:`certopt._pykernel.Tape`."""

    cdef int *_ops
    cdef int *_a
    cdef int *_b
    cdef long *_k
    cdef double *_clo
    cdef double *_chi
    cdef int *_varn
    cdef int _n
    cdef int _nv
    cdef int _nvar_nodes
    cdef readonly int nvars
    cdef readonly int n_nodes
    cdef readonly object ops, a, b, k, clo, chi
    backend = "cython"

    def __cinit__(self, ops, a, b, k, clo, chi, int nvars):
        cdef int i, n = len(ops), m = 0
        self._n = n
        self.n_nodes = n
        self.nvars = nvars
        self.ops = list(ops)
        self.a = list(a)
        self.b = list(b)
        self.k = list(k)
        self.clo = list(clo)
        self.chi = list(chi)
        self._ops = <int *>malloc(n * sizeof(int))
        self._a = <int *>malloc(n * sizeof(int))
        self._b = <int *>malloc(n * sizeof(int))
        self._k = <long *>malloc(n * sizeof(long))
        self._clo = <double *>malloc(n * sizeof(double))
        self._chi = <double *>malloc(n * sizeof(double))
        self._varn = <int *>malloc(n * sizeof(int))
        if (self._ops == NULL or self._a == NULL or self._b == NULL or self._k == NULL
                or self._clo == NULL or self._chi == NULL or self._varn == NULL):
            raise MemoryError()
        for i in range(n):
            self._ops[i] = ops[i]
            self._a[i] = a[i]
            self._b[i] = b[i]
            self._k[i] = k[i]
            self._clo[i] = clo[i]
            self._chi[i] = chi[i]
            if ops[i] == VAR:
                self._varn[m] = i
                m += 1
        self._nvar_nodes = m

    def __dealloc__(self):
        free(self._ops)
        free(self._a)
        free(self._b)
        free(self._k)
        free(self._clo)
        free(self._chi)
        free(self._varn)

    def __reduce__(self):
        return (Tape, (self.ops, self.a, self.b, self.k, self.clo, self.chi, self.nvars))

    cdef void _forward(self, const double *lo, const double *hi,
                       double *vlo, double *vhi) noexcept nogil:
        cdef int i, op, x, y
        cdef double xl, xh, yl, yh
        cdef iv r
        for i in range(self._n):
            op = self._ops[i]
            if op == VAR:
                vlo[i] = lo[self._k[i]]
                vhi[i] = hi[self._k[i]]
                continue
            if op == CONST:
                vlo[i] = self._clo[i]
                vhi[i] = self._chi[i]
                continue
            x = self._a[i]
            xl = vlo[x]
            xh = vhi[x]
            if xl > xh:
                vlo[i] = INFINITY
                vhi[i] = -INFINITY
                continue
            if op <= DIV:
                y = self._b[i]
                yl = vlo[y]
                yh = vhi[y]
                if yl > yh:
                    r = empty()
                elif op == ADD:
                    r = add(xl, xh, yl, yh)
                elif op == SUB:
                    r = sub(xl, xh, yl, yh)
                elif op == MUL:
                    r = mul(xl, xh, yl, yh)
                else:
                    r = div(xl, xh, yl, yh)
            elif op == POW:
                r = ipow(xl, xh, self._k[i])
            elif op == SIN:
                r = isin(xl, xh)
            elif op == COS:
                r = icos(xl, xh)
            elif op == NEG:
                r = mk(-xh, -xl)
            elif op == SQRT:
                r = isqrt(xl, xh)
            elif op == ABS:
                r = iabs(xl, xh)
            else:
                r = iexp(xl, xh)
            vlo[i] = r.lo
            vhi[i] = r.hi

    cdef double *_load(self, object seq) except NULL:
        cdef int j, n = self.nvars
        cdef double *buf = <double *>malloc((n if n > 0 else 1) * sizeof(double))
        if buf == NULL:
            raise MemoryError()
        try:
            if len(seq) < n:
                raise IndexError("box has fewer components than the expression needs")
            for j in range(n):
                buf[j] = seq[j]
        except BaseException:
            free(buf)
            raise
        return buf

    def forward(self, lo, hi):
        """Natural interval extension over the box ``[lo, hi]``."""
        cdef double *blo = self._load(lo)
        cdef double *bhi = NULL
        cdef double *vlo = NULL
        cdef double *vhi = NULL
        cdef double rl, rh
        try:
            bhi = self._load(hi)
            vlo = <double *>malloc(self._n * sizeof(double))
            vhi = <double *>malloc(self._n * sizeof(double))
            if vlo == NULL or vhi == NULL:
                raise MemoryError()
            self._forward(blo, bhi, vlo, vhi)
            rl = vlo[self._n - 1]
            rh = vhi[self._n - 1]
        finally:
            free(blo)
            free(bhi)
            free(vlo)
            free(vhi)
        return rl, rh

    def node_values(self, lo, hi):
        cdef double *blo = self._load(lo)
        cdef double *bhi = NULL
        cdef double *vlo = NULL
        cdef double *vhi = NULL
        cdef int i
        try:
            bhi = self._load(hi)
            vlo = <double *>malloc(self._n * sizeof(double))
            vhi = <double *>malloc(self._n * sizeof(double))
            if vlo == NULL or vhi == NULL:
                raise MemoryError()
            self._forward(blo, bhi, vlo, vhi)
            out = ([vlo[i] for i in range(self._n)], [vhi[i] for i in range(self._n)])
        finally:
            free(blo)
            free(bhi)
            free(vlo)
            free(vhi)
        return out

    cdef int _revise(self, double *lo, double *hi, double tlo, double thi,
                     double *vlo, double *vhi, double *froot) noexcept nogil:
        # 1 on success, 0 when proven empty
        cdef int i, op, x, y, j, root = self._n - 1
        cdef long kk
        cdef double zl, zh, xl, xh, yl, yh
        cdef iv r, t, nx, ny
        self._forward(lo, hi, vlo, vhi)
        froot[0] = vlo[root]
        froot[1] = vhi[root]
        r = intersect(vlo[root], vhi[root], tlo, thi)
        if r.lo > r.hi:
            return 0
        vlo[root] = r.lo
        vhi[root] = r.hi
        for i in range(root, -1, -1):
            op = self._ops[i]
            if op == VAR or op == CONST:
                continue
            zl = vlo[i]
            zh = vhi[i]
            x = self._a[i]
            xl = vlo[x]
            xh = vhi[x]
            if op <= DIV:
                y = self._b[i]
                yl = vlo[y]
                yh = vhi[y]
                if op == ADD:
                    t = sub(zl, zh, yl, yh)
                    nx = intersect(xl, xh, t.lo, t.hi)
                    if nx.lo > nx.hi:
                        return 0
                    t = sub(zl, zh, nx.lo, nx.hi)
                    ny = intersect(yl, yh, t.lo, t.hi)
                elif op == SUB:
                    t = add(zl, zh, yl, yh)
                    nx = intersect(xl, xh, t.lo, t.hi)
                    if nx.lo > nx.hi:
                        return 0
                    t = sub(nx.lo, nx.hi, zl, zh)
                    ny = intersect(yl, yh, t.lo, t.hi)
                elif op == MUL:
                    if yl <= 0.0 <= yh and zl <= 0.0 <= zh:
                        nx = mk(xl, xh)
                    else:
                        t = div(zl, zh, yl, yh)
                        nx = intersect(xl, xh, t.lo, t.hi)
                        if nx.lo > nx.hi:
                            return 0
                    if nx.lo <= 0.0 <= nx.hi and zl <= 0.0 <= zh:
                        ny = mk(yl, yh)
                    else:
                        t = div(zl, zh, nx.lo, nx.hi)
                        ny = intersect(yl, yh, t.lo, t.hi)
                else:
                    t = mul(zl, zh, yl, yh)
                    nx = intersect(xl, xh, t.lo, t.hi)
                    if nx.lo > nx.hi:
                        return 0
                    if nx.lo <= 0.0 <= nx.hi and zl <= 0.0 <= zh:
                        ny = mk(yl, yh)
                    else:
                        t = div(nx.lo, nx.hi, zl, zh)
                        ny = intersect(yl, yh, t.lo, t.hi)
                if ny.lo > ny.hi:
                    return 0
                vlo[x] = nx.lo
                vhi[x] = nx.hi
                vlo[y] = ny.lo
                vhi[y] = ny.hi
                continue
            if op == POW:
                kk = self._k[i]
                if kk == 0:
                    if not (zl <= 1.0 <= zh):
                        return 0
                    continue
                if kk == 1:
                    nx = intersect(xl, xh, zl, zh)
                else:
                    nx = inv_pow(xl, xh, zl, zh, kk)
            elif op == SIN:
                nx = inv_sin(xl, xh, zl, zh)
            elif op == COS:
                nx = inv_cos(xl, xh, zl, zh)
            elif op == NEG:
                nx = intersect(xl, xh, -zh, -zl)
            elif op == SQRT:
                nx = inv_sqrt(xl, xh, zl, zh)
            elif op == ABS:
                nx = inv_abs(xl, xh, zl, zh)
            else:
                nx = inv_exp(xl, xh, zl, zh)
            if nx.lo > nx.hi:
                return 0
            vlo[x] = nx.lo
            vhi[x] = nx.hi
        for i in range(self._nvar_nodes):
            x = self._varn[i]
            j = self._k[x]
            if vlo[x] > lo[j]:
                lo[j] = vlo[x]
            if vhi[x] < hi[j]:
                hi[j] = vhi[x]
            if lo[j] > hi[j]:
                return 0
        return 1

    def revise(self, lo, hi, double tlo, double thi):
        """Contract ``lo``/``hi`` in place w.r.t. ``root in [tlo, thi]``.

        Returns the root enclosure of the forward sweep, or ``None`` when the
        constraint is proven infeasible on the box.
        """
        cdef double *blo = self._load(lo)
        cdef double *bhi = NULL
        cdef double *vlo = NULL
        cdef double *vhi = NULL
        cdef double froot[2]
        cdef int ok, j
        try:
            bhi = self._load(hi)
            vlo = <double *>malloc(self._n * sizeof(double))
            vhi = <double *>malloc(self._n * sizeof(double))
            if vlo == NULL or vhi == NULL:
                raise MemoryError()
            ok = self._revise(blo, bhi, tlo, thi, vlo, vhi, froot)
            if ok:
                for j in range(self.nvars):
                    lo[j] = blo[j]
                    hi[j] = bhi[j]
        finally:
            free(blo)
            free(bhi)
            free(vlo)
            free(vhi)
        if not ok:
            return None
        return froot[0], froot[1]

    cdef bint _gradient(self, const double *blo, const double *bhi, double *vlo, double *vhi,
                        double *tl, double *th) noexcept nogil:
        # dense forward-mode tangents, one row of nvars per node; returns the kink flag
        cdef int n = self._n, nv = self.nvars, i, j, op, x, y
        cdef long kk
        cdef double xl, xh, pl = 0.0, ph = 0.0, ql = 0.0, qh = 0.0
        cdef iv c = mk(0.0, 0.0), r, s
        cdef bint kink = False
        cdef bint px, qy
        self._forward(blo, bhi, vlo, vhi)

        for i in range(n):
            op = self._ops[i]
            for j in range(nv):
                tl[i * nv + j] = 0.0
                th[i * nv + j] = 0.0
            if op == VAR:
                tl[i * nv + self._k[i]] = 1.0
                th[i * nv + self._k[i]] = 1.0
                continue
            if op == CONST:
                continue
            x = self._a[i]
            y = self._b[i]
            xl = vlo[x]
            xh = vhi[x]
            if op == POW:
                kk = self._k[i]
                if kk >= 2:
                    r = ipow(xl, xh, kk - 1)
                    c = mul(<double>kk, <double>kk, r.lo, r.hi)
            elif op == SIN:
                c = icos(xl, xh)
            elif op == COS:
                r = isin(xl, xh)
                c = mk(-r.hi, -r.lo)
            elif op == EXP:
                c = mk(vlo[i], vhi[i])
            elif op == SQRT:
                c = mul(2.0, 2.0, vlo[i], vhi[i])
            elif op == ABS:
                if xl <= 0.0 <= xh:
                    kink = True
                c = abs_subderivative(xl, xh)
            for j in range(nv):
                pl = tl[x * nv + j]
                ph = th[x * nv + j]
                if op == ADD or op == SUB or op == MUL or op == DIV:
                    ql = tl[y * nv + j]
                    qh = th[y * nv + j]
                px = pl != 0.0 or ph != 0.0
                if op == ADD:
                    qy = ql != 0.0 or qh != 0.0
                    if px and qy:
                        r = add(pl, ph, ql, qh)
                    elif px:
                        r = mk(pl, ph)
                    else:
                        r = mk(ql, qh)
                elif op == SUB:
                    qy = ql != 0.0 or qh != 0.0
                    if px and qy:
                        r = sub(pl, ph, ql, qh)
                    elif qy:
                        r = mk(-qh, -ql)
                    else:
                        r = mk(pl, ph)
                elif op == MUL:
                    # dx * Y + dy * X, zero products dropped
                    r = mk(0.0, 0.0)
                    if px:
                        r = mul(pl, ph, vlo[y], vhi[y])
                    if ql != 0.0 or qh != 0.0:
                        s = mul(ql, qh, xl, xh)
                        if s.lo != 0.0 or s.hi != 0.0:
                            if r.lo != 0.0 or r.hi != 0.0:
                                r = add(r.lo, r.hi, s.lo, s.hi)
                            else:
                                r = s
                elif op == DIV:
                    # (dx - Z * dy) / Y
                    r = mk(pl, ph)
                    if ql != 0.0 or qh != 0.0:
                        s = mul(ql, qh, vlo[i], vhi[i])
                        if s.lo != 0.0 or s.hi != 0.0:
                            if px:
                                r = sub(pl, ph, s.lo, s.hi)
                            else:
                                r = mk(-s.hi, -s.lo)
                    if r.lo != 0.0 or r.hi != 0.0:
                        r = div(r.lo, r.hi, vlo[y], vhi[y])
                elif not px:
                    r = mk(0.0, 0.0)
                elif op == NEG:
                    r = mk(-ph, -pl)
                elif op == POW:
                    kk = self._k[i]
                    if kk == 0:
                        r = mk(0.0, 0.0)
                    elif kk == 1:
                        r = mk(pl, ph)
                    else:
                        r = mul(pl, ph, c.lo, c.hi)
                elif op == SQRT:
                    r = div(pl, ph, c.lo, c.hi)
                else:
                    r = mul(pl, ph, c.lo, c.hi)
                tl[i * nv + j] = r.lo
                th[i * nv + j] = r.hi
        return kink

    def gradient(self, lo, hi):
        """Interval gradient over the box; returns ``(glo, ghi, kink)``."""
        cdef int n = self._n, nv = self.nvars, j
        cdef double *blo = self._load(lo)
        cdef double *bhi = NULL
        cdef double *vlo = NULL
        cdef double *vhi = NULL
        cdef double *tl = NULL
        cdef double *th = NULL
        cdef bint kink
        cdef size_t sz = (<size_t>n) * (nv if nv > 0 else 1)
        try:
            bhi = self._load(hi)
            vlo = <double *>malloc(n * sizeof(double))
            vhi = <double *>malloc(n * sizeof(double))
            tl = <double *>malloc(sz * sizeof(double))
            th = <double *>malloc(sz * sizeof(double))
            if vlo == NULL or vhi == NULL or tl == NULL or th == NULL:
                raise MemoryError()
            kink = self._gradient(blo, bhi, vlo, vhi, tl, th)
            glo = [tl[(n - 1) * nv + j] for j in range(nv)]
            ghi = [th[(n - 1) * nv + j] for j in range(nv)]
        finally:
            free(blo)
            free(bhi)
            free(vlo)
            free(vhi)
            free(tl)
            free(th)
        for j in range(nv):
            if glo[j] == 0.0 and ghi[j] == 0.0:
                glo[j] = 0.0
                ghi[j] = 0.0
        return glo, ghi, bool(kink)

    def eval_float(self, x):
        """Plain floating-point value at the point ``x``."""
        cdef int i, op, n = self._n
        cdef double *px = self._load(x)
        cdef double *v = <double *>malloc(n * sizeof(double))
        cdef double res
        if v == NULL:
            free(px)
            raise MemoryError()
        with nogil:
            for i in range(n):
                op = self._ops[i]
                if op == VAR:
                    v[i] = px[self._k[i]]
                elif op == CONST:
                    v[i] = 0.5 * (self._clo[i] + self._chi[i])
                elif op == ADD:
                    v[i] = v[self._a[i]] + v[self._b[i]]
                elif op == SUB:
                    v[i] = v[self._a[i]] - v[self._b[i]]
                elif op == MUL:
                    v[i] = v[self._a[i]] * v[self._b[i]]
                elif op == DIV:
                    v[i] = v[self._a[i]] / v[self._b[i]]
                elif op == NEG:
                    v[i] = -v[self._a[i]]
                elif op == POW:
                    v[i] = c_pow(v[self._a[i]], <double>self._k[i])
                elif op == SIN:
                    v[i] = c_sin(v[self._a[i]])
                elif op == COS:
                    v[i] = c_cos(v[self._a[i]])
                elif op == EXP:
                    v[i] = c_exp(v[self._a[i]])
                elif op == SQRT:
                    v[i] = c_sqrt(v[self._a[i]])
                else:
                    v[i] = fabs(v[self._a[i]])
            res = v[n - 1]
        free(px)
        free(v)
        return res


# -- branch-and-bound step ---------------------------------------------------

cdef enum:
    P_DROP = 0
    P_CUT = 1
    P_MONOTONE = 2
    P_SMALL = 3
    P_BRANCH = 4


cdef inline double split_point(double a, double b) noexcept nogil:
    cdef double m = 0.5 * (a + b)
    if m == INFINITY or m == -INFINITY:
        m = 0.5 * a + 0.5 * b
    if a > m:
        m = a
    if b < m:
        m = b
    return m


cdef class BoxProcessor:
    """Contract, test and split one box; compiled twin of the Python class."""

    cdef Tape fk
    cdef list cks
    cdef int n, ncons, maxn
    cdef double *dlo
    cdef double *dhi
    cdef double *vlo
    cdef double *vhi
    cdef double *tl
    cdef double *th
    cdef double *blo
    cdef double *bhi
    cdef double *mid
    cdef double *croot
    cdef readonly double rtol, min_width
    cdef readonly int max_passes
    cdef readonly bint mean_value
    backend = "cython"

    def __cinit__(self):
        self.dlo = self.dhi = self.vlo = self.vhi = NULL
        self.tl = self.th = self.blo = self.bhi = self.mid = self.croot = NULL

    def __init__(self, Tape fk, cks, dlo, dhi, double rtol=0.01, double min_width=1e-12,
                 int max_passes=100, bint mean_value=True):
        cdef Tape ck
        cdef int j
        self.fk = fk
        self.cks = list(cks)
        self.ncons = len(self.cks)
        self.n = len(dlo)
        self.rtol = rtol
        self.min_width = min_width
        self.max_passes = max_passes
        self.mean_value = mean_value
        self.maxn = fk._n
        for ck in self.cks:
            if ck._n > self.maxn:
                self.maxn = ck._n
        cdef int n = self.n if self.n > 0 else 1
        cdef size_t tsz = (<size_t>fk._n) * (fk.nvars if fk.nvars > 0 else 1)
        self.dlo = <double *>malloc(n * sizeof(double))
        self.dhi = <double *>malloc(n * sizeof(double))
        self.blo = <double *>malloc(n * sizeof(double))
        self.bhi = <double *>malloc(n * sizeof(double))
        self.mid = <double *>malloc(n * sizeof(double))
        self.vlo = <double *>malloc(self.maxn * sizeof(double))
        self.vhi = <double *>malloc(self.maxn * sizeof(double))
        self.tl = <double *>malloc(tsz * sizeof(double))
        self.th = <double *>malloc(tsz * sizeof(double))
        self.croot = <double *>malloc(2 * (self.ncons if self.ncons > 0 else 1) * sizeof(double))
        if (self.dlo == NULL or self.dhi == NULL or self.blo == NULL or self.bhi == NULL
                or self.mid == NULL or self.vlo == NULL or self.vhi == NULL
                or self.tl == NULL or self.th == NULL or self.croot == NULL):
            raise MemoryError()
        if fk.nvars > self.n:
            raise IndexError("domain has fewer components than the objective needs")
        for ck in self.cks:
            if ck.nvars > self.n:
                raise IndexError("domain has fewer components than a constraint needs")
        for j in range(self.n):
            self.dlo[j] = dlo[j]
            self.dhi[j] = dhi[j]

    def __dealloc__(self):
        free(self.dlo)
        free(self.dhi)
        free(self.vlo)
        free(self.vhi)
        free(self.tl)
        free(self.th)
        free(self.blo)
        free(self.bhi)
        free(self.mid)
        free(self.croot)

    cdef double _certify(self, double *x) noexcept:
        cdef Tape ck
        cdef int root
        for ck in self.cks:
            ck._forward(x, x, self.vlo, self.vhi)
            if not self.vhi[ck._n - 1] <= 0.0:
                return INFINITY
        self.fk._forward(x, x, self.vlo, self.vhi)
        root = self.fk._n - 1
        if self.vlo[root] > self.vhi[root]:
            return INFINITY
        return self.vhi[root]

    def certify(self, x):
        """Rigorous upper bound of the objective at ``x``; ``inf`` unless
        every constraint is proven satisfied there."""
        cdef int j
        for j in range(self.n):
            self.mid[j] = x[j]
        return self._certify(self.mid)

    def process(self, lo, hi, double lb, double best_ub, double eps):
        """Same contract as the Python ``BoxProcessor.process``; ``lo`` and
        ``hi`` are contracted in place."""
        cdef Tape fk = self.fk, ck
        cdef int n = self.n, j, c, i, p, nev = 1, nv = fk.nvars, root = fk._n - 1
        cdef double w = 0.0, nw, ub, ubest, wi, cut, thr, clb, sp, rl, rh
        cdef double froot[2]
        cdef double *blo = self.blo
        cdef double *bhi = self.bhi
        cdef bint interior, feasible, kink = False, have_grad
        cdef double *glo
        cdef double *ghi
        cdef iv acc, d, t
        for j in range(n):
            blo[j] = lo[j]
            bhi[j] = hi[j]
        for j in range(n):
            w += bhi[j] - blo[j]
        for p in range(self.max_passes):
            c = 0
            for ck in self.cks:
                if not ck._revise(blo, bhi, -INFINITY, 0.0, self.vlo, self.vhi, froot):
                    return P_DROP, lb, INFINITY, None, [], INFINITY, nev
                self.croot[2 * c] = froot[0]
                self.croot[2 * c + 1] = froot[1]
                c += 1
            if not fk._revise(blo, bhi, -INFINITY, best_ub, self.vlo, self.vhi, froot):
                return P_DROP, lb, INFINITY, None, [], INFINITY, nev
            nw = 0.0
            for j in range(n):
                nw += bhi[j] - blo[j]
            if not nw < (1.0 - self.rtol) * w:
                break
            w = nw
        for j in range(n):
            lo[j] = blo[j]
            hi[j] = bhi[j]
        if froot[0] > lb:
            lb = froot[0]
        if lb >= best_ub - eps:
            return P_CUT, lb, INFINITY, None, [], INFINITY, nev
        glo = self.tl + root * nv
        ghi = self.th + root * nv
        have_grad = False
        if self.mean_value:
            kink = fk._gradient(blo, bhi, self.vlo, self.vhi, self.tl, self.th)
            have_grad = True
        interior = True
        for j in range(n):
            if not (self.dlo[j] < blo[j] and bhi[j] < self.dhi[j]):
                interior = False
                break
        if interior:
            feasible = True
            for c in range(self.ncons):
                if not self.croot[2 * c + 1] < 0.0:
                    feasible = False
                    break
            if feasible:
                if not have_grad:
                    kink = fk._gradient(blo, bhi, self.vlo, self.vhi, self.tl, self.th)
                if not kink:
                    for j in range(nv):
                        if glo[j] > 0.0 or ghi[j] < 0.0:
                            return P_MONOTONE, lb, INFINITY, None, [], INFINITY, nev
        for j in range(n):
            self.mid[j] = split_point(blo[j], bhi[j])
        ub = INFINITY
        feasible = True
        for ck in self.cks:
            ck._forward(self.mid, self.mid, self.vlo, self.vhi)
            if not self.vhi[ck._n - 1] <= 0.0:
                feasible = False
                break
        fk._forward(self.mid, self.mid, self.vlo, self.vhi)
        nev += 1
        acc = mk(self.vlo[root], self.vhi[root])
        if acc.lo <= acc.hi and feasible:
            ub = acc.hi
        if acc.lo <= acc.hi and self.mean_value:
            # mean-value form: f(X) within f(m) + G(X) (X - m)
            for j in range(nv):
                if glo[j] == 0.0 and ghi[j] == 0.0:
                    continue
                d = sub(blo[j], bhi[j], self.mid[j], self.mid[j])
                t = mul(glo[j], ghi[j], d.lo, d.hi)
                acc = add(acc.lo, acc.hi, t.lo, t.hi)
            if acc.lo > lb:
                lb = acc.lo
        m = [self.mid[j] for j in range(n)]
        ubest = ub if ub < best_ub else best_ub
        if lb >= ubest - eps:
            return P_CUT, lb, ub, m, [], INFINITY, nev
        i = 0
        wi = bhi[0] - blo[0]
        for j in range(1, n):
            if bhi[j] - blo[j] > wi:
                i = j
                wi = bhi[j] - blo[j]
        if not wi > self.min_width:
            return P_SMALL, lb, ub, m, [], INFINITY, nev
        sp = split_point(blo[i], bhi[i])
        thr = ubest - eps
        children = []
        cut = INFINITY
        for c in range(2):
            if c == 0:
                rh = bhi[i]
                bhi[i] = sp
                fk._forward(blo, bhi, self.vlo, self.vhi)
                bhi[i] = rh
            else:
                rl = blo[i]
                blo[i] = sp
                fk._forward(blo, bhi, self.vlo, self.vhi)
                blo[i] = rl
            nev += 1
            if self.vlo[root] > self.vhi[root]:
                continue
            clb = self.vlo[root] if self.vlo[root] > lb else lb
            if clb >= thr:
                if clb < cut:
                    cut = clb
            else:
                clo = [blo[j] for j in range(n)]
                chi = [bhi[j] for j in range(n)]
                if c == 0:
                    chi[i] = sp
                else:
                    clo[i] = sp
                children.append((clb, clo, chi))
        return P_BRANCH, lb, ub, m, children, cut, nev
