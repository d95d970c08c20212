"""Scalar interval primitives on ``(lo, hi)`` float pairs.

Rounding is realised in round-to-nearest mode followed by outward widening:
one ulp for the correctly rounded operations (+, -, *, /, sqrt) and two ulps
for libm transcendentals.  ``_kernel.pyx`` mirrors every function here
operation for operation; the two must stay bit-identical.
"""

import math
from math import inf, nextafter

EMPTY = (inf, -inf)

PI_LO = math.pi
PI_HI = nextafter(math.pi, inf)
TWO_OVER_PI = 2.0 / math.pi
# float(2*pi) and float(pi/2) are both below the real values
TWO_PI_HI = nextafter(2.0 * math.pi, inf)
_EXP_MAX = 709.782712893384


def dn(x):
    return nextafter(x, -inf)


def up(x):
    return nextafter(x, inf)


def dn2(x):
    return nextafter(nextafter(x, -inf), -inf)


def up2(x):
    return nextafter(nextafter(x, inf), inf)


def is_empty(lo, hi):
    return not lo <= hi


def intersect(a, b, c, d):
    lo = a if a > c else c
    hi = b if b < d else d
    if lo > hi:
        return EMPTY
    return lo, hi


def hull(a, b, c, d):
    if a > b:
        return c, d
    if c > d:
        return a, b
    return (a if a < c else c), (b if b > d else d)


def add(a, b, c, d):
    return dn(a + c), up(b + d)


def sub(a, b, c, d):
    return dn(a - d), up(b - c)


def neg(a, b):
    return -b, -a


def _mdn(x, y):
    if x == 0.0 or y == 0.0:
        return 0.0
    return nextafter(x * y, -inf)


def _mup(x, y):
    if x == 0.0 or y == 0.0:
        return 0.0
    return nextafter(x * y, inf)


def mul(a, b, c, d):
    lo = min(_mdn(a, c), _mdn(a, d), _mdn(b, c), _mdn(b, d))
    hi = max(_mup(a, c), _mup(a, d), _mup(b, c), _mup(b, d))
    return lo, hi


def _qdn(x, y):
    if x == 0.0:
        return 0.0
    q = x / y
    if q != q:
        return -inf
    return nextafter(q, -inf)


def _qup(x, y):
    if x == 0.0:
        return 0.0
    q = x / y
    if q != q:
        return inf
    return nextafter(q, inf)


def div(a, b, c, d):
    if c > 0.0 or d < 0.0:
        lo = min(_qdn(a, c), _qdn(a, d), _qdn(b, c), _qdn(b, d))
        hi = max(_qup(a, c), _qup(a, d), _qup(b, c), _qup(b, d))
        return lo, hi
    if c == 0.0 and d == 0.0:
        return EMPTY
    if a == 0.0 and b == 0.0:
        return 0.0, 0.0
    if c == 0.0:
        if a >= 0.0:
            return _qdn(a, d), inf
        if b <= 0.0:
            return -inf, _qup(b, d)
        return -inf, inf
    if d == 0.0:
        if a >= 0.0:
            return -inf, _qup(a, c)
        if b <= 0.0:
            return _qdn(b, c), inf
        return -inf, inf
    return -inf, inf


def iabs(a, b):
    if a >= 0.0:
        return a, b
    if b <= 0.0:
        return -b, -a
    return 0.0, (-a if -a > b else b)


def sqrt(a, b):
    if b < 0.0:
        return EMPTY
    if a <= 0.0:
        lo = 0.0
    else:
        lo = dn(math.sqrt(a))
        if lo < 0.0:
            lo = 0.0
    if b == 0.0:
        hi = 0.0
    else:
        hi = up(math.sqrt(b))
    return lo, hi


def _exp(x):
    if x > _EXP_MAX:
        return inf
    return math.exp(x)


def exp(a, b):
    lo = dn2(_exp(a))
    if lo < 0.0:
        lo = 0.0
    return lo, up2(_exp(b))


def log(a, b):
    """Enclosure of log over the positive part of ``[a, b]``."""
    if b <= 0.0:
        return EMPTY
    if a <= 0.0:
        lo = -inf
    else:
        lo = dn2(math.log(a))
    if b == inf:
        hi = inf
    else:
        hi = up2(math.log(b))
    return lo, hi


def _pow_dn(x, k):
    # x >= 0, k >= 1; rounded-down repeated squaring
    result = -1.0
    base = x
    while True:
        if k & 1:
            result = base if result < 0.0 else _mdn(result, base)
        k >>= 1
        if not k:
            break
        base = _mdn(base, base)
    return result if result > 0.0 else 0.0


def _pow_up(x, k):
    result = -1.0
    base = x
    while True:
        if k & 1:
            result = base if result < 0.0 else _mup(result, base)
        k >>= 1
        if not k:
            break
        base = _mup(base, base)
    return result


def ipow(a, b, k):
    if k == 0:
        return 1.0, 1.0
    if k == 1:
        return a, b
    if k % 2 == 0:
        if a >= 0.0:
            return _pow_dn(a, k), _pow_up(b, k)
        if b <= 0.0:
            return _pow_dn(-b, k), _pow_up(-a, k)
        m = -a if -a > b else b
        return 0.0, _pow_up(m, k)
    lo = _pow_dn(a, k) if a >= 0.0 else -_pow_up(-a, k)
    hi = _pow_up(b, k) if b >= 0.0 else -_pow_dn(-b, k)
    return lo, hi


def _root_dn(z, k):
    # largest-ish r >= 0 with r**k <= z guaranteed
    if z <= 0.0:
        return 0.0
    if z == inf:
        return inf
    if k == 2:
        r = dn(math.sqrt(z))
    else:
        r = dn(z ** (1.0 / k))
    for _ in range(64):
        if r <= 0.0 or _pow_up(r, k) <= z:
            break
        r = dn(r)
    else:
        return 0.0
    return r if r > 0.0 else 0.0


def _root_up(z, k):
    if z <= 0.0:
        return 0.0
    if z == inf:
        return inf
    if k == 2:
        r = up(math.sqrt(z))
    else:
        r = up(z ** (1.0 / k))
    for _ in range(64):
        if _pow_dn(r, k) >= z:
            return r
        r = up(r)
    return inf


def _qmargin(q):
    return 1e-13 * (1.0 + abs(q))


def _has_residue(qa, qb, r):
    # is there an integer k = r (mod 4) with qa <= k <= qb?
    k0 = math.ceil(qa)
    first = k0 + (r - k0) % 4
    return first <= qb


def sin(a, b):
    if not (b - a < TWO_PI_HI) or a == -inf or b == inf:
        return -1.0, 1.0
    sa = math.sin(a)
    sb = math.sin(b)
    lo = dn2(sa if sa < sb else sb)
    hi = up2(sa if sa > sb else sb)
    if lo < -1.0:
        lo = -1.0
    if hi > 1.0:
        hi = 1.0
    qa = a * TWO_OVER_PI
    qb = b * TWO_OVER_PI
    qa -= _qmargin(qa)
    qb += _qmargin(qb)
    if _has_residue(qa, qb, 1):
        hi = 1.0
    if _has_residue(qa, qb, 3):
        lo = -1.0
    return lo, hi


def cos(a, b):
    if not (b - a < TWO_PI_HI) or a == -inf or b == inf:
        return -1.0, 1.0
    ca = math.cos(a)
    cb = math.cos(b)
    lo = dn2(ca if ca < cb else cb)
    hi = up2(ca if ca > cb else cb)
    if lo < -1.0:
        lo = -1.0
    if hi > 1.0:
        hi = 1.0
    qa = a * TWO_OVER_PI
    qb = b * TWO_OVER_PI
    qa -= _qmargin(qa)
    qb += _qmargin(qb)
    if _has_residue(qa, qb, 0):
        hi = 1.0
    if _has_residue(qa, qb, 2):
        lo = -1.0
    return lo, hi


# ---------------------------------------------------------------------------
# inverse images used by backward propagation; each returns the hull of the
# preimage of z intersected with the current x


def inv_pow(xa, xb, za, zb, k):
    if k % 2 == 0:
        if za < 0.0:
            za = 0.0
        if za > zb:
            return EMPTY
        rlo = _root_dn(za, k)
        rhi = _root_up(zb, k)
        p = intersect(xa, xb, rlo, rhi)
        n = intersect(xa, xb, -rhi, -rlo)
        return hull(n[0], n[1], p[0], p[1])
    lo = _root_dn(za, k) if za >= 0.0 else -_root_up(-za, k)
    hi = _root_up(zb, k) if zb >= 0.0 else -_root_dn(-zb, k)
    return intersect(xa, xb, lo, hi)


def inv_abs(xa, xb, za, zb):
    if za < 0.0:
        za = 0.0
    if za > zb:
        return EMPTY
    p = intersect(xa, xb, za, zb)
    n = intersect(xa, xb, -zb, -za)
    return hull(n[0], n[1], p[0], p[1])


def inv_sqrt(xa, xb, za, zb):
    if za < 0.0:
        za = 0.0
    if za > zb:
        return EMPTY
    lo = _pow_dn(za, 2)
    hi = inf if zb == inf else _pow_up(zb, 2)
    return intersect(xa, xb, lo, hi)


def inv_exp(xa, xb, za, zb):
    lo, hi = log(za, zb)
    if lo > hi:
        return EMPTY
    return intersect(xa, xb, lo, hi)


def _asin_rng(za, zb):
    return dn2(math.asin(za)), up2(math.asin(zb))


def _acos_rng(za, zb):
    # acos is decreasing
    return dn2(math.acos(zb)), up2(math.acos(za))


# huge arguments make the margins span many periods; give up contracting
_MAX_BRANCHES = 8


def _branch_margin(c):
    return 1e-15 * (1.0 + abs(c))


def inv_sin(xa, xb, za, zb):
    if za < -1.0:
        za = -1.0
    if zb > 1.0:
        zb = 1.0
    if za > zb:
        return EMPTY
    if xa == -inf or xb == inf or not (xb - xa < TWO_PI_HI):
        return xa, xb
    qa = xa * TWO_OVER_PI
    qb = xb * TWO_OVER_PI
    qa -= _qmargin(qa)
    qb += _qmargin(qb)
    # branch j covers q in [2j - 1, 2j + 1], centre j*pi
    j0 = math.floor((qa + 1.0) * 0.5)
    j1 = math.floor((qb + 1.0) * 0.5)
    if j1 - j0 > _MAX_BRANCHES:
        return xa, xb
    slo, shi = _asin_rng(za, zb)
    rlo, rhi = EMPTY
    for j in range(j0, j1 + 1):
        c = j * PI_LO
        m = _branch_margin(c)
        if not j & 1:
            blo, bhi = c + slo, c + shi
        else:
            blo, bhi = c - shi, c - slo
        p = intersect(xa, xb, blo - m, bhi + m)
        rlo, rhi = hull(rlo, rhi, p[0], p[1])
    return rlo, rhi


def inv_cos(xa, xb, za, zb):
    if za < -1.0:
        za = -1.0
    if zb > 1.0:
        zb = 1.0
    if za > zb:
        return EMPTY
    if xa == -inf or xb == inf or not (xb - xa < TWO_PI_HI):
        return xa, xb
    qa = xa * TWO_OVER_PI
    qb = xb * TWO_OVER_PI
    qa -= _qmargin(qa)
    qb += _qmargin(qb)
    # branch j covers x in [j*pi, (j+1)*pi]
    j0 = math.floor(qa * 0.5)
    j1 = math.floor(qb * 0.5)
    if j1 - j0 > _MAX_BRANCHES:
        return xa, xb
    alo, ahi = _acos_rng(za, zb)
    rlo, rhi = EMPTY
    for j in range(j0, j1 + 1):
        if not j & 1:
            c = j * PI_LO
            blo, bhi = c + alo, c + ahi
        else:
            c = (j + 1) * PI_LO
            blo, bhi = c - ahi, c - alo
        m = _branch_margin(c)
        p = intersect(xa, xb, blo - m, bhi + m)
        rlo, rhi = hull(rlo, rhi, p[0], p[1])
    return rlo, rhi


def abs_subderivative(a, b):
    if b < 0.0:
        return -1.0, -1.0
    if a > 0.0:
        return 1.0, 1.0
    return -1.0, 1.0
