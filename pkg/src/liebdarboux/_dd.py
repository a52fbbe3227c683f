"""Vectorised double-double arithmetic on numpy arrays.

A real double-double is a pair ``(hi, lo)`` with ``|lo| <= ulp(hi) / 2``;
a complex one is a pair of real ones.  Error-free products use Veltkamp
splitting because numpy exposes no fused multiply-add.
"""
from __future__ import annotations

import numpy as np

_SPLIT = 134217729.0  # 2**27 + 1


def two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def _split(a):
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


class DD:
    """Real double-double array."""

    __slots__ = ("hi", "lo")

    def __init__(self, hi, lo=None):
        self.hi = np.asarray(hi, dtype=np.float64)
        self.lo = np.zeros_like(self.hi) if lo is None else np.asarray(lo, dtype=np.float64)

    def __add__(self, o):
        s, e = two_sum(self.hi, o.hi)
        t, f = two_sum(self.lo, o.lo)
        e = e + t
        s, e = quick_two_sum(s, e)
        e = e + f
        return DD(*quick_two_sum(s, e))

    def __neg__(self):
        return DD(-self.hi, -self.lo)

    def __sub__(self, o):
        return self + (-o)

    def __mul__(self, o):
        p, e = two_prod(self.hi, o.hi)
        e = e + (self.hi * o.lo + self.lo * o.hi)
        return DD(*quick_two_sum(p, e))

    def __truediv__(self, o):
        # a zero divisor (singular seed) yields inf/nan; callers check regularity
        with np.errstate(divide="ignore", invalid="ignore"):
            q1 = self.hi / o.hi
            r = self - o * DD(q1)
            q2 = r.hi / o.hi
            r = r - o * DD(q2)
            q3 = r.hi / o.hi
            q1, q2 = quick_two_sum(q1, q2)
            return DD(q1, q2) + DD(q3)

    def to_float(self):
        return self.hi + self.lo


class CDD:
    """Complex double-double array."""

    __slots__ = ("re", "im")

    def __init__(self, re: DD, im: DD):
        self.re = re
        self.im = im

    @classmethod
    def from_complex(cls, z):
        z = np.asarray(z, dtype=np.complex128)
        return cls(DD(z.real), DD(z.imag))

    def __add__(self, o):
        return CDD(self.re + o.re, self.im + o.im)

    def __sub__(self, o):
        return CDD(self.re - o.re, self.im - o.im)

    def __neg__(self):
        return CDD(-self.re, -self.im)

    def __mul__(self, o):
        return CDD(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    def __truediv__(self, o):
        den = o.re * o.re + o.im * o.im
        num = self * CDD(o.re, -o.im)
        return CDD(num.re / den, num.im / den)

    def to_complex(self):
        return self.re.to_float() + 1j * self.im.to_float()


def _c(a, i, j):
    return CDD.from_complex(a[..., i, j])


def adjugate_det(u):
    """Adjugate and determinant of a ``(..., 3, 3)`` stack in double-double.

    Entries of ``u`` are taken as exact; the returned adjugate is a 3x3
    nested list of :class:`CDD` and the determinant a :class:`CDD`.
    """
    e = [[_c(u, i, j) for j in range(3)] for i in range(3)]
    adj = [[None] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            r = [k for k in range(3) if k != j]
            c = [k for k in range(3) if k != i]
            minor = e[r[0]][c[0]] * e[r[1]][c[1]] - e[r[0]][c[1]] * e[r[1]][c[0]]
            adj[i][j] = minor if (i + j) % 2 == 0 else -minor
    det = e[0][0] * adj[0][0] + e[0][1] * adj[1][0] + e[0][2] * adj[2][0]
    return adj, det


def times_adjugate(b, adj, det):
    """``b @ adj / det`` rounded to complex128, with ``b`` a float stack."""
    out = np.empty(np.shape(b), dtype=np.complex128)
    be = [[_c(b, i, j) for j in range(3)] for i in range(3)]
    for i in range(3):
        for j in range(3):
            acc = be[i][0] * adj[0][j] + be[i][1] * adj[1][j] + be[i][2] * adj[2][j]
            out[..., i, j] = (acc / det).to_complex()
    return out
