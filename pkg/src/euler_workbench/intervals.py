"""Thin rigorous-interval layer over mpmath's iv context.

Real intervals are iv.mpf values; complex intervals are (re, im) pairs of
them. The iv context has one global precision, so computations bracket
their work in `precision(bits)`.
"""

from __future__ import annotations

from contextlib import contextmanager
from fractions import Fraction

from mpmath import iv

PRECISION_CAP = 1 << 14  # bits; requests beyond this are configuration errors


class PrecisionError(ValueError):
    pass


@contextmanager
def precision(bits):
    if bits > PRECISION_CAP:
        raise PrecisionError(f"requested {bits} bits exceeds cap {PRECISION_CAP}")
    old = iv.prec
    iv.prec = bits
    try:
        yield
    finally:
        iv.prec = old


def iv_fraction(q):
    q = Fraction(q)
    return iv.mpf(q.numerator) / iv.mpf(q.denominator)


def iv_intersect(a, b):
    lo = a.a if a.a > b.a else b.a
    hi = a.b if a.b < b.b else b.b
    if lo > hi:
        return None
    return iv.mpf([lo, hi])


def iv_contains_zero(a):
    return a.a <= 0 <= a.b


def iv_width(a):
    return float(a.delta)


class ComplexInterval:
    """Rectangular complex interval with outward-rounded arithmetic."""

    __slots__ = ("re", "im")

    def __init__(self, re, im=None):
        self.re = re if not isinstance(re, (int, Fraction)) else iv_fraction(re)
        if im is None:
            im = iv.mpf(0)
        self.im = im if not isinstance(im, (int, Fraction)) else iv_fraction(im)

    @staticmethod
    def zero():
        return ComplexInterval(iv.mpf(0), iv.mpf(0))

    @staticmethod
    def one():
        return ComplexInterval(iv.mpf(1), iv.mpf(0))

    @staticmethod
    def root_of_unity(n, k):
        """exp(2 pi i k / n) as an interval pair."""
        k %= n
        ang = 2 * iv.pi * iv.mpf(k) / iv.mpf(n)
        return ComplexInterval(iv.cos(ang), iv.sin(ang))

    def __add__(self, other):
        other = _coerce(other)
        return ComplexInterval(self.re + other.re, self.im + other.im)

    def __sub__(self, other):
        other = _coerce(other)
        return ComplexInterval(self.re - other.re, self.im - other.im)

    def __mul__(self, other):
        other = _coerce(other)
        return ComplexInterval(self.re * other.re - self.im * other.im,
                               self.re * other.im + self.im * other.re)

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return ComplexInterval(-self.re, -self.im)

    def scale(self, r):
        if isinstance(r, (int, Fraction)):
            r = iv_fraction(r)
        return ComplexInterval(self.re * r, self.im * r)

    def abs2(self):
        return self.re * self.re + self.im * self.im

    def conj(self):
        return ComplexInterval(self.re, -self.im)

    def log_abs(self):
        """log |z| as a real interval; requires 0 not in the box."""
        a2 = self.abs2()
        if a2.a <= 0:
            raise PrecisionError("interval box contains 0; cannot take log|z|")
        return iv.log(a2) / 2

    def contains_zero(self):
        return iv_contains_zero(self.re) and iv_contains_zero(self.im)

    def intersects(self, other):
        return (iv_intersect(self.re, other.re) is not None and
                iv_intersect(self.im, other.im) is not None)

    def intersection(self, other):
        re = iv_intersect(self.re, other.re)
        im = iv_intersect(self.im, other.im)
        if re is None or im is None:
            return None
        return ComplexInterval(re, im)

    def width(self):
        return max(iv_width(self.re), iv_width(self.im))

    def midpoint(self):
        return complex(float(self.re.mid), float(self.im.mid))

    def to_json(self):
        return {"re": [str(self.re.a), str(self.re.b)],
                "im": [str(self.im.a), str(self.im.b)]}

    def __repr__(self):
        return f"CI(re={self.re}, im={self.im})"


def _coerce(z):
    if isinstance(z, ComplexInterval):
        return z
    if isinstance(z, (int, Fraction)):
        return ComplexInterval(iv_fraction(z), iv.mpf(0))
    return ComplexInterval(z, iv.mpf(0))


def real_interval_json(a):
    return [str(a.a), str(a.b)]
