"""Exact arithmetic in cyclotomic fields Q(zeta_m).

A CycNumber holds the coefficient vector of a residue class in
Q[x]/(Phi_m), stored as an integer numerator vector of length phi(m)
plus a single positive denominator. All arithmetic is exact; the hot
paths (convolution and reduction mod Phi_m) run on plain ints.

The fixed complex embedding used elsewhere sends zeta_m to
exp(2*pi*i/m); nothing in this module depends on it.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd


@lru_cache(maxsize=None)
def cyclotomic_polynomial(m: int) -> tuple:
    """Coefficients of Phi_m, constant term first."""
    if m == 1:
        return (-1, 1)
    # start from x^m - 1 and divide out Phi_d for proper divisors d
    poly = [0] * (m + 1)
    poly[0] = -1
    poly[m] = 1
    for d in range(1, m):
        if m % d == 0:
            poly = _poly_exact_div(poly, list(cyclotomic_polynomial(d)))
    while poly and poly[-1] == 0:
        poly.pop()
    return tuple(poly)


def _poly_exact_div(a, b):
    # exact division of integer polynomials, b monic up to sign
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    q = [0] * (len(a) - len(b) + 1)
    lc = b[-1]
    for i in range(len(a) - len(b), -1, -1):
        c = a[i + len(b) - 1] // lc
        q[i] = c
        if c:
            for j, bj in enumerate(b):
                a[i + j] -= c * bj
    assert not any(a), "non-exact polynomial division"
    return q


@lru_cache(maxsize=None)
def euler_phi(m: int) -> int:
    r, n = m, m
    p = 2
    while p * p <= n:
        if n % p == 0:
            while n % p == 0:
                n //= p
            r -= r // p
        p += 1
    if n > 1:
        r -= r // n
    return r


@lru_cache(maxsize=None)
def _reduction_rows(m: int, upto: int):
    """x^k mod Phi_m for phi(m) <= k <= upto, as integer tuples."""
    phi_m = euler_phi(m)
    phi = cyclotomic_polynomial(m)
    rows = {}
    cur = [-c for c in phi[:phi_m]]  # x^phi = -(lower part), Phi monic
    rows[phi_m] = tuple(cur)
    for k in range(phi_m + 1, upto + 1):
        nxt = [0] * phi_m
        for i in range(phi_m - 1):
            nxt[i + 1] = cur[i]
        top = cur[phi_m - 1]
        if top:
            for i in range(phi_m):
                nxt[i] -= top * phi[i]
        rows[k] = tuple(nxt)
        cur = nxt
    return rows


def _reduce_int_poly(m, coeffs):
    """Reduce an integer coefficient list mod Phi_m to length phi(m)."""
    phi_m = euler_phi(m)
    deg = len(coeffs) - 1
    while deg >= 0 and coeffs[deg] == 0:
        deg -= 1
    if deg < phi_m:
        out = list(coeffs[:deg + 1]) + [0] * (phi_m - 1 - deg)
        return out
    rows = _reduction_rows(m, deg)
    out = list(coeffs[:phi_m])
    for k in range(phi_m, deg + 1):
        c = coeffs[k]
        if c:
            row = rows[k]
            for i in range(phi_m):
                out[i] += c * row[i]
    return out


def _normalize(nums, den):
    if den < 0:
        den = -den
        nums = [-c for c in nums]
    g = den
    for c in nums:
        if c:
            g = gcd(g, c)
        if g == 1:
            break
    if g > 1:
        nums = [c // g for c in nums]
        den //= g
    return tuple(nums), den


class CycNumber:
    """An element of Q(zeta_m) in the power basis mod Phi_m."""

    __slots__ = ("m", "nums", "den")

    def __init__(self, m, nums, den=1, reduce=False):
        if reduce:
            nums = _reduce_int_poly(m, list(nums))
        phi_m = euler_phi(m)
        nums = list(nums) + [0] * (phi_m - len(nums))
        assert len(nums) == phi_m
        self.m = m
        self.nums, self.den = _normalize(nums, den)

    # -- constructors ----------------------------------------------------
    @staticmethod
    def zero(m):
        return CycNumber(m, [])

    @staticmethod
    def one(m):
        return CycNumber(m, [1])

    @staticmethod
    def from_rational(m, q):
        q = Fraction(q)
        return CycNumber(m, [q.numerator], q.denominator)

    @staticmethod
    def zeta_power(m, k):
        """zeta_m^k as an element of Q(zeta_m)."""
        k %= m
        return CycNumber(m, [0] * k + [1], 1, reduce=True)

    @staticmethod
    def from_fractions(m, fracs):
        den = 1
        fr = [Fraction(f) for f in fracs]
        for f in fr:
            den = den * f.denominator // gcd(den, f.denominator)
        nums = [int(f * den) for f in fr]
        return CycNumber(m, nums, den)

    # -- structure -------------------------------------------------------
    def coefficients(self):
        return [Fraction(c, self.den) for c in self.nums]

    def is_zero(self):
        return not any(self.nums)

    def is_rational(self):
        if any(self.nums[1:]):
            return None
        return Fraction(self.nums[0], self.den)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = CycNumber.from_rational(self.m, other)
        return (self.m, self.nums, self.den) == (other.m, other.nums, other.den)

    def __hash__(self):
        return hash((self.m, self.nums, self.den))

    def __repr__(self):
        return f"CycNumber(m={self.m}, {self.coefficients()})"

    # -- ring operations ---------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        d1, d2 = self.den, other.den
        nums = [a * d2 + b * d1 for a, b in zip(self.nums, other.nums)]
        return CycNumber(self.m, nums, d1 * d2)

    def __sub__(self, other):
        other = self._coerce(other)
        d1, d2 = self.den, other.den
        nums = [a * d2 - b * d1 for a, b in zip(self.nums, other.nums)]
        return CycNumber(self.m, nums, d1 * d2)

    def __neg__(self):
        return CycNumber(self.m, [-c for c in self.nums], self.den)

    def __mul__(self, other):
        other = self._coerce(other)
        a, b = self.nums, other.nums
        n = len(a)
        conv = [0] * (2 * n - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    if bj:
                        conv[i + j] += ai * bj
        nums = _reduce_int_poly(self.m, conv)
        return CycNumber(self.m, nums, self.den * other.den)

    __radd__ = __add__
    __rmul__ = __mul__

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __truediv__(self, other):
        other = self._coerce(other)
        return self * other.inverse()

    def _coerce(self, other):
        if isinstance(other, CycNumber):
            if other.m != self.m:
                raise ValueError("level mismatch; raise_level first")
            return other
        if isinstance(other, (int, Fraction)):
            return CycNumber.from_rational(self.m, other)
        return NotImplemented

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        result = CycNumber.one(self.m)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base if e > 1 else base
            e >>= 1
        return result

    def inverse(self):
        """Multiplicative inverse via the extended Euclidean algorithm."""
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero cyclotomic number")
        phi = [Fraction(c) for c in cyclotomic_polynomial(self.m)]
        a = [Fraction(c, self.den) for c in self.nums]
        # xgcd(a, Phi) over Q[x]
        r0, r1 = phi, list(a)
        t0, t1 = [Fraction(0)], [Fraction(1)]
        while any(r1):
            q, r = _poly_divmod_q(r0, r1)
            r0, r1 = r1, r
            t0, t1 = t1, _poly_sub_q(t0, _poly_mul_q(q, t1))
        # r0 = gcd, a nonzero constant (Phi_m has no rational roots shared with a)
        const = next(c for c in r0 if c)
        if any(r0[i] for i in range(1, len(r0))):
            raise ZeroDivisionError("element is a zero divisor mod Phi_m")
        inv_coeffs = [c / const for c in t0]
        return CycNumber.from_fractions(self.m, _pad(inv_coeffs, euler_phi(self.m)))

    # -- Galois and levels -------------------------------------------------
    def galois(self, a):
        """Apply sigma_a : zeta_m -> zeta_m^a. Requires gcd(a, m) = 1."""
        a %= self.m
        if gcd(a, self.m) != 1:
            raise ValueError(f"sigma_{a} is not a Galois element mod {self.m}")
        out = [0] * self.m
        for i, c in enumerate(self.nums):
            if c:
                out[(a * i) % self.m] += c
        nums = _reduce_int_poly(self.m, out)
        return CycNumber(self.m, nums, self.den)

    def conjugate(self):
        return self.galois(self.m - 1)

    def raise_level(self, big_m):
        """Image under Q(zeta_m) -> Q(zeta_M) for m | M, zeta_m = zeta_M^(M/m)."""
        if big_m == self.m:
            return self
        if big_m % self.m:
            raise ValueError("target level is not a multiple")
        step = big_m // self.m
        out = [0] * ((len(self.nums) - 1) * step + 1)
        for i, c in enumerate(self.nums):
            if c:
                out[i * step] = c
        nums = _reduce_int_poly(big_m, out)
        return CycNumber(big_m, nums, self.den)

    def lower_level(self, small_m):
        """Exact preimage in Q(zeta_small) if this element lies there."""
        if small_m == self.m:
            return self
        if self.m % small_m:
            raise ValueError("not a divisor level")
        sol = _level_solver(self.m, small_m)(self.coefficients())
        if sol is None:
            raise ValueError("element does not lie in the requested subfield")
        return CycNumber.from_fractions(small_m, sol)

    # -- torsion -----------------------------------------------------------
    def is_root_of_unity(self):
        """Exact test for membership in the torsion of Q(zeta_m)^x."""
        if self.den != 1:
            return False
        if self.is_zero():
            return False
        L = self.m if self.m % 2 == 0 else 2 * self.m
        # cheap sound filter: power mod a prime q not dividing disc-related data
        q = 1000003
        if not self._power_is_one_mod_q(L, q):
            return False
        return (self ** L) == CycNumber.one(self.m)

    def _power_is_one_mod_q(self, e, q):
        phi_m = euler_phi(self.m)
        phi = cyclotomic_polynomial(self.m)
        a = [c % q for c in self.nums]
        r = [1] + [0] * (phi_m - 1)

        def mul(u, v):
            conv = [0] * (2 * phi_m - 1)
            for i, ui in enumerate(u):
                if ui:
                    for j, vj in enumerate(v):
                        if vj:
                            conv[i + j] = (conv[i + j] + ui * vj) % q
            for k in range(2 * phi_m - 2, phi_m - 1, -1):
                c = conv[k]
                if c:
                    conv[k] = 0
                    for i in range(phi_m):
                        conv[k - phi_m + i] = (conv[k - phi_m + i] - c * phi[i]) % q
            return conv[:phi_m]

        base, out = a, r
        while e:
            if e & 1:
                out = mul(out, base)
            base = mul(base, base)
            e >>= 1
        return out[0] % q == 1 and not any(c % q for c in out[1:])

    def torsion_order(self):
        """Order as a root of unity, or None."""
        if not self.is_root_of_unity():
            return None
        L = self.m if self.m % 2 == 0 else 2 * self.m
        order = L
        p = 2
        n = L
        while p * p <= n:
            while order % p == 0 and (self ** (order // p)) == CycNumber.one(self.m):
                order //= p
            while n % p == 0:
                n //= p
            p += 1
        if n > 1:
            while order % n == 0 and (self ** (order // n)) == CycNumber.one(self.m):
                order //= n
        return order

    # -- norms ---------------------------------------------------------------
    def norm_to_q(self):
        """The field norm N : Q(zeta_m) -> Q, via a resultant."""
        if self.m == 1:
            return Fraction(self.nums[0], self.den)
        res = poly_resultant(list(cyclotomic_polynomial(self.m)), list(self.nums))
        return Fraction(res, self.den ** euler_phi(self.m))


def _pad(v, n):
    return list(v) + [Fraction(0)] * (n - len(v))


def _poly_divmod_q(a, b):
    a = [Fraction(x) for x in a]
    b = [Fraction(x) for x in b]
    while b and not b[-1]:
        b.pop()
    db = len(b) - 1
    q = [Fraction(0)] * max(len(a) - db, 1)
    while True:
        while a and not a[-1]:
            a.pop()
        if len(a) - 1 < db or not a:
            break
        c = a[-1] / b[-1]
        k = len(a) - 1 - db
        q[k] = c
        for j in range(db + 1):
            a[k + j] -= c * b[j]
    return q, a


def _poly_mul_q(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _poly_sub_q(a, b):
    n = max(len(a), len(b))
    a = list(a) + [Fraction(0)] * (n - len(a))
    b = list(b) + [Fraction(0)] * (n - len(b))
    return [x - y for x, y in zip(a, b)]


def poly_resultant(a, b):
    """Resultant of integer polynomials via fraction-free subresultant PRS."""
    a = [Fraction(x) for x in a]
    b = [Fraction(x) for x in b]

    def deg(p):
        d = len(p) - 1
        while d >= 0 and not p[d]:
            d -= 1
        return d

    da, db = deg(a), deg(b)
    if da < 0 or db < 0:
        return 0
    res = Fraction(1)
    # classical Euclidean resultant with rational bookkeeping (sizes are small)
    f, g = a[:da + 1], b[:db + 1]
    s = 1
    while True:
        df, dg = deg(f), deg(g)
        if dg < 0:
            return 0
        if dg == 0:
            res *= g[0] ** df
            out = res * s
            assert out.denominator == 1
            return int(out)
        _, r = _poly_divmod_q(f, g)
        dr = deg(r)
        if dr < 0:
            return 0
        r = r[:dr + 1]
        res *= g[dg] ** (df - dr)
        if (df % 2) and (dg % 2):
            s = -s
        f, g = g, r


@lru_cache(maxsize=None)
def _level_solver(big_m, small_m):
    """Returns a function mapping level-big coefficient vectors to their
    level-small preimage (list of Fractions) or None."""
    from . import intmat

    phi_small = euler_phi(small_m)
    phi_big = euler_phi(big_m)
    cols = []
    for i in range(phi_small):
        img = CycNumber.zeta_power(small_m, i).raise_level(big_m)
        cols.append(img.coefficients())
    # matrix: phi_big x phi_small, columns are images of basis vectors
    A = [[cols[j][i] for j in range(phi_small)] for i in range(phi_big)]

    def solve(target):
        return intmat.rat_solve(A, list(target))

    return solve
