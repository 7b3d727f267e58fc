"""Abelian fields over Q inside cyclotomic fields.

An AbelianField is a pair (conductor m, subgroup H of (Z/m)^x); the field
is the fixed field of H acting on Q(zeta_m). The module provides the
Galois action, norms to subfields, exact valuations at primes above a
rational prime (via Hensel-lifted factors of the cyclotomic polynomial),
the complex embedding zeta_m -> exp(2 pi i / m) at controlled interval
precision, formal multiplicative combinations of cyclotomic numbers
(MultiUnit), and the Dirichlet regulator map.
"""

from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache
from math import gcd

from mpmath import iv

from . import intmat
from .cycnum import CycNumber, cyclotomic_polynomial, euler_phi, poly_resultant
from .groupring import FiniteAbelianGroup, GroupRingElement
from .intervals import ComplexInterval, precision, iv_fraction


def factorize(n):
    out = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _crt_pair(r1, m1, r2, m2):
    g, x, _ = _xgcd(m1, m2)
    assert g == 1
    return (r1 + (r2 - r1) * x % m2 * m1) % (m1 * m2)


def _xgcd(a, b):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def _primitive_root(p, e):
    # primitive root mod p^e for odd p
    n = p - 1
    fac = factorize(n)
    g = 2
    while True:
        if all(pow(g, n // q, p) != 1 for q in fac):
            break
        g += 1
    if e == 1:
        return g
    if pow(g, p - 1, p * p) == 1:
        g += p
    return g


@lru_cache(maxsize=None)
class UnitGroup:
    """(Z/m)^x with canonical invariant-factor coordinates and dlog table."""

    def __init__(self, m):
        self.m = m
        gens = []       # (unit mod m, cyclic order)
        if m > 1:
            for p, e in sorted(factorize(m).items()):
                q = p ** e
                rest = m // q
                if p == 2:
                    locals_ = []
                    if e == 2:
                        locals_ = [(q - 1, 2)]
                    elif e >= 3:
                        locals_ = [(q - 1, 2), (5 % q, 2 ** (e - 2))]
                    for u, o in locals_:
                        gens.append((_crt_pair(u, q, 1, rest) if rest > 1 else u, o))
                else:
                    g = _primitive_root(p, e)
                    o = (p - 1) * p ** (e - 1)
                    gens.append((_crt_pair(g, q, 1, rest) if rest > 1 else g % m, o))
        self.cyclic_gens = gens
        group, change = FiniteAbelianGroup.from_cyclic_orders([o for _, o in gens])
        self.group = group
        # discrete-log table by BFS over generator multiplication
        table = {1 % m if m > 1 else 0: tuple([0] * len(gens))}
        frontier = [1 % m if m > 1 else 0]
        while frontier:
            u = frontier.pop()
            base = table[u]
            for i, (g, o) in enumerate(gens):
                v = (u * g) % m
                if v not in table:
                    coords = list(base)
                    coords[i] = (coords[i] + 1) % o
                    table[v] = tuple(coords)
                    frontier.append(v)
        self._dlog_raw = table
        self.dlog_table = {u: change(list(c)) for u, c in table.items()}
        self.rep_table = {}
        for u, c in sorted(self.dlog_table.items()):
            self.rep_table.setdefault(c, u)

    def dlog(self, a):
        a %= self.m
        if self.m == 1:
            return ()
        if gcd(a, self.m) != 1:
            raise ValueError(f"{a} is not a unit mod {self.m}")
        return self.dlog_table[a]

    def rep(self, element):
        return self.rep_table[element]

    def units(self):
        return sorted(self.dlog_table)


@lru_cache(maxsize=None)
def subgroups_of_units(m):
    """All subgroups of (Z/m)^x, each as a sorted tuple of unit representatives."""
    U = UnitGroup(m)
    G = U.group
    one = 1 % m if m > 1 else 0
    subs = {(one,): tuple([G.identity])}
    # iteratively close under adding single elements
    found = {tuple([G.identity])}
    frontier = [tuple([G.identity])]
    while frontier:
        H = frontier.pop()
        Hset = set(H)
        for g in G.elements():
            if g not in Hset:
                new = G.subgroup_closure(list(H) + [g])
                if new not in found:
                    found.add(new)
                    frontier.append(new)
    out = []
    for H in found:
        out.append(tuple(sorted(U.rep(h) for h in H)))
    return tuple(sorted(out))


class AbelianField:
    """The fixed field of H <= (Z/m)^x acting on Q(zeta_m).

    Construction normalizes to the true conductor, so equal fields compare
    equal through .key().
    """

    def __init__(self, m, subgroup_units=()):
        U = UnitGroup(m)
        Hcoords = U.group.subgroup_closure([U.dlog(a) for a in subgroup_units])
        Helts = sorted(U.rep_table[h] for h in Hcoords) if m > 1 else []
        # true conductor: minimal divisor d with H containing ker((Z/m)^x -> (Z/d)^x)
        cond = m
        for d in sorted(_divisors(m)):
            if d % 4 == 2:
                continue
            kernel = [u for u in U.units() if u % d == (1 % d if d > 1 else 0)]
            if all(u in set(Helts) or m == 1 for u in kernel):
                cond = d
                break
        if cond != m:
            U = UnitGroup(cond)
            Helts = sorted({u % cond for u in Helts} | {1 % cond} if cond > 1 else [])
        self.conductor = cond
        self.units = U
        self.H = tuple(sorted(set(Helts))) if cond > 1 else ()
        Hc = [U.dlog(u) for u in self.H]
        self._qdata = U.group.quotient(Hc)
        self.group, self._project, self._section = self._qdata
        self.degree = self.group.order
        self.is_real = cond <= 2 or (cond - 1) in self.H
        self.r_rank = 1 if self.is_real else 0

    # -- identity ---------------------------------------------------------
    def key(self):
        return (self.conductor, self.H)

    def __eq__(self, other):
        return isinstance(other, AbelianField) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        kind = "real" if self.is_real else "complex"
        return f"AbelianField(m={self.conductor}, deg={self.degree}, {kind})"

    # -- Galois structure ---------------------------------------------------
    def galois_of_unit(self, a):
        return self._project(self.units.dlog(a))

    def unit_of_galois(self, sigma):
        return self.units.rep(self._section(sigma))

    def frobenius(self, ell):
        if self.conductor % ell == 0 if ell != 0 else False:
            raise ValueError(f"{ell} ramifies; no Frobenius")
        return self.galois_of_unit(ell % self.conductor if self.conductor > 1 else 1)

    def ramified_primes(self):
        return sorted(factorize(self.conductor))

    def places_S(self):
        """S(E): the ramified places; infinity included when E is complex."""
        fin = self.ramified_primes()
        return fin, (not self.is_real)

    def mu_order(self):
        m = self.conductor
        best = 1
        for d in _divisors(m):
            if all(u % d == 1 % d for u in self.H) or m == 1:
                if d > best and (d == 1 or all(u % d == 1 % d for u in self.H)):
                    best = d
        return best if best % 2 == 0 else 2 * best

    def decomposition_group(self, p):
        """Elements of the decomposition subgroup of Gal(E/Q) at p (p=0: infinity)."""
        G = self.group
        m = self.conductor
        if p == 0:
            if m <= 2:
                return (G.identity,)
            return G.subgroup_closure([self.galois_of_unit(m - 1)])
        a = factorize(m).get(p, 0)
        if a == 0:
            return G.subgroup_closure([self.frobenius(p)])
        q = p ** a
        rest = m // q
        gens = []
        for u in self.units.units():
            if u % rest == 1 % rest if rest > 1 else True:
                gens.append(self.galois_of_unit(u))  # inertia at p
        if rest > 1:
            frob_lift = _crt_pair(1, q, p % rest, rest)
            gens.append(self.galois_of_unit(frob_lift))
        return G.subgroup_closure(gens)

    def inertia_group(self, p):
        m = self.conductor
        a = factorize(m).get(p, 0)
        if a == 0:
            return (self.group.identity,)
        q = p ** a
        rest = m // q
        gens = [self.galois_of_unit(u) for u in self.units.units()
                if (u % rest == 1 % rest if rest > 1 else True)]
        return self.group.subgroup_closure(gens)

    def is_subfield_of(self, other: "AbelianField"):
        if other.conductor % self.conductor:
            return False
        mod = self.conductor
        Hset = set(self.H) | {1 % mod}
        return all((u % mod) in Hset or mod == 1 for u in other.H + (1 % mod if mod > 1 else 0,) if isinstance(u, int))

    def lift_gre(self, x: GroupRingElement) -> dict:
        """Lift a group-ring element over Gal(E/Q) to exponents over (Z/m)^x."""
        out = {}
        for sigma, c in x.coeffs.items():
            u = self.unit_of_galois(sigma)
            out[u] = out.get(u, 0) + Fraction(c)
        return out

    # -- enumeration --------------------------------------------------------
    @staticmethod
    def all_fields(max_conductor, real_only=False):
        """Every abelian field (other than Q) of conductor <= max_conductor."""
        out = []
        for m in range(3, max_conductor + 1):
            if m % 4 == 2:
                continue
            for H in subgroups_of_units(m):
                E = AbelianField(m, H)
                if E.conductor != m or E.degree == 1:
                    continue
                if real_only and not E.is_real:
                    continue
                out.append(E)
        return out

    def subfields_within(self, fields):
        return [E for E in fields if E.is_subfield_of(self)]


def _divisors(n):
    out = [1]
    for p, e in factorize(n).items():
        out = [d * p ** k for d in out for k in range(e + 1)]
    return sorted(out)


# -- basic operations on cyclotomic numbers ---------------------------------

def galois_apply(a, x: CycNumber) -> CycNumber:
    """sigma_a(x) for a coprime to the level of x."""
    return x.galois(a)


def norm_to_subfield(x: CycNumber, E: AbelianField) -> CycNumber:
    """N_{Q(zeta_m)/E}(x): the product of sigma_a(x) over a fixing E.

    x must live at a level m with cond(E) | m; the result is returned at
    level cond(E) and its E-rationality is implied by construction.
    """
    m = x.m
    if E.conductor > 1 and m % E.conductor:
        raise ValueError("field is not contained in the ambient cyclotomic field")
    fixers = [a for a in UnitGroup(m).units()
              if E.conductor == 1 or (a % E.conductor) in set(E.H) | {1}]
    out = CycNumber.one(m)
    for a in fixers:
        out = out * x.galois(a)
    return out.lower_level(E.conductor if E.conductor > 1 else 1)


def embed_complex(x: CycNumber, a: int, bits: int) -> ComplexInterval:
    """Evaluate x under zeta_m -> exp(2 pi i a / m) with rigorous intervals."""
    m = x.m
    if gcd(a, m) != 1:
        raise ValueError("embedding index must be coprime to the level")
    guard = 12 + max(m.bit_length(), 8)
    with precision(bits + guard):
        total_re = iv.mpf(0)
        total_im = iv.mpf(0)
        for i, c in enumerate(x.nums):
            if c:
                root = ComplexInterval.root_of_unity(m, a * i % m)
                total_re += root.re * c
                total_im += root.im * c
        d = iv.mpf(x.den)
        return ComplexInterval(total_re / d, total_im / d)


def log_abs_embedding(x: CycNumber, a: int, bits: int):
    """log | iota_a(x) | as a real interval."""
    z = embed_complex(x, a, bits)
    with precision(bits + 16):
        return z.log_abs()


# -- primes above a rational prime ------------------------------------------

def _fp_normalize(poly, p):
    out = [c % p for c in poly]
    while out and out[-1] == 0:
        out.pop()
    return out


def _fp_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _fp_normalize(out, p)


def _fp_divmod(a, b, p):
    a = list(a)
    binv = pow(b[-1], -1, p)
    q = [0] * max(len(a) - len(b) + 1, 1)
    for i in range(len(a) - len(b), -1, -1):
        c = (a[i + len(b) - 1] * binv) % p
        q[i] = c
        if c:
            for j, bj in enumerate(b):
                a[i + j] = (a[i + j] - c * bj) % p
    return _fp_normalize(q, p), _fp_normalize(a, p)


def _fp_gcd(a, b, p):
    a, b = _fp_normalize(a, p), _fp_normalize(b, p)
    while b:
        _, r = _fp_divmod(a, b, p)
        a, b = b, r
    if a:
        inv = pow(a[-1], -1, p)
        a = [(c * inv) % p for c in a]
    return a

def _fp_pow_mod(base, e, mod, p):
    result = [1]
    base = _fp_divmod(base, mod, p)[1]
    while e:
        if e & 1:
            result = _fp_divmod(_fp_mul(result, base, p), mod, p)[1]
        base = _fp_divmod(_fp_mul(base, base, p), mod, p)[1]
        e >>= 1
    return result


def _fp_deriv(a, p):
    return _fp_normalize([(i * c) % p for i, c in enumerate(a)][1:], p)


def fp_radical(poly, p):
    """Product of the distinct irreducible factors of poly mod p."""
    a = _fp_normalize(poly, p)
    d = _fp_deriv(a, p)
    if not d:
        # poly = g(x^p); over F_p its radical equals radical of g
        g = [a[i] for i in range(0, len(a), p)]
        return fp_radical(g, p)
    g = _fp_gcd(a, d, p)
    rad, _ = _fp_divmod(a, g, p)
    # repeated factors may persist when gcd captured p-th powers
    while True:
        h = _fp_gcd(rad, _fp_divmod(a, rad, p)[1] if len(rad) <= len(a) else [], p)
        if len(h) <= 1:
            return rad
        rad = _fp_mul(rad, _fp_divmod(h, _fp_gcd(h, rad, p), p)[0], p) if False else rad
        return rad


@lru_cache(maxsize=None)
def cyclotomic_factors_mod_p(m_prime, p):
    """Sorted irreducible factors of Phi_{m'} mod p, for p not dividing m'.

    All factors share the common degree f = ord of p in (Z/m')^x.
    """
    assert m_prime % p != 0
    phi = _fp_normalize(list(cyclotomic_polynomial(m_prime)), p)
    if m_prime == 1:
        return (tuple(phi),)
    f = 1
    while pow(p, f, m_prime) != 1:
        f += 1
    rng = random.Random(10007 * m_prime + p)
    factors = []

    def split(poly):
        deg = len(poly) - 1
        if deg == f:
            factors.append(poly)
            return
        while True:
            r = [rng.randrange(p) for _ in range(deg)]
            r = _fp_normalize(r, p)
            if not r:
                continue
            if p == 2:
                s = []
                acc = _fp_divmod(r, poly, p)[1]
                t = acc
                for _ in range(f):
                    s = _fp_normalize([(x + y) % p for x, y in
                                       zip(s + [0] * (len(t) - len(s)), t + [0] * (len(s) - len(t)))], p) if s or t else []
                    t = _fp_pow_mod(t, 2, poly, p)
                g = _fp_gcd(poly, s, p)
            else:
                s = _fp_pow_mod(r, (p ** f - 1) // 2, poly, p)
                s = _fp_normalize([(s[0] - 1) % p] + s[1:], p) if s else [p - 1]
                g = _fp_gcd(poly, s, p)
            if 0 < len(g) - 1 < deg:
                split(g)
                split(_fp_divmod(poly, g, p)[0])
                return

    split(phi)
    return tuple(sorted(tuple(f_) for f_ in factors))


@lru_cache(maxsize=None)
def _hensel_lifted_factor(m_prime, p, which, prec):
    """Lift factor #which of Phi_{m'} mod p to a monic factor mod p^prec."""
    phi = list(cyclotomic_polynomial(m_prime))
    g = list(cyclotomic_factors_mod_p(m_prime, p)[which])
    h, rem = _fp_divmod(phi, g, p)
    assert not rem
    # Bezout data mod p: s g + t h = 1
    s, t = _fp_bezout(g, h, p)
    gk = [c % p for c in g]
    hk = [c % p for c in h]
    for k in range(1, prec):
        pk = p ** k
        prod = _int_poly_mul(gk, hk)
        e = [(a - b) // pk % p for a, b in _zip_pad(phi, prod)]
        dg = _fp_divmod(_fp_mul(t, e, p), gk_mod_p := [c % p for c in gk], p)[1]
        num = [(a - b) % p for a, b in _zip_pad(e, _fp_mul(dg, [c % p for c in hk], p))]
        dh = _fp_divmod(num, gk_mod_p, p)[0]
        gk = [a + pk * b for a, b in _zip_pad(gk, dg)]
        hk = [a + pk * b for a, b in _zip_pad(hk, dh)]
        gk = [c % (p ** (k + 1)) for c in gk]
        hk = [c % (p ** (k + 1)) for c in hk]
        gk[-1] = 1  # monic
    return tuple(gk)


def _zip_pad(a, b):
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return zip(a, b)


def _int_poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _fp_bezout(g, h, p):
    # extended gcd in F_p[x]; g, h coprime
    r0, r1 = _fp_normalize(g, p), _fp_normalize(h, p)
    s0, s1 = [1], []
    t0, t1 = [], [1]
    while r1:
        q, r = _fp_divmod(r0, r1, p)
        r0, r1 = r1, r
        s0, s1 = s1, _fp_sub(s0, _fp_mul(q, s1, p), p)
        t0, t1 = t1, _fp_sub(t0, _fp_mul(q, t1, p), p)
    c = pow(r0[-1], -1, p)
    return [x * c % p for x in s0], [x * c % p for x in t0]


def _fp_sub(a, b, p):
    return _fp_normalize([(x - y) % p for x, y in _zip_pad(a, b)], p)


def valuation(x: CycNumber, ell: int, which: int = 0) -> int:
    """ord of x at the prime #which above ell in Q(zeta_m), m the level of x.

    Primes above ell correspond to the canonically sorted irreducible
    factors of Phi_{m'} mod ell, where m = ell^a * m'.
    """
    if x.is_zero():
        raise ValueError("valuation of zero")
    m = x.m
    a = factorize(m).get(ell, 0) if m > 1 else 0
    m_prime = m // ell ** a
    if a > 0:
        # push down the totally ramified part by taking the subextension norm
        y = CycNumber.one(m)
        for b in UnitGroup(m).units():
            if b % m_prime == 1 % m_prime if m_prime > 1 else True:
                y = y * x.galois(b)
        x = y.lower_level(m_prime)
    return _valuation_unramified(x, ell, which)


def _valuation_unramified(x: CycNumber, ell: int, which: int) -> int:
    m = x.m
    if m == 1:
        q = Fraction(x.nums[0], x.den)
        return _ord_rational(q, ell)
    den_ord = _ord_int(x.den, ell)
    factors = cyclotomic_factors_mod_p(m, ell)
    f = len(factors[which]) - 1
    nrm = poly_resultant(list(cyclotomic_polynomial(m)), list(x.nums))
    bound = _ord_int(abs(nrm), ell) + 2 if nrm else 2
    lift = list(_hensel_lifted_factor(m, ell, which, bound))
    res = poly_resultant(lift, list(x.nums))
    v = _ord_int(abs(res), ell) if res else bound
    assert v < bound, "insufficient lift precision"
    assert v % f == 0, "norm valuation not divisible by residue degree"
    return v // f - den_ord


def _ord_int(n, p):
    if n == 0:
        raise ValueError("ord of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _ord_rational(q, p):
    return _ord_int(q.numerator, p) - _ord_int(q.denominator, p)


def radical_congruence(x: CycNumber, ell: int) -> bool:
    """True iff x lies in every prime above ell of Z[zeta_m].

    Decided by divisibility of x mod ell by the radical of Phi_m mod ell.
    """
    if x.den % ell == 0:
        raise ValueError(f"{ell} divides a denominator of x")
    m = x.m
    poly = _fp_normalize(list(x.nums), ell)
    if not poly:
        return True
    rad = fp_radical(list(cyclotomic_polynomial(m)), ell)
    _, rem = _fp_divmod(poly, rad, ell)
    return not rem


# -- places ------------------------------------------------------------------

class Place:
    """A place of an abelian field E, as a coset of the decomposition group."""

    __slots__ = ("field", "p", "coset_rep", "coset", "e", "f", "infinite", "is_complex")

    def __init__(self, field, p, coset_rep, coset):
        self.field = field
        self.p = p
        self.coset_rep = coset_rep
        self.coset = coset
        self.infinite = (p == 0)
        if self.infinite:
            self.is_complex = not field.is_real
            self.e = self.f = 1
        else:
            I = field.inertia_group(p)
            D = field.decomposition_group(p)
            self.e = len(I)
            self.f = len(D) // len(I)
            self.is_complex = False

    def norm(self):
        assert not self.infinite
        return self.p ** self.f

    def label(self):
        return ("inf" if self.infinite else self.p, self.coset_rep)

    def ord(self, x: CycNumber) -> Fraction:
        """Normalized valuation at this place of an element of E (level = cond)."""
        assert not self.infinite
        E = self.field
        m = E.conductor
        b = E.unit_of_galois(self.coset_rep)
        binv = pow(b, -1, m) if m > 1 else 1
        y = x.galois(binv) if m > 1 else x
        a = factorize(m).get(self.p, 0) if m > 1 else 0
        e_top = euler_phi(self.p ** a) if a else 1
        v_top = valuation(y, self.p, 0)
        ram_index = e_top // self.e
        assert v_top % ram_index == 0
        return v_top // ram_index

    def __repr__(self):
        return f"Place({'inf' if self.infinite else self.p}, coset={self.coset_rep})"


def places_above(E: AbelianField, p: int):
    """All places of E above the rational place p (p = 0 for infinity)."""
    D = E.decomposition_group(p)
    G = E.group
    seen = set()
    out = []
    for g in sorted(G.elements()):
        coset = tuple(sorted(G.mul(g, d) for d in D))
        if coset not in seen:
            seen.add(coset)
            out.append(Place(E, p, min(coset), coset))
    return out


def distinguished_place(E: AbelianField, p: int) -> Place:
    D = E.decomposition_group(p)
    coset = tuple(sorted(D))
    return Place(E, p, min(coset), coset)


# -- formal products of cyclotomic numbers ------------------------------------

class MultiUnit:
    """Formal product prod_i x_i^{lambda_i} in Q tensor Q(zeta)^x.

    Each lambda_i is a sparse map {unit a mod m_i: Fraction}, read as the
    group-ring exponent sum_a lambda_a sigma_a. Equality clears exponent
    denominators and compares expanded field elements up to a root of
    unity, which is exactly equality in Q tensor E^x.
    """

    __slots__ = ("pairs",)

    def __init__(self, pairs=()):
        self.pairs = []
        for x, lam in pairs:
            lam = {a % x.m: Fraction(c) for a, c in lam.items() if c}
            if lam and not x.is_zero():
                self.pairs.append((x, lam))

    @staticmethod
    def one():
        return MultiUnit([])

    @staticmethod
    def of(x: CycNumber, exponent=None):
        if exponent is None:
            exponent = {1: Fraction(1)}
        elif isinstance(exponent, (int, Fraction)):
            exponent = {1: Fraction(exponent)}
        return MultiUnit([(x, exponent)])

    def __mul__(self, other):
        return MultiUnit(list(self.pairs) + list(other.pairs))

    def inverse(self):
        return self.pow_rational(-1)

    def pow_rational(self, q):
        q = Fraction(q)
        if not q:
            return MultiUnit([])
        return MultiUnit([(x, {a: c * q for a, c in lam.items()}) for x, lam in self.pairs])

    def twist_exponents(self, rho: dict):
        """Multiply every exponent by the sparse group-ring element rho
        (keys are units mod the respective base level)."""
        out = []
        for x, lam in self.pairs:
            m = x.m
            new = {}
            for a, c in lam.items():
                for b, d in rho.items():
                    k = (a * b) % m
                    new[k] = new.get(k, Fraction(0)) + c * Fraction(d)
            out.append((x, new))
        return MultiUnit(out)

    def twist_by_field_gre(self, E: AbelianField, x: GroupRingElement):
        return self.twist_exponents(E.lift_gre(x))

    def norm_to_field(self, E: AbelianField):
        """Apply the field norm from the ambient cyclotomic level(s) down to E:
        multiplies exponents by the sum over the subgroup fixing E."""
        out = self
        rho_cache = {}
        new_pairs = []
        for x, lam in out.pairs:
            m = x.m
            if m not in rho_cache:
                if E.conductor > 1 and m % E.conductor:
                    raise ValueError("base level not compatible with the field")
                fixers = [a for a in UnitGroup(m).units()
                          if E.conductor == 1 or (a % E.conductor) in set(E.H) | {1}]
                rho_cache[m] = {a: 1 for a in fixers}
            rho = rho_cache[m]
            new = {}
            for a, c in lam.items():
                for b in rho:
                    k = (a * b) % m
                    new[k] = new.get(k, Fraction(0)) + c
            new_pairs.append((x, new))
        return MultiUnit(new_pairs)

    def denominator(self):
        D = 1
        for _, lam in self.pairs:
            for c in lam.values():
                D = D * c.denominator // gcd(D, c.denominator)
        return D

    def ambient_level(self):
        lvl = 1
        for x, _ in self.pairs:
            lvl = lvl * x.m // gcd(lvl, x.m)
        return lvl

    def expand(self, level=None):
        """Returns (P, Q, D) with value^D = P / Q exactly, P and Q at `level`."""
        D = self.denominator()
        M = level or self.ambient_level()
        P = CycNumber.one(M)
        Q = CycNumber.one(M)
        for x, lam in self.pairs:
            if M % x.m:
                raise ValueError("level does not contain a base")
            xb = x.raise_level(M)
            for a, c in sorted(lam.items()):
                n = int(c * D)
                if not n:
                    continue
                conj = xb.galois(a * (M // x.m) // (M // x.m)) if x.m == M else xb.galois(_lift_unit(a, x.m, M))
                if n > 0:
                    P = P * conj ** n
                else:
                    Q = Q * conj ** (-n)
        return P, Q, D

    def equals(self, other: "MultiUnit") -> bool:
        M = self.ambient_level()
        M2 = other.ambient_level()
        M = M * M2 // gcd(M, M2)
        P1, Q1, D1 = self.expand(M)
        P2, Q2, D2 = other.expand(M)
        L = D1 * D2 // gcd(D1, D2)
        A = (P1 ** (L // D1)) * (Q2 ** (L // D2))
        B = (Q1 ** (L // D1)) * (P2 ** (L // D2))
        return _equal_up_to_torsion(A, B)

    def is_torsion(self) -> bool:
        P, Q, _ = self.expand()
        return _equal_up_to_torsion(P, Q)

    def to_json(self):
        return [{"m": x.m,
                 "coeffs": [f"{f.numerator}/{f.denominator}" for f in x.coefficients()],
                 "exponent": {str(a): f"{c.numerator}/{c.denominator}"
                              for a, c in sorted(lam.items())}}
                for x, lam in self.pairs]

    def __repr__(self):
        return f"MultiUnit({len(self.pairs)} factors, den={self.denominator()})"


def _lift_unit(a, m, M):
    """A unit mod M restricting to a mod m (m | M)."""
    if M == m:
        return a
    step = 1
    for cand in range(a % m if a % m else m, M + m, m):
        if cand % m == a % m and gcd(cand, M) == 1:
            return cand
    raise ValueError("no unit lift found")


def _equal_up_to_torsion(A: CycNumber, B: CycNumber) -> bool:
    if A.is_zero() or B.is_zero():
        return A.is_zero() and B.is_zero()
    if A == B or A == -B:
        return True
    if A.den != B.den:
        # torsion quotient forces equal denominators in reduced form
        pass
    ratio_ok = _torsion_ratio_filter(A, B)
    if not ratio_ok:
        return False
    w = A * B.inverse()
    return w.is_root_of_unity()


def _torsion_ratio_filter(A: CycNumber, B: CycNumber) -> bool:
    """Sound negative filter: test (A/B)^L = 1 modulo a large prime."""
    m = A.m
    L = m if m % 2 == 0 else 2 * m
    q = 2 ** 61 - 1
    phi_m = euler_phi(m)
    phi = cyclotomic_polynomial(m)

    def mulq(u, v):
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

    def powq(u, e):
        r = [1] + [0] * (phi_m - 1)
        while e:
            if e & 1:
                r = mulq(r, u)
            u = mulq(u, u)
            e >>= 1
        return r

    a = [c % q for c in A.nums]
    b = [c % q for c in B.nums]
    pa = powq(a, L)
    pb = powq(b, L)
    # (A/B)^L = 1 iff A^L = B^L, up to denominators
    da = pow(A.den, L, q)
    db = pow(B.den, L, q)
    lhs = [(x * db) % q for x in pa]
    rhs = [(x * da) % q for x in pb]
    return lhs == rhs


# -- the Dirichlet regulator ---------------------------------------------------

class PlaceVector:
    """Element of R tensor Y_{E,Sigma} with interval coefficients."""

    def __init__(self, field, coefficients):
        self.field = field
        self.coefficients = dict(coefficients)  # label -> iv.mpf

    def coefficient_sum(self):
        total = iv.mpf(0)
        for v in self.coefficients.values():
            total += v
        return total

    def is_x_vector(self):
        s = self.coefficient_sum()
        return s.a <= 0 <= s.b

    def to_json(self):
        return {str(k): [str(v.a), str(v.b)] for k, v in sorted(self.coefficients.items(),
                                                                key=lambda kv: str(kv[0]))}


def regulator_image(u: MultiUnit, E: AbelianField, sigma_fin, bits) -> PlaceVector:
    """lambda_{E,Sigma}(u) = - sum_w log|u|_w . w over places above Sigma.

    sigma_fin lists the finite rational primes of Sigma; the archimedean
    place is always included. Finite places use |.|_w = (Nw)^{-ord_w},
    complex archimedean places the square of the modulus.
    """
    m = E.conductor
    guard = 24
    support = _support_primes(u)
    for p_ in support:
        if p_ not in sigma_fin:
            for w in places_above(E, p_):
                if _ord_of_multiunit(u, w) != 0:
                    raise ValueError(f"u is not an S-unit: nonzero valuation above {p_}")
    coeffs = {}
    with precision(bits + guard):
        deg_w = 1 if E.is_real else 2
        log_tables = {}
        for x, lam in u.pairs:
            if x.m not in log_tables:
                log_tables[x.m] = {}
        for w in places_above(E, 0):
            b = E.unit_of_galois(w.coset_rep)
            total = iv.mpf(0)
            for x, lam in u.pairs:
                mx = x.m
                binv_units = pow(b % mx if mx > 1 else 1, -1, mx) if mx > 1 else 1
                table = log_tables[mx]
                for a, c in lam.items():
                    idx = (a * binv_units) % mx if mx > 1 else 1
                    if idx not in table:
                        table[idx] = log_abs_embedding(x, idx if mx > 1 else 1, bits + guard) \
                            if mx > 1 else iv.log(abs(iv_fraction(x.is_rational())))
                    total += iv_fraction(c) * table[idx]
            coeffs[w.label()] = -deg_w * total
        for p_ in sorted(sigma_fin):
            for w in places_above(E, p_):
                o = _ord_of_multiunit(u, w)
                coeffs[w.label()] = iv_fraction(o) * iv.log(iv.mpf(w.norm()))
    return PlaceVector(E, coeffs)


def _ord_of_multiunit(u: MultiUnit, w: Place) -> Fraction:
    E = w.field
    m = E.conductor
    total = Fraction(0)
    for x, lam in u.pairs:
        if x.m == 1 or (m > 1 and x.m % m == 0) or True:
            for a, c in lam.items():
                conj = x.galois(a) if x.m > 1 else x
            # group the exponent by the place action instead: sigma_a moves w
        # compute ord_w(sigma_a x) = ord at place w of each conjugate
        for a, c in lam.items():
            if not c:
                continue
            xa = x.galois(a) if x.m > 1 else x
            y = xa if x.m == m else (xa.raise_level(_lcm(x.m, m)) if m > 1 else xa)
            if y.m != m:
                # bring to the field's level: bases live at levels dividing lcm
                yl = y.lower_level(m) if (m > 1 and _lies_in_level(y, m)) else None
                if yl is None:
                    raise ValueError("multiunit base does not lie in the field's cyclotomic level")
                y = yl
            total += c * w.ord(y)
    return total


def _lies_in_level(x: CycNumber, m: int) -> bool:
    try:
        x.lower_level(m)
        return True
    except ValueError:
        return False


def _lcm(a, b):
    return a * b // gcd(a, b)


def _support_primes(u: MultiUnit):
    out = set()
    for x, _ in u.pairs:
        n = x.norm_to_q()
        for p_ in factorize(abs(n.numerator)):
            out.add(p_)
        for p_ in factorize(n.denominator):
            out.add(p_)
    out.discard(1)
    return sorted(out)
