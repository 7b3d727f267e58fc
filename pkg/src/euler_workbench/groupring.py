"""Group rings R[G] for finite abelian G.

Elements of G are exponent vectors against the invariant-factor
generators (d_1 | d_2 | ... | d_k), which makes subgroups, quotients and
cosets canonical. Coefficients may be ints, Fractions, or CycNumbers;
the ring operations only assume +, *, negation and equality.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from . import intmat
from .cycnum import CycNumber


class FiniteAbelianGroup:
    """Z/d_1 x ... x Z/d_k with d_1 | d_2 | ... | d_k."""

    def __init__(self, invariants):
        invariants = tuple(int(d) for d in invariants if int(d) != 1)
        for a, b in zip(invariants, invariants[1:]):
            if b % a:
                raise ValueError("invariant factors must form a divisor chain")
        self.invariants = invariants
        self.rank = len(invariants)
        self.order = 1
        for d in invariants:
            self.order *= d
        self.exponent = invariants[-1] if invariants else 1
        self.identity = (0,) * self.rank

    @staticmethod
    def from_cyclic_orders(orders):
        """Normalize an arbitrary product of cyclic groups to invariant factors.

        Returns (group, change) where change maps old coordinate vectors to
        new ones (list-in, tuple-out).
        """
        orders = [int(c) for c in orders]
        k = len(orders)
        if k == 0:
            G = FiniteAbelianGroup(())
            return G, lambda v: ()
        rel = [[orders[i] if j == i else 0 for j in range(k)] for i in range(k)]
        D, U, V = intmat.snf_with_transforms(rel)
        diag = [D[i][i] for i in range(k)]
        keep = [i for i, d in enumerate(diag) if d != 1]
        G = FiniteAbelianGroup([diag[i] for i in keep])

        def change(v):
            z = [sum(v[i] * V[i][j] for i in range(k)) for j in range(k)]
            return tuple(z[i] % diag[i] for i in keep)

        return G, change

    def element(self, coords):
        return tuple(c % d for c, d in zip(coords, self.invariants))

    def mul(self, a, b):
        return tuple((x + y) % d for x, y, d in zip(a, b, self.invariants))

    def inv(self, a):
        return tuple((-x) % d for x, d in zip(a, self.invariants))

    def power(self, a, n):
        return tuple((x * n) % d for x, d in zip(a, self.invariants))

    def elements(self):
        return itertools.product(*[range(d) for d in self.invariants])

    def element_order(self, a):
        n = 1
        for x, d in zip(a, self.invariants):
            if x:
                o = d // _gcd(x, d)
                n = n * o // _gcd(n, o)
        return n

    def subgroup_closure(self, gens):
        seen = {self.identity}
        frontier = [self.identity]
        gens = [self.element(g) for g in gens]
        while frontier:
            cur = frontier.pop()
            for g in gens:
                nxt = self.mul(cur, g)
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        return tuple(sorted(seen))

    def quotient(self, subgroup_elements):
        """Quotient by the subgroup generated by the given elements.

        Returns (Q, project, section): project maps G-elements onto
        Q-elements; section lifts Q-elements back to coset representatives.
        """
        k = self.rank
        if k == 0:
            Q = FiniteAbelianGroup(())
            return Q, lambda a: (), lambda q: ()
        rel = [[self.invariants[i] if j == i else 0 for j in range(k)]
               for i in range(k)]
        for h in subgroup_elements:
            rel.append(list(self.element(h)))
        D, U, V = intmat.snf_with_transforms(rel)
        diag = [D[i][i] for i in range(k)]
        keep = [i for i, d in enumerate(diag) if d != 1]
        Q = FiniteAbelianGroup([diag[i] for i in keep])
        Vrows = V  # x -> x V, columns indexed like diag
        Vinv = _unimodular_inverse(V)

        def project(a):
            z = [sum(a[i] * Vrows[i][j] for i in range(k)) for j in range(k)]
            return tuple(z[i] % diag[i] for i in keep)

        def section(q):
            z = [0] * k
            for pos, i in enumerate(keep):
                z[i] = q[pos]
            x = [sum(z[i] * Vinv[i][j] for i in range(k)) for j in range(k)]
            return self.element(x)

        return Q, project, section

    def characters(self):
        for exps in itertools.product(*[range(d) for d in self.invariants]):
            yield Character(self, exps)

    def __eq__(self, other):
        return isinstance(other, FiniteAbelianGroup) and self.invariants == other.invariants

    def __hash__(self):
        return hash(self.invariants)

    def __repr__(self):
        return f"FiniteAbelianGroup{self.invariants}"


def _unimodular_inverse(V):
    n = len(V)
    aug = [list(row) + [1 if i == j else 0 for j in range(n)] for i, row in enumerate(V)]
    H = intmat.hnf(aug)
    # V unimodular => left block of HNF is the identity
    inv = [row[n:] for row in H]
    assert all(H[i][:n] == [1 if j == i else 0 for j in range(n)] for i in range(n))
    return inv


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return abs(a)


class CharacterValue:
    """An exact root of unity zeta_order^exp."""

    __slots__ = ("order", "exp")

    def __init__(self, order, exp):
        self.order = order
        self.exp = exp % order

    def __mul__(self, other):
        if self.order == other.order:
            return CharacterValue(self.order, self.exp + other.exp)
        n = self.order * other.order // _gcd(self.order, other.order)
        return CharacterValue(n, self.exp * (n // self.order) + other.exp * (n // other.order))

    def __pow__(self, k):
        return CharacterValue(self.order, self.exp * k)

    def inverse(self):
        return CharacterValue(self.order, -self.exp)

    def is_one(self):
        return self.exp % self.order == 0

    def to_cyc(self, level):
        if level % self.order:
            raise ValueError("level does not contain this root of unity")
        return CycNumber.zeta_power(level, self.exp * (level // self.order))

    def __eq__(self, other):
        g = _gcd(self.order, self.exp) or self.order
        g2 = _gcd(other.order, other.exp) or other.order
        return (self.order // g, (self.exp // g) % (self.order // g)) == \
               (other.order // g2, (other.exp // g2) % (other.order // g2))

    def __repr__(self):
        return f"zeta_{self.order}^{self.exp}"


class Character:
    """A character of a FiniteAbelianGroup, valued in mu_exponent."""

    def __init__(self, group, exps):
        self.group = group
        e = group.exponent
        self.exps = tuple(t % d for t, d in zip(exps, group.invariants))
        self._weights = tuple(e // d for d in group.invariants)

    def value(self, a):
        e = self.group.exponent
        k = sum(t * w * x for t, w, x in zip(self.exps, self._weights, a)) % e
        return CharacterValue(e, k)

    def cyc_value(self, a, level=None):
        return self.value(a).to_cyc(level or self.group.exponent)

    def is_trivial(self):
        return all(t == 0 for t in self.exps)

    def order(self):
        n = 1
        for t, d in zip(self.exps, self.group.invariants):
            if t:
                o = d // _gcd(t, d)
                n = n * o // _gcd(n, o)
        return n

    def __pow__(self, k):
        return Character(self.group, tuple(t * k for t in self.exps))

    def inverse(self):
        return self ** (-1)

    def is_trivial_on(self, elements):
        return all(self.value(a).is_one() for a in elements)

    def kernel(self):
        return tuple(sorted(a for a in self.group.elements() if self.value(a).is_one()))

    def __eq__(self, other):
        return self.group == other.group and self.exps == other.exps

    def __hash__(self):
        return hash((self.group.invariants, self.exps))

    def __repr__(self):
        return f"Character{self.exps}"


class GroupRingElement:
    """Sparse element of R[G]; coefficients indexed by exponent vectors."""

    __slots__ = ("group", "coeffs")

    def __init__(self, group, coeffs=None):
        self.group = group
        self.coeffs = {}
        if coeffs:
            for g, c in coeffs.items():
                if not _is_zero(c):
                    self.coeffs[group.element(g)] = c

    @staticmethod
    def zero(group):
        return GroupRingElement(group)

    @staticmethod
    def one(group):
        return GroupRingElement(group, {group.identity: 1})

    @staticmethod
    def of(group, element, coeff=1):
        return GroupRingElement(group, {element: coeff})

    def coefficient(self, g):
        return self.coeffs.get(self.group.element(g), 0)

    def support(self):
        return sorted(self.coeffs)

    def is_zero(self):
        return not self.coeffs

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.coeffs)
        for g, c in other.coeffs.items():
            s = out.get(g, 0) + c
            if _is_zero(s):
                out.pop(g, None)
            else:
                out[g] = s
        return self._wrap(out)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __neg__(self):
        return self._wrap({g: -c for g, c in self.coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, CycNumber)):
            return self.scale(other)
        other = self._coerce(other)
        out = {}
        G = self.group
        for g1, c1 in self.coeffs.items():
            for g2, c2 in other.coeffs.items():
                g = G.mul(g1, g2)
                s = out.get(g, 0) + c1 * c2
                if _is_zero(s):
                    out.pop(g, None)
                else:
                    out[g] = s
        return self._wrap(out)

    __rmul__ = __mul__
    __radd__ = __add__

    def scale(self, c):
        if _is_zero(c):
            return GroupRingElement(self.group)
        return self._wrap({g: c * x for g, x in self.coeffs.items()})

    def __pow__(self, n):
        out = GroupRingElement.one(self.group)
        for _ in range(n):
            out = out * self
        return out

    def _wrap(self, coeffs):
        e = GroupRingElement(self.group)
        e.coeffs = {g: c for g, c in coeffs.items() if not _is_zero(c)}
        return e

    def _coerce(self, other):
        if isinstance(other, GroupRingElement):
            if other.group != self.group:
                raise ValueError("group mismatch")
            return other
        if isinstance(other, (int, Fraction)):
            return GroupRingElement(self.group, {self.group.identity: other})
        return NotImplemented

    def __eq__(self, other):
        other = self._coerce(other)
        keys = set(self.coeffs) | set(other.coeffs)
        return all(_eq(self.coeffs.get(k, 0), other.coeffs.get(k, 0)) for k in keys)

    def __hash__(self):
        return hash((self.group.invariants, tuple(sorted(self.coeffs.items(), key=lambda kv: kv[0]))))

    def apply(self, f):
        """Push forward along a group homomorphism given as a function."""
        out = {}
        for g, c in self.coeffs.items():
            h = f(g)
            s = out.get(h, 0) + c
            out[h] = s
        return out

    def involution(self):
        """The standard involution g -> g^{-1}."""
        G = self.group
        return self._wrap({G.inv(g): c for g, c in self.coeffs.items()})

    def coefficients_rational(self):
        out = {}
        for g, c in self.coeffs.items():
            if isinstance(c, CycNumber):
                r = c.is_rational()
                if r is None:
                    raise ValueError("non-rational coefficient")
                out[g] = r
            else:
                out[g] = Fraction(c)
        return out

    def rationalize(self):
        return self._wrap(self.coefficients_rational())

    def is_integral(self):
        for c in self.coefficients_rational().values():
            if c.denominator != 1:
                return False
        return True

    def to_text(self):
        """Canonical serialization: `c1*[e1] + c2*[e2] + ...`, lex order."""
        if not self.coeffs:
            return "0"
        parts = []
        for g in sorted(self.coeffs):
            c = self.coeffs[g]
            if isinstance(c, CycNumber):
                r = c.is_rational()
                cstr = _frac_str(r) if r is not None else "(" + ",".join(
                    _frac_str(x) for x in c.coefficients()) + f";zeta{c.m})"
            else:
                cstr = _frac_str(Fraction(c))
            parts.append(f"{cstr}*[{','.join(str(x) for x in g)}]")
        return " + ".join(parts)

    def __repr__(self):
        return f"GRE({self.to_text()})"


def _frac_str(q):
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}" if q.denominator != 1 else str(q.numerator)


def _is_zero(c):
    if isinstance(c, CycNumber):
        return c.is_zero()
    return c == 0


def _eq(a, b):
    if isinstance(a, CycNumber) or isinstance(b, CycNumber):
        if not isinstance(a, CycNumber):
            a, b = b, a
        return a == (b if isinstance(b, CycNumber) else CycNumber.from_rational(a.m, b))
    return Fraction(a) == Fraction(b)


def norm_element(group, subgroup_gens):
    """N_H = sum of the elements of the subgroup generated by the given gens."""
    H = group.subgroup_closure(subgroup_gens)
    return GroupRingElement(group, {h: 1 for h in H})


def idempotent_char(chi: Character) -> GroupRingElement:
    """e_chi = |G|^{-1} sum_sigma chi(sigma) sigma^{-1}, coefficients in Q(zeta_exp(G))."""
    G = chi.group
    level = G.exponent
    inv_order = Fraction(1, G.order)
    coeffs = {}
    for g in G.elements():
        val = chi.cyc_value(g, level) * inv_order
        coeffs[G.inv(g)] = val
    return GroupRingElement(G, coeffs)


def restriction(x: GroupRingElement, quotient_data) -> GroupRingElement:
    """Image under R[G] -> R[G/H]; coefficient of a coset is the fiber sum.

    quotient_data is the (Q, project, section) triple from G.quotient(...).
    """
    Q, project, _ = quotient_data
    out = {}
    for g, c in x.coeffs.items():
        q = project(g)
        s = out.get(q, 0) + c
        out[q] = s
    return GroupRingElement(Q, out)


def norm_to_base(x: GroupRingElement):
    """Determinant of multiplication-by-x on R[G] in the group-element basis."""
    G = x.group
    basis = list(G.elements())
    index = {g: i for i, g in enumerate(basis)}
    n = len(basis)
    M = [[0] * n for _ in range(n)]
    for j, g in enumerate(basis):
        for h, c in x.coeffs.items():
            M[index[G.mul(h, g)]][j] = c
    return _det_exact_division(M)


def _det_exact_division(M):
    """Bareiss determinant; works over Z, Q, or Q(zeta) entries."""
    n = len(M)
    if n == 0:
        return 1
    M = [list(r) for r in M]
    sign = 1
    prev = None
    for k in range(n - 1):
        if _is_zero(M[k][k]):
            piv = next((i for i in range(k + 1, n) if not _is_zero(M[i][k])), None)
            if piv is None:
                return 0
            M[k], M[piv] = M[piv], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                v = M[i][j] * M[k][k] - M[i][k] * M[k][j]
                if prev is not None:
                    v = _exact_div(v, prev)
                M[i][j] = v
        prev = M[k][k]
    out = M[n - 1][n - 1]
    return -out if sign < 0 else out


def _exact_div(a, b):
    if isinstance(a, CycNumber) or isinstance(b, CycNumber):
        return a / b
    q = Fraction(a) / Fraction(b)
    if isinstance(a, int) and isinstance(b, int):
        assert q.denominator == 1
        return q.numerator
    return q


def delta_T(field, T) -> GroupRingElement:
    """delta_T = prod_{l in T} (1 - l * Frob_l^{-1}) in Z[Gal(E/Q)].

    Every prime in T must be unramified in the field.
    """
    G = field.group
    out = GroupRingElement.one(G)
    for ell in T:
        if ell in field.ramified_primes():
            raise ValueError(f"prime {ell} ramifies in the field; T is inadmissible")
        frob_inv = G.inv(field.frobenius(ell))
        factor = GroupRingElement(G, {G.identity: 1}) + GroupRingElement(G, {frob_inv: -ell})
        out = out * factor
    return out
