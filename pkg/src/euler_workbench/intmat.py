"""Exact integer and rational matrix routines.

Matrices are lists of lists (row major) of Python ints or Fractions.
Everything here is small and dense; the callers guard sizes. The
normal-form functions return new matrices and never mutate arguments.
"""

from __future__ import annotations

from fractions import Fraction


def identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(A, B):
    n, k = len(A), len(B)
    m = len(B[0]) if B else 0
    C = [[0] * m for _ in range(n)]
    for i in range(n):
        Ai = A[i]
        Ci = C[i]
        for t in range(k):
            a = Ai[t]
            if a:
                Bt = B[t]
                for j in range(m):
                    Ci[j] += a * Bt[j]
    return C


def mat_vec(A, v):
    return [sum(a * x for a, x in zip(row, v)) for row in A]


def transpose(A):
    return [list(col) for col in zip(*A)] if A else []


def hnf(rows):
    """Row Hermite normal form of the lattice spanned by `rows`.

    Returns the list of nonzero rows in echelon form: positive pivots,
    entries above a pivot reduced into [0, pivot).
    """
    if not rows:
        return []
    A = [list(r) for r in rows]
    m = len(A[0])
    pivot_row = {}  # pivot column -> echelon row
    for vec in A:
        v = list(vec)
        j = 0
        while j < m:
            if not v[j]:
                j += 1
                continue
            b = pivot_row.get(j)
            if b is None:
                pivot_row[j] = v
                break
            a, c = b[j], v[j]
            if c % a == 0:
                q = c // a
                for t in range(j, m):
                    v[t] -= q * b[t]
            else:
                # replace the pivot row by the gcd combination; the leftover
                # goes back into v (entries left of j are zero in both rows)
                g, x, y = _xgcd(a, c)
                a_, c_ = a // g, c // g
                for t in range(j, m):
                    bt, vt = b[t], v[t]
                    b[t] = x * bt + y * vt
                    v[t] = -c_ * bt + a_ * vt
            j += 1
    basis = [pivot_row[j] for j in sorted(pivot_row)]
    # normalize: positive pivots, reduce above
    for idx, b in enumerate(basis):
        j = next(i for i, x in enumerate(b) if x)
        if b[j] < 0:
            for t in range(m):
                b[t] = -b[t]
    # reduce above pivots, sweeping pivot columns left to right so that later
    # reductions are not disturbed by earlier ones
    for idx in range(len(basis)):
        b = basis[idx]
        j = next(i for i, x in enumerate(b) if x)
        for k in range(idx):
            r = basis[k]
            if r[j]:
                q = r[j] // b[j]
                if q:
                    for t in range(m):
                        r[t] -= q * b[t]
    return basis


def _xgcd(a, b):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def hnf_equal(rows_a, rows_b):
    return hnf(rows_a) == hnf(rows_b)


def in_lattice(v, basis_hnf, m=None):
    """Membership of an integer or rational vector v in the HNF-spanned lattice."""
    v = [Fraction(x) for x in v]
    m = len(v) if m is None else m
    for b in basis_hnf:
        j = next(i for i, x in enumerate(b) if x)
        if v[j]:
            q = v[j] / b[j]
            if q.denominator != 1:
                return False
            q = int(q)
            for t in range(j, m):
                v[t] -= q * b[t]
    return not any(v)


def snf_with_transforms(A):
    """Smith normal form: returns (D, U, V) with U*A*V = D, U, V unimodular."""
    A = [list(r) for r in A]
    n = len(A)
    m = len(A[0]) if n else 0
    U = identity(n)
    V = identity(m)

    def diagonalize():
        t = 0
        while t < min(n, m):
            piv = None
            for i in range(t, n):
                for j in range(t, m):
                    if A[i][j]:
                        piv = (i, j)
                        break
                if piv:
                    break
            if piv is None:
                return
            _swap_rows(A, U, t, piv[0])
            _swap_cols(A, V, t, piv[1])
            while True:
                done = True
                for i in range(t + 1, n):
                    if A[i][t]:
                        done = False
                        a, b = A[t][t], A[i][t]
                        if b % a == 0:
                            _add_row(A, U, i, t, -(b // a))
                        else:
                            g, x, y = _xgcd(a, b)
                            _combine_rows(A, U, t, i, x, y, -(b // g), a // g)
                for j in range(t + 1, m):
                    if A[t][j]:
                        done = False
                        a, b = A[t][t], A[t][j]
                        if b % a == 0:
                            _add_col(A, V, j, t, -(b // a))
                        else:
                            g, x, y = _xgcd(a, b)
                            _combine_cols(A, V, t, j, x, y, -(b // g), a // g)
                if done:
                    break
            t += 1

    diagonalize()
    # enforce the divisibility chain d1 | d2 | ... by folding offenders back in
    while True:
        bad = None
        for t in range(min(n, m) - 1):
            a, b = A[t][t], A[t + 1][t + 1]
            if a and b and b % a != 0:
                bad = t
                break
        if bad is None:
            break
        _add_col(A, V, bad, bad + 1, 1)
        diagonalize()
    for t in range(min(n, m)):
        if A[t][t] < 0:
            for j in range(m):
                A[t][j] = -A[t][j]
            for j in range(n):
                U[t][j] = -U[t][j]
    return A, U, V


def _swap_rows(A, U, i, j):
    if i != j:
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]


def _swap_cols(A, V, i, j):
    if i != j:
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]


def _add_row(A, U, i, j, c):
    # row_i += c * row_j
    for t in range(len(A[0])):
        A[i][t] += c * A[j][t]
    for t in range(len(U[0])):
        U[i][t] += c * U[j][t]


def _add_col(A, V, i, j, c):
    # col_i += c * col_j
    for row in A:
        row[i] += c * row[j]
    for row in V:
        row[i] += c * row[j]


def _combine_rows(A, U, i, j, x, y, z, w):
    # (row_i, row_j) <- (x row_i + y row_j, z row_i + w row_j); det = xw - yz = +-1
    for t in range(len(A[0])):
        a, b = A[i][t], A[j][t]
        A[i][t] = x * a + y * b
        A[j][t] = z * a + w * b
    for t in range(len(U[0])):
        a, b = U[i][t], U[j][t]
        U[i][t] = x * a + y * b
        U[j][t] = z * a + w * b


def _combine_cols(A, V, i, j, x, y, z, w):
    for row in A:
        a, b = row[i], row[j]
        row[i] = x * a + y * b
        row[j] = z * a + w * b
    for row in V:
        a, b = row[i], row[j]
        row[i] = x * a + y * b
        row[j] = z * a + w * b


def elementary_divisors(A):
    D, _, _ = snf_with_transforms(A)
    return [D[i][i] for i in range(min(len(D), len(D[0]) if D else 0)) if D[i][i]]


def int_kernel(A):
    """Basis of the integer kernel {x : A x = 0} (x a column vector).

    Returned as a list of integer vectors forming a basis of the saturated
    kernel lattice.
    """
    n = len(A)
    m = len(A[0]) if n else 0
    if m == 0:
        return []
    if n == 0:
        return identity(m)
    # HNF of [A^T | I]: rows (col_j of A, e_j); kernel rows are those with
    # zero left block.
    rows = [[A[i][j] for i in range(n)] + [1 if t == j else 0 for t in range(m)]
            for j in range(m)]
    H = hnf(rows)
    ker = [r[n:] for r in H if not any(r[:n])]
    return ker


def rat_solve(A, b):
    """One rational solution x of A x = b, or None. A: n x m, b: length n."""
    n = len(A)
    m = len(A[0]) if n else 0
    M = [[Fraction(A[i][j]) for j in range(m)] + [Fraction(b[i])] for i in range(n)]
    piv_cols = []
    r = 0
    for c in range(m):
        piv = next((i for i in range(r, n) if M[i][c]), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(n):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        piv_cols.append(c)
        r += 1
        if r == n:
            break
    for i in range(r, n):
        if M[i][m]:
            return None
    x = [Fraction(0)] * m
    for i, c in enumerate(piv_cols):
        x[c] = M[i][m]
    return x


def rat_row_space_basis(rows):
    """Row-reduced basis (over Q) of the span of the given rational rows."""
    M = [[Fraction(x) for x in r] for r in rows]
    m = len(M[0]) if M else 0
    basis = []
    for v in M:
        for b in basis:
            j = next(i for i, x in enumerate(b) if x)
            if v[j]:
                f = v[j] / b[j]
                v = [x - f * y for x, y in zip(v, b)]
        if any(v):
            j = next(i for i, x in enumerate(v) if x)
            v = [x / v[j] for x in v]
            basis.append(v)
            basis.sort(key=lambda r: next(i for i, x in enumerate(r) if x))
    return basis


def rat_in_span(v, basis):
    v = [Fraction(x) for x in v]
    for b in basis:
        j = next(i for i, x in enumerate(b) if x)
        if v[j]:
            f = v[j] / b[j]
            v = [x - f * y for x, y in zip(v, b)]
    return not any(v)


def saturation(rows):
    """Integer points of the rational row span: returns an HNF basis.

    rows may be rational; the result is the lattice (Q-span) cap Z^m.
    """
    B = rat_row_space_basis(rows)
    if not B:
        return []
    m = len(B[0])
    # equations cutting out the span: rational kernel of B (as column space)
    # span = {x : C x = 0} where rows of C span the orthogonal complement.
    C = rat_kernel_rows(B)
    if not C:
        return identity(m)
    # clear denominators to integers
    Ci = []
    for row in C:
        den = 1
        for x in row:
            den = den * x.denominator // _gcd(den, x.denominator)
        Ci.append([int(x * den) for x in row])
    ker = int_kernel(Ci)
    return hnf(ker)


def rat_kernel_rows(B):
    """Rows spanning {y : B y^T = 0 for all rows of B} i.e. orthogonal complement."""
    m = len(B[0]) if B else 0
    # solve B x = 0 over Q: kernel of the matrix B
    M = [[Fraction(x) for x in row] for row in B]
    n = len(M)
    piv = {}
    r = 0
    for c in range(m):
        p = next((i for i in range(r, n) if M[i][c]), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(n):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        piv[c] = r
        r += 1
    free = [c for c in range(m) if c not in piv]
    out = []
    for c0 in free:
        v = [Fraction(0)] * m
        v[c0] = Fraction(1)
        for c, i in piv.items():
            v[c] = -M[i][c0]
        out.append(v)
    return out


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return abs(a)


def det_bareiss(A):
    """Exact determinant of a square integer matrix (fraction-free Bareiss)."""
    n = len(A)
    if n == 0:
        return 1
    M = [list(r) for r in A]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            piv = next((i for i in range(k + 1, n) if M[i][k]), None)
            if piv is None:
                return 0
            M[k], M[piv] = M[piv], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]
