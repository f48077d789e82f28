"""Integer lattice utilities.

Hermite normal form, integer kernels, unimodular completion of primitive
vectors, and short-vector enumeration for quadratic forms (LLL-conditioned
Fincke-Pohst).  The enumeration is a *screen*: it returns a superset of the
requested points, and callers re-check membership with exact arithmetic.
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath
import numpy as np


class EnumerationCapExceeded(RuntimeError):
    """Raised when an enumeration would visit more points than allowed."""

    def __init__(self, cap: int, what: str = "enumeration"):
        super().__init__(f"{what} exceeded the cap of {cap} points")
        self.cap = cap


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, x, y)`` with ``a*x + b*y = g = gcd(a, b) >= 0``."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def hnf_rows(vectors) -> list[tuple[int, ...]]:
    """Hermite normal form of the lattice spanned by integer row vectors.

    The result is in row echelon form with positive pivots and the entries
    above each pivot reduced into ``[0, pivot)``; zero rows are dropped.  It is
    the transpose of the column-style form and is canonical for the lattice.

    >>> hnf_rows([(2, 4), (3, 5)])
    [(1, 1), (0, 2)]
    """
    rows = [list(map(int, v)) for v in vectors]
    rows = [r for r in rows if any(r)]
    if not rows:
        return []
    ncols = len(rows[0])
    out: list[list[int]] = []
    col = 0
    while rows and col < ncols:
        nz = [r for r in rows if r[col] != 0]
        if not nz:
            col += 1
            continue
        rest = [r for r in rows if r[col] == 0]
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            piv = nz[0]
            new = [piv]
            for r in nz[1:]:
                q = r[col] // piv[col]
                r = [x - q * y for x, y in zip(r, piv)]
                if r[col] != 0:
                    new.append(r)
                elif any(r):
                    rest.append(r)
            nz = new
        piv = nz[0]
        if piv[col] < 0:
            piv = [-x for x in piv]
        out.append(piv)
        rows = rest
        col += 1
    # reduce entries above pivots
    for i in range(len(out)):
        pc = next(c for c, x in enumerate(out[i]) if x)
        p = out[i][pc]
        for j in range(i):
            q = out[j][pc] // p
            if q:
                out[j] = [x - q * y for x, y in zip(out[j], out[i])]
    return [tuple(r) for r in out]


def integer_kernel(rows, length: int | None = None) -> list[tuple[int, ...]]:
    """Canonical (Hermite) basis of ``{z in Z^N : r . z = 0 for every row r}``.

    >>> integer_kernel([(l, 1, 1) for l in range(1, 6)])
    [(0, 1, -1)]
    >>> integer_kernel([], length=2)
    [(1, 0), (0, 1)]
    """
    rows = [list(map(int, r)) for r in rows]
    if rows:
        N = len(rows[0])
        if any(len(r) != N for r in rows):
            raise ValueError("rows must have equal length")
        if length is not None and length != N:
            raise ValueError("length does not match the rows")
    elif length is None:
        raise ValueError("length is required when there are no rows")
    else:
        N = length
    k = len(rows)
    # augmented matrix [R^T | I]; integer row operations
    aug = [[rows[i][j] for i in range(k)] + [int(j == c) for c in range(N)] for j in range(N)]
    r = 0
    for col in range(k):
        while True:
            nz = [i for i in range(r, N) if aug[i][col] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(aug[i][col]))
            aug[r], aug[piv] = aug[piv], aug[r]
            done = True
            for i in range(r + 1, N):
                if aug[i][col]:
                    q = aug[i][col] // aug[r][col]
                    aug[i] = [x - q * y for x, y in zip(aug[i], aug[r])]
                    if aug[i][col]:
                        done = False
            if done:
                r += 1
                break
    kernel = [tuple(row[k:]) for row in aug[r:]]
    return hnf_rows(kernel)


def complete_primitive(b) -> list[list[int]]:
    """Unimodular integer matrix (det 1 when q >= 2) whose last row is ``b``.

    >>> complete_primitive((2, 3))
    [[1, 1], [2, 3]]
    """
    b = [int(x) for x in b]
    q = len(b)
    if q == 0:
        raise ValueError("empty vector")
    g = 0
    for x in b:
        g = math.gcd(g, x)
    if g != 1:
        raise ValueError(f"vector {tuple(b)} is not primitive")
    if q == 1:
        return [[b[0]]]
    return _complete(b)


def _complete(b: list[int]) -> list[list[int]]:
    q = len(b)
    if q == 1:
        return [[1]]
    prefix, last = b[:-1], b[-1]
    if q == 2:
        g = prefix[0]
    else:
        g = 0
        for x in prefix:
            g = math.gcd(g, x)
    if g == 0:
        # prefix vanishes, so last = +-1
        m = [[int(i == j) for j in range(q)] for i in range(q)]
        m[0][0] = last
        m[-1][-1] = last
        return m
    bp = [x // g for x in prefix]
    gp = _complete(bp) if q > 2 else [[1]]
    det_gp = _int_det(gp)
    # find x, y with y*last - x*g = det_gp
    h, s, t = _egcd(last, -g)
    # s*last + t*(-g) = h = gcd(last, g) = 1
    y, x = s * det_gp, t * det_gp
    # canonical representative: 0 <= y < |g| (shift along (g, last))
    k = -(y // abs(g)) if g > 0 else (y // abs(g))
    y, x = y + k * g, x + k * last
    top = [row[:] + [0] for row in gp[:-1]]
    mid = [y * v for v in bp] + [x]
    return top + [mid, list(b)]


def _int_det(m) -> int:
    a = [[Fraction(x) for x in r] for r in m]
    n = len(a)
    res = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c] != 0), None)
        if p is None:
            return 0
        if p != c:
            a[c], a[p] = a[p], a[c]
            res = -res
        res *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            if f:
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return int(res)


int_det = _int_det


def int_inverse(m) -> list[list[int]]:
    """Inverse of a unimodular integer matrix."""
    n = len(m)
    a = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(m)]
    for c in range(n):
        p = next(r for r in range(c, n) if a[r][c] != 0)
        a[c], a[p] = a[p], a[c]
        piv = a[c][c]
        a[c] = [x / piv for x in a[c]]
        for r in range(n):
            if r != c and a[r][c]:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    inv = [r[n:] for r in a]
    if any(x.denominator != 1 for r in inv for x in r):
        raise ValueError("matrix is not unimodular")
    return [[int(x) for x in r] for r in inv]


def in_lattice(v, basis_rows) -> bool:
    """Whether integer vector ``v`` lies in the lattice spanned by ``basis_rows``."""
    if not basis_rows:
        return not any(v)
    return hnf_rows(list(basis_rows) + [tuple(v)]) == hnf_rows(basis_rows)


# -- LLL on a Gram matrix and Fincke-Pohst enumeration --------------------

def _gso(gram):
    d = gram.rows
    mu = mpmath.matrix(d, d)
    bstar = [mpmath.mpf(0)] * d
    for i in range(d):
        for j in range(i):
            s = gram[i, j]
            for k in range(j):
                s -= mu[j, k] * mu[i, k] * bstar[k]
            mu[i, j] = s / bstar[j]
        s = gram[i, i]
        for k in range(i):
            s -= mu[i, k] ** 2 * bstar[k]
        bstar[i] = s
    return mu, bstar


def lll_gram(gram, delta=mpmath.mpf(3) / 4, max_iter: int = 100000):
    """LLL-reduce the basis whose Gram matrix is ``gram`` (mpmath matrix).

    Returns ``(reduced_gram, U)`` where ``U`` is a unimodular integer matrix
    (list of lists) with ``reduced_gram = U^T gram U``.  Used only to
    condition the enumeration below.
    """
    d = gram.rows
    G = gram.copy()
    U = [[int(i == j) for j in range(d)] for i in range(d)]

    def col_op(i, j, q):
        # b_i <- b_i - q b_j
        for r in range(d):
            U[r][i] -= q * U[r][j]
        for r in range(d):
            G[i, r] -= q * G[j, r]
        for r in range(d):
            G[r, i] -= q * G[r, j]

    def swap(i, j):
        for r in range(d):
            U[r][i], U[r][j] = U[r][j], U[r][i]
        for r in range(d):
            G[i, r], G[j, r] = G[j, r], G[i, r]
        for r in range(d):
            G[r, i], G[r, j] = G[r, j], G[r, i]

    k = 1
    it = 0
    while k < d:
        it += 1
        if it > max_iter:
            break
        mu, bstar = _gso(G)
        for j in range(k - 1, -1, -1):
            q = int(mpmath.nint(mu[k, j]))
            if q:
                col_op(k, j, q)
                mu, bstar = _gso(G)
        if bstar[k] >= (delta - mu[k, k - 1] ** 2) * bstar[k - 1]:
            k += 1
        else:
            swap(k, k - 1)
            k = max(k - 1, 1)
    return G, U


def gram_of(rows_mp):
    """Gram matrix ``G^T G`` of the column space of a k x d mpmath matrix."""
    return rows_mp.T * rows_mp


def enumerate_short(gram, radius, cap: int = 2_000_000, slack: float = 1e-9):
    """All integer ``c != 0`` with ``c^T gram c <= radius^2`` (plus a thin slack).

    ``gram`` is a positive definite mpmath matrix; ``radius`` any real.
    Returns a list of integer tuples.
    """
    d = gram.rows
    G, U = lll_gram(gram)
    Gf = np.array([[float(G[i, j]) for j in range(d)] for i in range(d)])
    # Cholesky in high precision to stay accurate on badly scaled input
    L = mpmath.cholesky(G)
    R = np.array([[float(L[j, i]) for j in range(d)] for i in range(d)])  # upper
    r2 = float(mpmath.mpf(radius) ** 2) * (1 + slack) + slack * float(max(abs(Gf).max(), 1e-300)) * 1e-6
    Um = np.array(U, dtype=object)
    out = []
    c = [0] * d
    diag = [R[i, i] ** 2 for i in range(d)]

    def rec(i, partial):
        # partial = sum_{j > i} of squared contributions
        center = -sum(R[i, j] * c[j] for j in range(i + 1, d)) / R[i, i]
        rem = r2 - partial
        if rem < 0:
            return
        half = math.sqrt(rem / diag[i])
        lo = math.ceil(center - half)
        hi = math.floor(center + half)
        for v in range(lo, hi + 1):
            c[i] = v
            val = R[i, i] * (v - center)
            p = partial + val * val
            if p > r2:
                continue
            if i == 0:
                if any(c):
                    out.append(tuple(c))
                    if len(out) > cap:
                        raise EnumerationCapExceeded(cap)
            else:
                rec(i - 1, p)
        c[i] = 0

    rec(d - 1, 0.0)
    res = []
    for cc in out:
        v = Um.dot(np.array(cc, dtype=object))
        res.append(tuple(int(x) for x in v))
    return res


def exact_rank(vectors) -> int:
    """Rank of integer vectors by fraction-free elimination."""
    rows = [list(map(int, v)) for v in vectors]
    return len(hnf_rows(rows))
