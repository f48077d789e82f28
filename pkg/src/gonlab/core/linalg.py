"""Vectors, matrices, lattices, grids and the diagonal flow.

Matrices are plain row-major lists of lists of scalars.  A lattice basis
stores its generators as the *columns* of a d x d matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from . import scalar as sc
from .scalar import BigReal, UndecidedComparison


@dataclass(frozen=True)
class Dims:
    """Target dimension ``m`` and coefficient dimension ``n``; ``d = m + n``."""

    m: int
    n: int

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError("m and n must be positive")

    @property
    def d(self) -> int:
        return self.m + self.n


@dataclass(frozen=True)
class MultiIndex:
    """Strictly increasing 1-based index list of length ``k`` inside ``[1, d]``."""

    indices: tuple

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if not idx or any(b <= a for a, b in zip(idx, idx[1:])) or idx[0] < 1:
            raise ValueError(f"not a strictly increasing multi-index: {self.indices}")
        object.__setattr__(self, "indices", idx)

    @property
    def k(self) -> int:
        return len(self.indices)

    def __str__(self):
        return "{" + ",".join(map(str, self.indices)) + "}"


def multi_indices(d: int, k: int) -> list[MultiIndex]:
    if not 1 <= k <= d:
        raise ValueError("need 1 <= k <= d")
    return [MultiIndex(c) for c in combinations(range(1, d + 1), k)]


# -- scalar-level helpers ---------------------------------------------------

def scmp(x, y) -> int:
    """Three-way comparison; overlapping intervals count as equal."""
    try:
        if x < y:
            return -1
        if y < x:
            return 1
        return 0
    except UndecidedComparison:
        return 0


def sup_norm(v):
    """Sup-norm of a nonempty vector."""
    v = list(v)
    if not v:
        raise ValueError("empty vector")
    return sc.smax(abs(x) for x in v)


def euclidean_norm(v):
    return sc.sqrt(sum((x * x for x in v), Fraction(0)))


def torus_distance(v):
    """Sup-distance from ``v`` to the nearest integer vector."""
    v = list(v)
    if not v:
        return Fraction(0)
    return sc.smax(sc.frac_distance(x) for x in v)


def norm(v, kind: str = "sup"):
    if kind == "sup":
        return sup_norm(v)
    if kind == "euclidean":
        return euclidean_norm(v)
    raise ValueError(f"unknown norm {kind!r}")


def f_value(u, dims: Dims, norm_kind: str = "sup"):
    """The flow-invariant product form ``|v|^m * |w|^n``.

    ``v`` is the first ``m`` coordinates (scaled by ``e^{nt}`` under the flow)
    and ``w`` the last ``n`` (scaled by ``e^{-mt}``), so the value is unchanged
    by :func:`apply_flow`.
    """
    u = list(u)
    if len(u) != dims.d:
        raise ValueError(f"expected a vector of length {dims.d}")
    v, w = u[: dims.m], u[dims.m :]
    return norm(v, norm_kind) ** dims.m * norm(w, norm_kind) ** dims.n


# -- matrices ---------------------------------------------------------------

def shape(mat) -> tuple[int, int]:
    return len(mat), (len(mat[0]) if mat else 0)


def identity(d: int):
    return [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]


def transpose(mat):
    return [list(col) for col in zip(*mat)]


def matmul(a, b):
    bt = transpose(b)
    return [[_dot(row, col) for col in bt] for row in a]


def matvec(a, v):
    return [_dot(row, v) for row in a]


def _dot(u, v):
    total = Fraction(0)
    for x, y in zip(u, v):
        if _is_exact_zero(x):
            continue
        total = total + x * y
    return total


dot = _dot


def _is_exact_zero(x) -> bool:
    return not isinstance(x, BigReal) and x == 0


def _pivot_row(mat, col, start):
    best, best_size = None, None
    for r in range(start, len(mat)):
        x = mat[r][col]
        if isinstance(x, BigReal):
            if sc.may_be_zero(x):
                continue
            size = abs(float(x.mid))
        else:
            if x == 0:
                continue
            return r
        if best is None or size > best_size:
            best, best_size = r, size
    return best


def det(mat):
    """Determinant by Gaussian elimination (exact for exact entries)."""
    a = [list(r) for r in mat]
    n = len(a)
    sign = 1
    result = Fraction(1)
    for c in range(n):
        p = _pivot_row(a, c, c)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            sign = -sign
        piv = a[c][c]
        result = result * piv
        for r in range(c + 1, n):
            if _is_exact_zero(a[r][c]):
                continue
            f = a[r][c] / piv
            a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return result if sign > 0 else -result


def inverse(mat):
    """Gauss-Jordan inverse; raises ``ZeroDivisionError`` for singular input."""
    n = len(mat)
    a = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(mat)]
    for c in range(n):
        p = _pivot_row(a, c, c)
        if p is None:
            raise ZeroDivisionError("singular matrix")
        a[c], a[p] = a[p], a[c]
        piv = a[c][c]
        a[c] = [x / piv for x in a[c]]
        for r in range(n):
            if r != c and not _is_exact_zero(a[r][c]):
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [r[n:] for r in a]


def rank(vectors) -> int:
    """Rank of a list of exact vectors."""
    rows = [list(map(Fraction, v)) if all(isinstance(x, (int, Fraction)) for x in v) else list(v) for v in vectors]
    if not rows:
        return 0
    r = 0
    ncols = len(rows[0])
    for c in range(ncols):
        p = _pivot_row(rows, c, r)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        for i in range(r + 1, len(rows)):
            if not _is_exact_zero(rows[i][c]):
                f = rows[i][c] / rows[r][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        r += 1
        if r == len(rows):
            break
    return r


def parse_matrix(data):
    """Matrix from nested lists of scalar literals (rows)."""
    mat = [[sc.parse_scalar(x) for x in row] for row in data]
    if not mat or any(len(r) != len(mat[0]) for r in mat):
        raise ValueError("matrix rows must be nonempty and of equal length")
    return mat


def parse_vector(data):
    return [sc.parse_scalar(x) for x in data]


def to_float_matrix(mat):
    import numpy as np

    return np.array([[sc.to_float(x) for x in row] for row in mat], dtype=float)


def to_mp_matrix(mat):
    import mpmath

    return mpmath.matrix([[sc.to_mpf(x) for x in row] for row in mat])


# -- lattices and grids -----------------------------------------------------

@dataclass(frozen=True)
class LatticeBasis:
    """Lattice generated by the columns of ``matrix`` (d x d, row-major)."""

    dims: Dims
    matrix: tuple
    unimodular: bool = False
    det: object = field(default=None, compare=False)

    def __post_init__(self):
        mat = tuple(tuple(r) for r in self.matrix)
        d = self.dims.d
        if len(mat) != d or any(len(r) != d for r in mat):
            raise ValueError(f"basis must be {d}x{d}")
        object.__setattr__(self, "matrix", mat)
        D = det(mat) if self.det is None else self.det
        if sc.is_zero(D) or (not isinstance(D, BigReal) and D == 0):
            raise ValueError("basis is singular")
        object.__setattr__(self, "det", D)
        if self.unimodular:
            if isinstance(D, BigReal):
                if not abs(D).contains(1) and not (abs(D) - 1).contains(0):
                    raise ValueError("basis flagged unimodular but |det| != 1")
            elif abs(D) != 1:
                raise ValueError("basis flagged unimodular but |det| != 1")

    @property
    def d(self) -> int:
        return self.dims.d

    def columns(self):
        return [list(c) for c in zip(*self.matrix)]

    def point(self, coeffs):
        return matvec(self.matrix, coeffs)

    def rows(self):
        return [list(r) for r in self.matrix]


def lattice_from_matrix(A, dims: Dims | None = None) -> LatticeBasis:
    """Basis ``[[I_m, A], [0, I_n]]`` of the lattice attached to an m x n matrix."""
    m = len(A)
    n = len(A[0]) if m else 0
    if dims is None:
        dims = Dims(m, n)
    if (m, n) != (dims.m, dims.n) or any(len(r) != n for r in A):
        raise ValueError(f"A must have shape ({dims.m}, {dims.n})")
    d = dims.d
    mat = []
    for i in range(d):
        row = []
        for j in range(d):
            if i < m and j >= m:
                row.append(A[i][j - m])
            else:
                row.append(Fraction(int(i == j)))
        mat.append(row)
    return LatticeBasis(dims, mat, unimodular=True, det=Fraction(1))


def dual_basis(b: LatticeBasis) -> LatticeBasis:
    """Inverse transpose: the basis of the dual lattice."""
    inv = inverse([list(r) for r in b.matrix])
    D = 1 / b.det
    return LatticeBasis(b.dims, transpose(inv), unimodular=b.unimodular, det=D)


def _round_half_to_zero(x) -> int:
    k = math.floor(x) if not isinstance(x, BigReal) else int(sc.mpmath.floor(x.mid))
    frac = x - k
    c = scmp(frac, Fraction(1, 2))
    if c < 0:
        return k
    if c > 0:
        return k + 1
    return k if k >= 0 else k + 1


@dataclass(frozen=True)
class Grid:
    """Translate ``basis * Z^d + shift``."""

    basis: LatticeBasis
    shift: tuple

    def __post_init__(self):
        s = tuple(self.shift)
        if len(s) != self.basis.d:
            raise ValueError("shift has wrong length")
        object.__setattr__(self, "shift", s)

    @property
    def dims(self) -> Dims:
        return self.basis.dims

    def point(self, coeffs):
        return [x + s for x, s in zip(self.basis.point(coeffs), self.shift)]

    def canonical(self) -> Grid:
        """Shift reduced against the basis by rounding coordinates (ties toward zero)."""
        inv = inverse([list(r) for r in self.basis.matrix])
        coords = matvec(inv, list(self.shift))
        k = [_round_half_to_zero(c) for c in coords]
        red = [s - x for s, x in zip(self.shift, self.basis.point(k))]
        return Grid(self.basis, tuple(red))

    def same_grid(self, other: Grid) -> bool:
        if self.basis.matrix != other.basis.matrix:
            return False
        a, b = self.canonical().shift, other.canonical().shift
        return all(scmp(x, y) == 0 for x, y in zip(a, b))


def flow_factors(t, dims: Dims, exp_t=None):
    """Scale factors ``(e^{nt}, e^{-mt})``; ``exp_t`` supplies ``e^t`` exactly."""
    if exp_t is not None:
        et = sc.parse_scalar(exp_t)
        if isinstance(et, int):
            et = Fraction(et)
        return et ** dims.n, et ** (-dims.m)
    t = sc.parse_scalar(t) if isinstance(t, str) else t
    if sc.is_exact(t) and t == 0:
        return Fraction(1), Fraction(1)
    return sc.exp(dims.n * t), sc.exp(-dims.m * t)


def apply_flow(t, target, dims: Dims, exp_t=None):
    """Apply ``diag(e^{nt} I_m, e^{-mt} I_n)`` to a vector, basis or grid."""
    up, down = flow_factors(t, dims, exp_t)

    def scale_vec(v):
        v = list(v)
        if len(v) != dims.d:
            raise ValueError(f"expected dimension {dims.d}")
        return [x * up if i < dims.m else x * down for i, x in enumerate(v)]

    if isinstance(target, LatticeBasis):
        rows = [[x * (up if i < dims.m else down) for x in row] for i, row in enumerate(target.matrix)]
        return LatticeBasis(dims, rows, unimodular=False, det=target.det * up ** dims.m * down ** dims.n)
    if isinstance(target, Grid):
        return Grid(apply_flow(t, target.basis, dims, exp_t), tuple(scale_vec(target.shift)))
    return scale_vec(target)
