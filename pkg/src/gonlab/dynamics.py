"""Diagnostics along the diagonal flow.

Systoles of flowed lattices, weights of the flow on exterior powers, norms of
flowed rational subspaces, value sets of the product form on grids, Fourier
coefficients of pushed measures on tori, character survival, the relation
harvest behind the coset reduction, and tail spans of subspace sequences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from itertools import combinations, product

import mpmath
import numpy as np

from .core import scalar as sc
from .core.intlat import (
    EnumerationCapExceeded,
    complete_primitive,
    enumerate_short,
    hnf_rows,
    int_det,
    int_inverse,
    integer_kernel,
    lll_gram,
)
from .core.linalg import (
    Dims,
    Grid,
    LatticeBasis,
    MultiIndex,
    apply_flow,
    det,
    f_value,
    flow_factors,
    matvec,
    multi_indices,
    scmp,
    sup_norm,
    transpose,
)

DIVERGING = "diverging"
RECURRENT = "recurrent"
INCONCLUSIVE = "inconclusive"


# -- systoles -----------------------------------------------------------------

@dataclass
class SystolePoint:
    t: object
    systole: object
    coefficients: tuple
    vector: tuple


@dataclass
class SystoleCurve:
    points: list
    trend: str
    window_ratio: float | None

    def rows(self, digits: int = 12) -> list[dict]:
        return [
            {
                "t": sc.decimal(p.t, digits),
                "systole": sc.decimal(p.systole, digits),
                "witness": " ".join(map(str, p.coefficients)),
            }
            for p in self.points
        ]


def shortest_vector(basis: LatticeBasis, cap: int = 200_000) -> tuple:
    """Shortest nonzero sup-norm vector: ``(length, coefficients, vector)``."""
    d = basis.d
    B = mpmath.matrix([[sc.to_mpf(x) for x in row] for row in basis.matrix])
    gram = B.T * B
    _, U = lll_gram(gram)
    # the LLL-reduced generators bound the sup-norm minimum from above
    best = None
    for j in range(d):
        c = [U[i][j] for i in range(d)]
        v = basis.point(c)
        s = sup_norm(v)
        if best is None or scmp(s, best) < 0:
            best = s
    radius = sc.to_mpf(best) * mpmath.sqrt(d) * (1 + mpmath.mpf(2) ** -40)
    cands = []
    for c in enumerate_short(gram, radius, cap=cap):
        c = c if next(x for x in c if x) > 0 else tuple(-x for x in c)
        v = basis.point(c)
        cands.append((sup_norm(v), c, v))
    if not cands:
        raise EnumerationCapExceeded(cap, "systole search found no vector")

    def key(a, b):
        r = scmp(a[0], b[0])
        if r:
            return r
        ka, kb = (sum(map(abs, a[1])), a[1]), (sum(map(abs, b[1])), b[1])
        return (ka > kb) - (ka < kb)

    length, c, v = min(cands, key=cmp_to_key(key))
    return length, tuple(c), tuple(v)


def classify_trend(values, window: float = 0.2) -> tuple[str, float | None]:
    """Compare the minimum over the last window with the first window."""
    vals = [sc.to_float(v) for v in values]
    if len(vals) < 2:
        return INCONCLUSIVE, None
    w = max(1, int(round(window * len(vals))))
    first, last = min(vals[:w]), min(vals[-w:])
    if first <= 0:
        return INCONCLUSIVE, None
    ratio = last / first
    if ratio <= 0.25:
        return DIVERGING, ratio
    if ratio >= 0.5:
        return RECURRENT, ratio
    return INCONCLUSIVE, ratio


def systole_curve(x: LatticeBasis, t_grid, dims: Dims | None = None, cap: int = 200_000) -> SystoleCurve:
    """Shortest vector of ``h_t x`` for each ``t`` with a trend verdict."""
    dims = dims or x.dims
    pts = []
    for t in t_grid:
        xt = apply_flow(t, x, dims)
        length, c, v = shortest_vector(xt, cap=cap)
        pts.append(SystolePoint(t, length, c, v))
    trend, ratio = classify_trend([p.systole for p in pts])
    return SystoleCurve(pts, trend, ratio)


# -- weights on exterior powers -----------------------------------------------

@dataclass
class WedgeWeightTable:
    dims: Dims
    k: int
    rows: list  # (MultiIndex, exponent)

    @property
    def zero_rows(self) -> list:
        return [I for I, e in self.rows if e == 0]

    @property
    def has_zero(self) -> bool:
        return bool(self.zero_rows)


def index_weight(I, dims: Dims) -> int:
    idx = I.indices if isinstance(I, MultiIndex) else tuple(I)
    return sum(dims.n if i <= dims.m else -dims.m for i in idx)


def wedge_weights(dims: Dims, k: int) -> WedgeWeightTable:
    """Exponents of the flow on ``e_I`` for every ``I`` of size ``k``."""
    return WedgeWeightTable(dims, k, [(I, index_weight(I, dims)) for I in multi_indices(dims.d, k)])


# -- rational subspaces -------------------------------------------------------

def _integer_rows(vectors) -> list[tuple[int, ...]]:
    out = []
    for v in vectors:
        v = [Fraction(sc.parse_scalar(x)) if not isinstance(x, (int, Fraction)) else Fraction(x) for x in v]
        den = 1
        for x in v:
            den = den * x.denominator // math.gcd(den, x.denominator)
        out.append(tuple(int(x * den) for x in v))
    return out


@dataclass(frozen=True)
class RationalSubspace:
    """Subspace of ``R^d`` spanned by rational vectors.

    Stored as the Hermite basis of its integer points, which is canonical.
    """

    ambient: int
    basis: tuple

    def __post_init__(self):
        rows = _integer_rows(self.basis)
        if any(len(r) != self.ambient for r in rows):
            raise ValueError("basis vectors must have the ambient dimension")
        orth = integer_kernel(rows, length=self.ambient)
        sat = integer_kernel(orth, length=self.ambient) if orth else [
            tuple(int(i == j) for j in range(self.ambient)) for i in range(self.ambient)
        ]
        object.__setattr__(self, "basis", tuple(sat))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, v) -> bool:
        return RationalSubspace(self.ambient, list(self.basis) + [tuple(v)]).dim == self.dim

    def contains_subspace(self, other: RationalSubspace) -> bool:
        return all(self.contains(v) for v in other.basis)

    def annihilator(self) -> list[tuple[int, ...]]:
        return integer_kernel(self.basis, length=self.ambient) if self.basis else [
            tuple(int(i == j) for j in range(self.ambient)) for i in range(self.ambient)
        ]

    def __str__(self):
        return "span(" + ", ".join("(" + ",".join(map(str, b)) + ")" for b in self.basis) + ")"


def span_of(subspaces, ambient: int) -> RationalSubspace:
    rows = [b for U in subspaces for b in U.basis]
    return RationalSubspace(ambient, rows)


# -- flowed subspaces ---------------------------------------------------------

@dataclass
class SubspaceFlowReport:
    t_grid: list
    norms: list
    classification: str  # "to-infinity", "to-zero", "mixed"
    mechanism: str  # predicted by the largest weight among nonzero coordinates
    top_weight: int
    bug: bool


def plucker(basis_rows, d: int) -> dict:
    """Nonzero ``k x k`` minors of the basis, keyed by the column index set."""
    k = len(basis_rows)
    out = {}
    for cols in combinations(range(d), k):
        m = det([[Fraction(row[c]) for c in cols] for row in basis_rows])
        if m != 0:
            out[MultiIndex(tuple(c + 1 for c in cols))] = m
    return out


def subspace_flow_norm(U: RationalSubspace, t_grid, dims: Dims) -> SubspaceFlowReport:
    """Euclidean norm of the flowed wedge of ``U``'s integer basis."""
    if not 0 < U.dim < dims.d:
        raise ValueError("U must be a nontrivial proper subspace")
    coords = plucker(U.basis, dims.d)
    weights = {I: index_weight(I, dims) for I in coords}
    norms = []
    ts = list(t_grid)
    for t in ts:
        tm = sc.to_mpf(t)
        s = mpmath.mpf(0)
        for I, c in coords.items():
            s += sc.to_mpf(c) ** 2 * mpmath.exp(2 * weights[I] * tm)
        norms.append(mpmath.sqrt(s))
    top = max(weights.values())
    mechanism = "to-infinity" if top > 0 else ("to-zero" if top < 0 else "constant")
    ratio = norms[-1] / norms[0] if len(norms) > 1 else mpmath.mpf(1)
    if ratio > 10:
        cls = "to-infinity"
    elif ratio < mpmath.mpf(1) / 10:
        cls = "to-zero"
    else:
        cls = "mixed"
    bug = math.gcd(dims.m, dims.n) == 1 and (cls == "mixed" or mechanism == "constant")
    return SubspaceFlowReport(ts, norms, cls, mechanism, top, bug)


# -- value sets ---------------------------------------------------------------

@dataclass
class DVReport:
    count: int
    infimum: object
    witness: tuple
    window: object
    bins: int
    coverage: float  # fraction of bins of [0, window] that contain a value
    max_gap: float  # largest gap between consecutive values inside [0, window]


@dataclass
class ValueSample:
    values: list  # sorted distinct values
    report: DVReport


def _scalar_sort(values):
    return sorted(values, key=cmp_to_key(scmp))


def value_set_sample(y: Grid, Q: int, dims: Dims | None = None, window=1, bins: int = 100, cap: int = 2_000_000):
    """Values of ``F`` on all points ``basis * c + shift`` with ``|c| <= Q``."""
    dims = dims or y.dims
    Q = int(Q)
    if Q < 0:
        raise ValueError("Q must be nonnegative")
    total = (2 * Q + 1) ** dims.d
    if total > cap:
        raise EnumerationCapExceeded(cap, "value set sample")
    vals = {}
    best, best_c = None, None
    for c in product(range(-Q, Q + 1), repeat=dims.d):
        v = f_value(y.point(c), dims)
        key = v if sc.is_exact(v) else sc.to_float(v)
        if key not in vals:
            vals[key] = v
        if best is None or scmp(v, best) < 0:
            best, best_c = v, c
    ordered = _scalar_sort(vals.values())
    wf = sc.to_float(window)
    inside = sorted(sc.to_float(v) for v in ordered if sc.to_float(v) <= wf)
    hit = {min(int(x / wf * bins), bins - 1) for x in inside}
    pts = [0.0] + inside + [wf]
    gap = max(b - a for a, b in zip(pts, pts[1:]))
    rep = DVReport(len(ordered), best, tuple(best_c), window, bins, len(hit) / bins, gap)
    return ValueSample(ordered, rep)


@dataclass
class FloorCheck:
    d: int
    splits: list  # (m, n) pairs tested
    bound: Fraction
    minimum: Fraction
    argmin: tuple
    checked: int
    passed: bool


def nondegeneracy_floor_check(d: int, Q: int = 1000, extra_samples: int = 200, seed: int = 0) -> FloorCheck:
    """Product-form values on ``Z^d + 1/2`` translated by ``{v_1 = 0, w_n = 0}``.

    Only the first and last coordinates are confined to ``Z + 1/2``; the
    others range over ``R``.  For fixed first and last coordinates the value
    is smallest when the free coordinates vanish, so the pairs with
    ``|coefficient| <= Q`` are enumerated exhaustively (in exact integer
    arithmetic on doubled coordinates) and random rational fillings of the
    free coordinates are checked on top.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    bound = Fraction(1, 2**d)
    odd = np.arange(-2 * Q - 1, 2 * Q + 2, 2, dtype=np.int64)
    a = np.abs(odd)
    best, arg, checked = None, None, 0
    splits = [(m, d - m) for m in range(1, d)]
    for m, n in splits:
        # doubled values: (2|v_1|)^m (2|w_n|)^n, an odd integer >= 1
        table = np.multiply.outer(a**m, a**n)
        i, j = np.unravel_index(int(np.argmin(table)), table.shape)
        val = Fraction(int(table[i, j]), 2**d)
        checked += table.size
        if best is None or val < best:
            best, arg = val, (m, n, Fraction(int(odd[i]), 2), Fraction(int(odd[j]), 2))
    rng = np.random.default_rng(seed)
    for m, n in splits:
        dims = Dims(m, n)
        for _ in range(extra_samples):
            u = [Fraction(int(x), 8) for x in rng.integers(-80, 81, size=d)]
            u[0] = Fraction(2 * int(rng.integers(-Q, Q + 1)) + 1, 2)
            u[-1] = Fraction(2 * int(rng.integers(-Q, Q + 1)) + 1, 2)
            v = f_value(u, dims)
            checked += 1
            if v < best:
                best, arg = v, (m, n, u[0], u[-1])
    return FloorCheck(d, splits, bound, best, arg, checked, best >= bound)


# -- Fourier coefficients of pushed measures -----------------------------------

@dataclass(frozen=True)
class LineMeasure:
    """Uniform measure on ``{w + s u : 0 <= s <= 1}``."""

    base: tuple
    direction: tuple

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(self.base))
        object.__setattr__(self, "direction", tuple(self.direction))
        if len(self.base) != len(self.direction):
            raise ValueError("base and direction must have equal length")
        if all(sc.is_exact(x) and x == 0 for x in self.direction):
            raise ValueError("direction must be nonzero")


@dataclass
class FourierCoefficient:
    value: complex
    error: float  # bound on |computed - true|
    decided: bool  # True when the value is exact (0 or 1, or closed form at exact input)


class NotDualVector(ValueError):
    pass


def _map_matrix(map_, d: int, dims: Dims | None):
    if isinstance(map_, (list, tuple)) and map_ and isinstance(map_[0], (list, tuple)):
        return [list(r) for r in map_]
    if dims is None:
        raise ValueError("dims are required when the map is a flow time")
    up, down = flow_factors(map_, dims)
    return [[(up if i < dims.m else down) if i == j else Fraction(0) for j in range(d)] for i in range(d)]


def _check_dual(b, target: LatticeBasis | None):
    d = len(b)
    if target is None:
        ok = all(sc.is_exact(x) and Fraction(x).denominator == 1 for x in b if not hasattr(x, "D"))
        ok = ok and all(not hasattr(x, "D") for x in b)
    else:
        pairs = [sum((x * y for x, y in zip(b, col)), Fraction(0)) for col in target.columns()]
        ok = all(sc.is_exact(p) and not hasattr(p, "D") and Fraction(p).denominator == 1 for p in pairs)
    if not ok:
        raise NotDualVector(f"{tuple(map(sc.render, b))} is not in the dual lattice of the target")


def _phase_factor(c):
    """``(e^{2 pi i c} - 1) / (2 pi i c)`` with its limit 1 at ``c = 0``."""
    if mpmath.almosteq(c, 0, 1e-60):
        return mpmath.mpc(1)
    z = 2j * mpmath.pi * c
    return (mpmath.exp(z) - 1) / z


def _radius(x) -> float:
    return float(x.radius) if isinstance(x, sc.BigReal) else 0.0


def pushforward_fourier(measure, map_, b, dims: Dims | None = None, source: LatticeBasis | None = None,
                        target: LatticeBasis | None = None) -> FourierCoefficient:
    """Fourier coefficient at ``b`` of a measure pushed by a linear map.

    ``measure`` is a :class:`LineMeasure` or ``"haar-fundamental-domain"``
    (Haar measure on the fundamental parallelepiped of ``source``, default
    ``Z^d``).  ``map_`` is a flow time (with ``dims``) or a matrix.  The target
    torus is ``R^d / target`` (default ``Z^d``) and ``b`` must lie in its dual.
    """
    b = list(b)
    d = len(b)
    _check_dual(b, target)
    M = _map_matrix(map_, d, dims)
    Mt_b = matvec(transpose(M), b)
    if all(sc.is_exact(x) and x == 0 for x in b):
        return FourierCoefficient(1, 0.0, True)
    if isinstance(measure, LineMeasure):
        cu = sum((x * y for x, y in zip(Mt_b, measure.direction)), Fraction(0))
        cw = sum((x * y for x, y in zip(Mt_b, measure.base)), Fraction(0))
        val = mpmath.exp(2j * mpmath.pi * sc.to_mpf(cw)) * _phase_factor(sc.to_mpf(cu))
        err = 4 * math.pi * (_radius(cu) + _radius(cw)) + 1e-60
        exact = sc.is_exact(cu) and sc.is_exact(cw)
        if isinstance(cu, (int, Fraction)) and cu != 0 and Fraction(cu).denominator == 1:
            return FourierCoefficient(0, 0.0, True)
        return FourierCoefficient(complex(val), 0.0 if exact else err, exact)
    if measure != "haar-fundamental-domain":
        raise ValueError(f"unknown measure {measure!r}")
    X = [list(r) for r in source.matrix] if source is not None else [
        [Fraction(int(i == j)) for j in range(d)] for i in range(d)
    ]
    c = matvec(transpose(X), Mt_b)
    if all(sc.is_exact(x) and not hasattr(x, "D") for x in c):
        c = [Fraction(x) for x in c]
        if all(x.denominator == 1 for x in c):
            return FourierCoefficient(1 if all(x == 0 for x in c) else 0, 0.0, True)
    val = mpmath.mpc(1)
    err = 0.0
    for x in c:
        val *= _phase_factor(sc.to_mpf(x))
        err += 4 * math.pi * _radius(x)
    return FourierCoefficient(complex(val), err + 1e-60, False)


# -- character survival -------------------------------------------------------

@dataclass
class SurvivalReport:
    vector: tuple
    is_zero: bool


def character_survival(t, a, b, dims: Dims) -> SurvivalReport:
    """``h_t^T b + a`` and whether it vanishes."""
    up, down = flow_factors(t, dims)
    v = tuple((x * up if i < dims.m else x * down) + y for i, (x, y) in enumerate(zip(b, a)))
    zero = all(sc.is_zero(x) if isinstance(x, sc.BigReal) else x == 0 for x in v)
    return SurvivalReport(v, zero)


@dataclass
class SurvivalTrend:
    t_grid: list
    expanding: list  # norm of the first-block part of h_t^T b
    contracting: list  # norm of the second-block part
    direction: str  # "grows" when the first block of b is nonzero, else "decays"
    monotone: bool
    exit_time: object  # first t with |h_t^T b| outside [lo, hi], or None


def survival_trend(b, dims: Dims, t_grid, lo=1e-6, hi=1e6) -> SurvivalTrend:
    """Per-block norms of ``h_t^T b`` along a grid and the first exit time."""
    if all(x == 0 for x in b):
        raise ValueError("b must be nonzero")
    bv = [sc.to_mpf(x) for x in b[: dims.m]]
    bw = [sc.to_mpf(x) for x in b[dims.m :]]
    nv = max(abs(x) for x in bv)
    nw = max(abs(x) for x in bw)
    ex, co, exit_t = [], [], None
    for t in t_grid:
        tm = sc.to_mpf(t)
        e = nv * mpmath.exp(dims.n * tm)
        c = nw * mpmath.exp(-dims.m * tm)
        ex.append(e)
        co.append(c)
        total = max(e, c)
        if exit_t is None and (total > hi or total < lo):
            exit_t = t
    direction = "grows" if nv > 0 else "decays"
    mono = all(x <= y for x, y in zip(ex, ex[1:])) and all(x >= y for x, y in zip(co, co[1:]))
    if direction == "grows":
        mono = mono and (nv == 0 or ex[-1] > ex[0])
    else:
        mono = mono and co[-1] < co[0]
    return SurvivalTrend(list(t_grid), ex, co, direction, mono, exit_t)


# -- relation harvest and unimodular reduction ---------------------------------

@dataclass
class CosetExtraction:
    relations: list  # Hermite basis of {(b, a) : b . gamma_l + a = 0 for all l}
    rank: int
    gamma: list  # unimodular q x q matrix
    residual: list  # first q - r coordinates of gamma * gamma_l
    constants: tuple  # last r coordinates of gamma * gamma_l (the same for every l)
    subtorus: RationalSubspace  # the kernel of every relation's b-part


def complete_sublattice(rows, q: int) -> list[list[int]]:
    """Matrix in ``SL_q(Z)`` whose last ``len(rows)`` rows span the saturated
    lattice spanned by ``rows``, by layering unimodular completions."""
    rows = [list(map(int, r)) for r in rows]
    r = len(rows)
    if r == 0:
        return [[int(i == j) for j in range(q)] for i in range(q)]
    last = rows[-1]
    g = complete_primitive(last)
    if q == 1:
        return g
    if int_det(g) != 1:
        g[0] = [-x for x in g[0]]
    ginv = int_inverse(g)
    coeffs = [[sum(x * ginv[i][j] for i, x in enumerate(s)) for j in range(q)] for s in rows[:-1]]
    inner = complete_sublattice(hnf_rows([c[: q - 1] for c in coeffs]) if coeffs else [], q - 1)
    block = [row + [0] for row in inner] + [[0] * (q - 1) + [1]]
    return [[sum(block[i][k] * g[k][j] for k in range(q)) for j in range(q)] for i in range(q)]


def coset_extract(gammas, tail_start: int = 0) -> CosetExtraction:
    """Harvest integer relations satisfied by every tail vector and move them
    to the last coordinates by a unimodular change of basis."""
    gs = [tuple(map(int, g)) for g in gammas]
    if len(gs) < 2:
        raise ValueError("need at least two vectors")
    q = len(gs[0])
    if any(len(g) != q for g in gs):
        raise ValueError("vectors must have equal length")
    tail = gs[tail_start:]
    if not tail:
        raise ValueError("tail is empty")
    relations = integer_kernel([g + (1,) for g in tail], length=q + 1)
    r = len(relations)
    b_parts = [rel[:q] for rel in relations]
    orth = integer_kernel(b_parts, length=q) if b_parts else [tuple(int(i == j) for j in range(q)) for i in range(q)]
    sat = integer_kernel(orth, length=q) if orth else [tuple(int(i == j) for j in range(q)) for i in range(q)]
    gamma = complete_sublattice(sat, q)
    images = [[sum(gamma[i][j] * g[j] for j in range(q)) for i in range(q)] for g in tail]
    consts = tuple(images[0][q - r :]) if r else ()
    if any(tuple(im[q - r :]) != consts for im in images):
        raise AssertionError("relations do not give constant coordinates")
    residual = [tuple(im[: q - r]) for im in images]
    subtorus = RationalSubspace(q, orth)
    return CosetExtraction(relations, r, gamma, residual, consts, subtorus)


# -- tail spans ---------------------------------------------------------------

@dataclass
class TailSpan:
    limit: RationalSubspace
    stabilization_index: int
    limit_dim: int
    limsup_dim: int
    spans: list  # dimension of span(V_l : l >= j) for each admissible j


def tail_span_limit(subspaces, min_tail: int = 2) -> TailSpan:
    """Smallest span containing every tail of at least ``min_tail`` elements.

    The descending spans ``U_j = span(V_j, V_{j+1}, ...)`` are computed for
    every ``j`` that leaves ``min_tail`` elements; the limit is the last one
    and the stabilization index the first ``j`` where ``U_j`` equals it.
    """
    Vs = list(subspaces)
    if not Vs:
        raise ValueError("empty list")
    d = Vs[0].ambient
    if any(V.ambient != d for V in Vs):
        raise ValueError("subspaces must share the ambient dimension")
    tail = min(max(1, min_tail), len(Vs))
    last_j = len(Vs) - tail
    spans = []
    acc = span_of(Vs[last_j + 1 :], d) if last_j + 1 < len(Vs) else RationalSubspace(d, [])
    for j in range(last_j, -1, -1):
        acc = span_of([acc, Vs[j]], d)
        spans.append(acc)
    spans.reverse()
    limit = spans[-1]
    j0 = next(j for j, U in enumerate(spans) if U == limit)
    limsup = max(V.dim for V in Vs[j0:])
    return TailSpan(limit, j0, limit.dim, limsup, [U.dim for U in spans])
