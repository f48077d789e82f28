"""Successive minima of symmetric parallelepipeds and log-minima profiles.

A body is a list of linear forms ``f_i`` with positive bounds ``b_i``:
``{z : |f_i . z| <= b_i for all i}``.  Its gauge is ``max_i |f_i . z| / b_i``
and ``lambda_j`` is the smallest gauge level that contains ``j`` linearly
independent integer vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key

import mpmath
import numpy as np

from .core import scalar as sc
from .core.intlat import EnumerationCapExceeded, enumerate_short, exact_rank
from .core.linalg import det, scmp

MAX_DIM = 6


class MinimaFailure(RuntimeError):
    """Enumeration could not certify all minima within the growth limit."""


@dataclass(frozen=True)
class Parallelepiped:
    """Symmetric body cut out by ``|f . z| <= bound`` for each form."""

    forms: tuple

    def __post_init__(self):
        forms = tuple((tuple(f), b) for f, b in self.forms)
        if not forms:
            raise ValueError("a body needs at least one form")
        d = len(forms[0][0])
        if any(len(f) != d for f, _ in forms):
            raise ValueError("forms must have equal length")
        if d > MAX_DIM:
            raise ValueError(f"dimension {d} exceeds the cap {MAX_DIM}")
        for _, b in forms:
            if not sc.sign(b) > 0:
                raise ValueError("bounds must be positive")
        object.__setattr__(self, "forms", forms)
        if _float_rank([f for f, _ in forms]) < d:
            raise ValueError("forms do not span the space; the body is unbounded")

    @property
    def d(self) -> int:
        return len(self.forms[0][0])

    def gauge(self, z):
        vals = []
        for f, b in self.forms:
            s = sum((c * int(x) for c, x in zip(f, z) if x), Fraction(0))
            vals.append(abs(s) / b)
        return sc.smax(vals)

    def scaled(self, s) -> Parallelepiped:
        """The dilate ``s * body``."""
        return Parallelepiped(tuple((f, b * s) for f, b in self.forms))

    def gram(self):
        rows = [[sc.to_mpf(c) / sc.to_mpf(b) for c in f] for f, b in self.forms]
        G = mpmath.matrix(rows)
        return G.T * G

    def volume(self):
        """Exact when there are exactly ``d`` forms, otherwise a tight interval."""
        d = self.d
        if len(self.forms) == d:
            D = det([list(f) for f, _ in self.forms])
            prod = Fraction(2) ** d
            for _, b in self.forms:
                prod = prod * b
            return prod / abs(D)
        return _polytope_volume(self)


def _float_rank(vectors) -> int:
    arr = np.array([[sc.to_float(x) for x in v] for v in vectors])
    return int(np.linalg.matrix_rank(arr))


def _polytope_volume(body: Parallelepiped):
    from scipy.spatial import ConvexHull, HalfspaceIntersection

    hs = []
    for f, b in body.forms:
        fv = [sc.to_float(x) for x in f]
        bv = sc.to_float(b)
        hs.append(fv + [-bv])
        hs.append([-x for x in fv] + [-bv])
    hi = HalfspaceIntersection(np.array(hs), np.zeros(body.d))
    vol = ConvexHull(hi.intersections).volume
    rad = abs(vol) * 1e-9
    return sc.BigReal([mpmath.mpf(vol) - rad, mpmath.mpf(vol) + rad])


def unit_cube(d: int) -> Parallelepiped:
    return Parallelepiped(tuple((tuple(Fraction(int(i == j)) for j in range(d)), Fraction(1)) for i in range(d)))


def log_body(A, Q) -> Parallelepiped:
    """``{(q, p) : |(q, p)| <= 1, |Aq + p| <= 1/Q}`` in ``R^{n+m}``."""
    m, n = len(A), len(A[0])
    d = m + n
    forms = [(tuple(Fraction(int(i == j)) for j in range(d)), Fraction(1)) for i in range(d)]
    for i in range(m):
        f = tuple(list(A[i]) + [Fraction(int(k == i)) for k in range(m)])
        forms.append((f, Fraction(1) / Q))
    return Parallelepiped(tuple(forms))


def theta_body(theta, Q) -> Parallelepiped:
    """``{v in R^3 : |v| <= 1, |v1 theta1 + v2 theta2 + v3| <= 1/Q}``."""
    return log_body([list(theta)], Q)


def approximation_body(A, M_next, zeta) -> Parallelepiped:
    """``{(q, p) : |q| < M_next, |Aq - p| < zeta}`` (closure; the minima agree)."""
    m, n = len(A), len(A[0])
    d = m + n
    forms = [(tuple(Fraction(int(i == j)) for j in range(d)), Fraction(M_next)) for i in range(n)]
    for i in range(m):
        f = tuple(list(A[i]) + [Fraction(-int(k == i)) for k in range(m)])
        forms.append((f, zeta))
    return Parallelepiped(tuple(forms))


@dataclass
class Minima:
    lambdas: list
    witnesses: list
    radius_used: object


def _key_cmp(a, b):
    c = scmp(a[0], b[0])
    if c:
        return c
    ka = (sum(abs(x) for x in a[1]), tuple(-x for x in a[1]))
    kb = (sum(abs(x) for x in b[1]), tuple(-x for x in b[1]))
    return (ka > kb) - (ka < kb)


def _normalize(z):
    for x in z:
        if x:
            return tuple(z) if x > 0 else tuple(-v for v in z)
    return tuple(z)


def _float_screen(body: Parallelepiped, pts, R: float) -> list:
    """Drop points whose gauge certainly exceeds ``R``; a generous rounding
    allowance keeps every point the exact test could accept."""
    if not pts:
        return []
    P = np.array(pts, dtype=float)
    F = np.array([[sc.to_float(c) / sc.to_float(b) for c in f] for f, b in body.forms])
    G = np.abs(P @ F.T)
    slack = (np.abs(P) @ np.abs(F).T) * 1e-12 + 1e-300
    keep = ((G - slack) <= R).all(axis=1)
    return [z for z, k in zip(pts, keep) if k]


def body_minima(body: Parallelepiped, radius_hint=None, cap: int = 500_000, growth_limit: int = 60) -> Minima:
    """Successive minima with independent integer witnesses."""
    d = body.d
    gram = body.gram()
    if radius_hint is None:
        vol = sc.to_float(body.volume())
        R = max((2.0**d / vol) ** (1.0 / d), 1e-6) if vol > 0 else 1.0
    else:
        R = float(sc.to_float(radius_hint))
    k = len(body.forms)
    for _ in range(growth_limit):
        try:
            pts = enumerate_short(gram, mpmath.mpf(R) * mpmath.sqrt(k), cap=cap)
        except EnumerationCapExceeded as exc:
            raise MinimaFailure(f"enumeration cap {cap} exceeded at radius {R:g}") from exc
        cand = {}
        for z in _float_screen(body, pts, R):
            z = _normalize(z)
            if z not in cand:
                cand[z] = body.gauge(z)
        inside = [(g, z) for z, g in cand.items() if scmp(g, R) <= 0 or sc.to_float(g) <= R]
        inside.sort(key=cmp_to_key(_key_cmp))
        chosen, lams = [], []
        for g, z in inside:
            if exact_rank(chosen + [z]) > len(chosen):
                chosen.append(z)
                lams.append(g)
                if len(chosen) == d:
                    break
        if len(chosen) == d and scmp(lams[-1], R) <= 0:
            return Minima(lams, chosen, R)
        R *= 2
    raise MinimaFailure(f"growth limit reached (last radius {R:g}, cap {cap})")


@dataclass
class MinkowskiReport:
    product: object
    lower: Fraction
    upper: Fraction
    passed: bool


def minkowski_audit(body: Parallelepiped, minima: Minima) -> MinkowskiReport:
    """Second-theorem bounds ``2^d/d! <= prod(lambda) * vol <= 2^d``."""
    d = body.d
    prod = body.volume()
    for lam in minima.lambdas:
        prod = prod * lam
    lower = Fraction(2**d, math.factorial(d))
    upper = Fraction(2**d)
    ok = scmp(lower, prod) <= 0 and scmp(prod, upper) <= 0
    return MinkowskiReport(prod, lower, upper, ok)


@dataclass
class MinimaProfile:
    q_grid: list
    L: list  # one tuple of log-minima per grid point
    ordered: bool
    sum_deviation: float  # max |sum_j L_j(q) - q|
    sum_bound: float

    def rows(self, digits: int = 12) -> list[dict]:
        out = []
        for q, Ls in zip(self.q_grid, self.L):
            row = {"q": sc.decimal(q, digits)}
            for j, v in enumerate(Ls, start=1):
                row[f"L{j}"] = sc.decimal(v, digits)
            out.append(row)
        return out


def log_minima_profile(theta_or_A, q_grid) -> MinimaProfile:
    """``L_j(q) = log lambda_j(e^q)`` along a grid; accepts a 2-vector ``theta``
    (giving the body in ``R^3``) or a general m x n matrix."""
    A = theta_or_A
    if not isinstance(A[0], (list, tuple)):
        A = [list(A)]
    q_grid = list(q_grid)
    if any(scmp(b, a) <= 0 for a, b in zip(q_grid, q_grid[1:])):
        raise ValueError("q_grid must be increasing")
    if q_grid and scmp(q_grid[0], 0) < 0:
        raise ValueError("q must be nonnegative")
    d = len(A) + len(A[0])
    L, ordered, dev = [], True, 0.0
    hint = None
    for q in q_grid:
        Q = sc.exp(q)
        mins = body_minima(log_body(A, Q), radius_hint=hint)
        Ls = [sc.log(lam) for lam in mins.lambdas]
        ordered &= all(scmp(a, b) <= 0 for a, b in zip(Ls, Ls[1:]))
        total = sum(sc.to_float(x) for x in Ls)
        dev = max(dev, abs(total - sc.to_float(q)))
        L.append(tuple(Ls))
        hint = sc.to_float(mins.lambdas[0]) * 0.5
    bound = math.log(math.factorial(d)) + d * math.log(2)
    return MinimaProfile(q_grid, L, ordered, dev, bound)
