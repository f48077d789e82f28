"""Inhomogeneous approximation at finite scale.

The badness score of a target ``eta`` for a matrix ``A`` on a shell
``Q0 <= |q| <= Q`` is ``min |q|^{n/m} <Aq - eta>``.  Scores are screened in
floating point over the whole shell and the near-minimal candidates are
re-evaluated exactly, so every reported score and witness is exact.

Also here: shell profiles, the doubling inequality, scans along lines of
targets, measure estimates over target grids, a certificate for a grid with
no small product values, the box-covering lemma, the covering construction
with its audits, and the counting and measure audits for slabs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import mpmath
import numpy as np

from .bestapprox import BestApproxSequence, auto_subsequence, best_approx_sequence, _h_values
from .core import scalar as sc
from .core.linalg import Dims, LatticeBasis, apply_flow, f_value, scmp
from .dynamics import shortest_vector

SCREEN_CHUNK = 4_000_000  # float cells per screening batch


# -- exact helpers --------------------------------------------------------------

def _frac_dist(x):
    return sc.frac_distance(x)


def _shift_value(A, q, eta):
    """Exact ``Aq - eta`` as a list."""
    return [sum((a * int(x) for a, x in zip(row, q)), Fraction(0)) - e for row, e in zip(A, eta)]


def _dist(A, q, eta):
    return sc.smax(_frac_dist(v) for v in _shift_value(A, q, eta)) if A else Fraction(0)


def _powered(A, q, eta, dims: Dims):
    """``|q|^n * <Aq - eta>^m``: the m-th power of the score, exact."""
    nq = max(abs(int(x)) for x in q)
    return Fraction(nq) ** dims.n * _dist(A, q, eta) ** dims.m


def _score_from_power(p, dims: Dims):
    return p if dims.m == 1 else sc.power(p, Fraction(1, dims.m))


def _witness_key(q):
    """Prefer sign-normalized vectors, then lexicographic order."""
    first = next((x for x in q if x), 0)
    return (0 if first > 0 else 1, tuple(q))


def _shell(n: int, Q0: int, Q: int) -> np.ndarray:
    rng = np.arange(-Q, Q + 1, dtype=np.int64)
    if n == 1:
        pts = rng[:, None]
    else:
        grids = np.meshgrid(*([rng] * n), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
    nrm = np.abs(pts).max(axis=1)
    return pts[(nrm >= Q0) & (nrm <= Q)]


def _float(A):
    return np.array([[sc.to_float(x) for x in row] for row in A], dtype=float)


@dataclass
class BadnessScore:
    score: object
    q: tuple
    p: tuple
    shell: tuple


def _screen_batch(A, etas, dims: Dims, Q0: int, Q: int):
    """For each target: the exact minimum of ``|q|^n <Aq - eta>^m`` and its
    minimizers, via float screening plus exact confirmation."""
    qs = _shell(dims.n, Q0, Q)
    if len(qs) == 0:
        raise ValueError("empty shell")
    Af = _float(A)
    X = qs @ Af.T  # (N, m)
    nq = np.abs(qs).max(axis=1).astype(float) ** dims.n
    scale = (np.abs(Af).sum(axis=1).max() if Af.size else 0.0) * Q + 2.0
    out = []
    per = max(1, SCREEN_CHUNK // max(1, len(qs)))
    etas = list(etas)
    for start in range(0, len(etas), per):
        chunk = etas[start : start + per]
        E = np.array([[sc.to_float(e) for e in eta] for eta in chunk], dtype=float)  # (k, m)
        Y = X[None, :, :] - E[:, None, :]
        dist = np.abs(Y - np.rint(Y)).max(axis=2)  # (k, N)
        tol = 64 * 2.0**-52 * (scale + np.abs(E).max(axis=1, initial=0.0))[:, None]
        low = nq[None, :] * np.maximum(dist - tol, 0.0) ** dims.m
        high = nq[None, :] * (dist + tol) ** dims.m
        bound = high.min(axis=1)
        for k, eta in enumerate(chunk):
            idx = np.nonzero(low[k] <= bound[k])[0]
            best, wins = None, []
            for i in idx:
                q = tuple(int(v) for v in qs[i])
                val = _powered(A, q, eta, dims)
                c = 1 if best is None else scmp(val, best)
                if best is None or c < 0:
                    best, wins = val, [q]
                elif c == 0:
                    wins.append(q)
            out.append((best, wins))
    return out


def _nearest_p(A, q, eta):
    return tuple(sc.nearest_integer(v) for v in _shift_value(A, q, eta))


def _as_matrix(A):
    A = [[sc.parse_scalar(x) for x in row] for row in A]
    return A


def _as_eta(eta, m):
    if eta is None or eta == 0:
        return tuple(Fraction(0) for _ in range(m))
    eta = tuple(sc.parse_scalar(x) for x in eta)
    if len(eta) != m:
        raise ValueError(f"eta must have {m} coordinates")
    return eta


def badness_score(A, eta, shell, dims: Dims | None = None) -> BadnessScore:
    """``min |q|^{n/m} <Aq - eta>`` over ``Q0 <= |q| <= Q`` with an exact witness."""
    A = _as_matrix(A)
    dims = dims or Dims(len(A), len(A[0]))
    eta = _as_eta(eta, dims.m)
    Q0, Q = int(shell[0]), int(shell[1])
    if not 1 <= Q0 <= Q:
        raise ValueError("need 1 <= Q0 <= Q")
    (best, wins), = _screen_batch(A, [eta], dims, Q0, Q)
    q = min(wins, key=_witness_key)
    return BadnessScore(_score_from_power(best, dims), q, _nearest_p(A, q, eta), (Q0, Q))


def batch_scores(A, etas, shell, dims: Dims | None = None) -> list:
    """Exact powered minima ``min |q|^n <Aq - eta>^m`` for many targets."""
    A = _as_matrix(A)
    dims = dims or Dims(len(A), len(A[0]))
    etas = [_as_eta(e, dims.m) for e in etas]
    return [best for best, _ in _screen_batch(A, etas, dims, int(shell[0]), int(shell[1]))]


# -- shells and the doubling inequality -------------------------------------------

@dataclass
class ShellProfile:
    shells: list  # (Q0, Q)
    scores: list
    running_min: list
    last_decrease: tuple | None


def shell_profile(A, eta, steps: int, dims: Dims | None = None) -> ShellProfile:
    """Scores on the dyadic shells ``2^j <= |q| <= 2^{j+1}`` and their running minimum."""
    if steps < 1:
        raise ValueError("steps must be at least 1")
    shells, scores, run = [], [], []
    last = None
    for j in range(steps):
        sh = (2**j, 2 ** (j + 1))
        s = badness_score(A, eta, sh, dims).score
        shells.append(sh)
        scores.append(s)
        if not run or scmp(s, run[-1]) < 0:
            run.append(s)
            last = sh
        else:
            run.append(run[-1])
    return ShellProfile(shells, scores, run, last)


@dataclass
class DoublingReport:
    left: object  # min over |q| <= 2Q, target 2 eta
    right: object  # 2^{n/m + 1} * min over |q| <= Q, target eta
    witness: tuple  # the doubled minimizer 2q
    witness_value: object
    holds: bool


def doubling_inequality_check(A, eta, Q: int, dims: Dims | None = None) -> DoublingReport:
    """The finite-scale doubling inequality, compared in m-th powers."""
    A = _as_matrix(A)
    dims = dims or Dims(len(A), len(A[0]))
    eta = _as_eta(eta, dims.m)
    if Q < 2:
        raise ValueError("Q must be at least 2")
    eta2 = tuple(2 * e for e in eta)
    base = badness_score(A, eta, (1, Q), dims)
    dbl = badness_score(A, eta2, (1, 2 * Q), dims)
    q2 = tuple(2 * x for x in base.q)
    factor = Fraction(2) ** (dims.n + dims.m)
    left_p = _powered(A, dbl.q, eta2, dims)
    wit_p = _powered(A, q2, eta2, dims)
    right_p = factor * _powered(A, base.q, eta, dims)
    holds = scmp(left_p, wit_p) <= 0 and scmp(wit_p, right_p) <= 0
    right = _score_from_power(right_p, dims)
    return DoublingReport(dbl.score, right, q2, _score_from_power(wit_p, dims), holds)


# -- scans over targets ---------------------------------------------------------------

@dataclass
class ScanReport:
    points: list  # parameter values (t or eta)
    scores: list
    epsilon: object
    fraction_above: float


def _fraction_above(powered, eps, m):
    thr = Fraction(eps) ** m if sc.is_exact(eps) else sc.BigReal(eps) ** m
    return sum(1 for p in powered if scmp(p, thr) > 0) / len(powered)


def coset_scan(A, direction, eta, t_grid, shell, epsilon, dims: Dims | None = None) -> ScanReport:
    """Scores along ``eta(t) = t * (A q0 + p0) + eta``.

    ``direction`` is ``p0`` (an m-vector) or a pair ``(q0, p0)``.
    """
    A = _as_matrix(A)
    dims = dims or Dims(len(A), len(A[0]))
    if isinstance(direction, tuple) and len(direction) == 2 and isinstance(direction[0], (list, tuple)):
        q0, p0 = direction
    else:
        q0, p0 = [0] * dims.n, direction
    v = [sum((a * int(x) for a, x in zip(row, q0)), Fraction(0)) + int(p) for row, p in zip(A, p0)]
    if all(sc.is_exact(x) and x == 0 for x in v):
        raise ValueError("direction vanishes")
    eta = _as_eta(eta, dims.m)
    ts = [sc.parse_scalar(t) if isinstance(t, str) else t for t in t_grid]
    etas = [tuple(t * x + e for x, e in zip(v, eta)) for t in ts]
    powered = batch_scores(A, etas, shell, dims)
    scores = [_score_from_power(p, dims) for p in powered]
    return ScanReport(ts, scores, epsilon, _fraction_above(powered, epsilon, dims.m))


def eta_grid(m: int, resolution: int) -> list:
    """Deterministic lattice ``{i / resolution}^m`` in ``[0, 1)^m``."""
    return [tuple(Fraction(i, resolution) for i in idx) for idx in product(range(resolution), repeat=m)]


def bad_measure_estimate(A, resolution: int, shell, epsilon, dims: Dims | None = None) -> ScanReport:
    """Fraction of targets on a grid whose score exceeds ``epsilon``."""
    A = _as_matrix(A)
    dims = dims or Dims(len(A), len(A[0]))
    if resolution < 10:
        raise ValueError("resolution must be at least 10 per axis")
    etas = eta_grid(dims.m, resolution)
    powered = batch_scores(A, etas, shell, dims)
    scores = [_score_from_power(p, dims) for p in powered]
    return ScanReport(etas, scores, epsilon, _fraction_above(powered, epsilon, dims.m))


# -- the product-form certificate ----------------------------------------------------

@dataclass
class PellCertificate:
    m: int
    bound: Fraction  # lower bound (1/4)^m on the value set
    identity_ok: bool
    enumerated_min: Fraction  # smallest |first * (m+1)-th coordinate| found, to the m-th power
    enumerated_argmin: tuple
    box_min: object  # smallest full value on a small box of grid points
    systoles: list  # (t, systole) for the homogeneous lattice
    systole_ok: bool
    scaling_note: str

    @property
    def passed(self) -> bool:
        return self.identity_ok and self.enumerated_min >= self.bound and scmp(self.box_min, self.bound) >= 0 and self.systole_ok


def pell_basis(m: int) -> LatticeBasis:
    """Rows ``e_i + sqrt2 e_{m+i}`` and ``e_i - sqrt2 e_{m+i}`` (unnormalized)."""
    r2 = sc.sqrt_int(2)
    d = 2 * m
    rows = []
    for i in range(m):
        rows.append([Fraction(int(j == i)) if j < m else (r2 if j == m + i else Fraction(0)) for j in range(d)])
    for i in range(m):
        rows.append([Fraction(int(j == i)) if j < m else (-r2 if j == m + i else Fraction(0)) for j in range(d)])
    return LatticeBasis(Dims(m, m), rows)


def pell_certificate(m: int, Q: int, t_values=range(21), box: int = 2, seed_samples: int = 200) -> PellCertificate:
    """Certificate that the grid ``g Z^d + u`` has no small product values.

    ``u`` has coordinates 1 and ``m+1`` equal to 1/2 and the rest 0.  The
    first and ``(m+1)``-th coordinates of a grid point are ``x + y sqrt2`` and
    ``x - y sqrt2`` with ``x`` in ``Z + 1/2``, whose product is
    ``((2x)^2 - 8 y^2) / 4`` with an odd numerator, hence at least 1/4 in
    absolute value; the product form is at least its m-th power.
    """
    if m < 1:
        raise ValueError("m must be positive")
    half = Fraction(1, 2)
    r2 = sc.sqrt_int(2)
    dims = Dims(m, m)
    bound = Fraction(1, 4) ** m
    # (i) the algebraic identity on sample points, exactly
    identity_ok = True
    rng = np.random.default_rng(0)
    for _ in range(seed_samples):
        x = int(rng.integers(-Q, Q + 1)) + half
        y = int(rng.integers(-Q, Q + 1))
        prod = (x + y * r2) * (x - y * r2)
        num = (2 * x) ** 2 - 8 * y * y
        identity_ok &= prod == Fraction(num, 4) and num % 2 == 1
    # (ii) exact minimum of |(2p+1)^2 - 8 q^2| over |p|, |q| <= Q via the nearest odd root
    best, arg = None, None
    top = 2 * Q + 1  # largest odd |2p + 1| with |p| <= Q
    for y in range(0, Q + 1):
        t = 8 * y * y
        r = math.isqrt(t)
        below = r if r % 2 else r - 1
        for k in (below, below + 2):
            k = min(max(k, 1), top)
            v = abs(k * k - t)
            if best is None or v < best:
                best, arg = v, ((k - 1) // 2, y)
    enumerated = Fraction(best, 4) ** m
    # (iii) full product-form values on a small box of grid points
    basis = pell_basis(m)
    shift = [half if j in (0, m) else Fraction(0) for j in range(2 * m)]
    box_min = None
    for c in product(range(-box, box + 1), repeat=2 * m):
        pt = [s + v for s, v in zip(shift, basis.point(c))]
        v = f_value(pt, dims)
        if box_min is None or scmp(v, box_min) < 0:
            box_min = v
    # (iv) systoles of the homogeneous lattice along the flow
    systoles = []
    for t in t_values:
        length, _, _ = shortest_vector(apply_flow(t, basis, dims))
        systoles.append((t, length))
    systole_ok = all(scmp(s, 1) >= 0 for _, s in systoles)
    note = "basis not normalized to determinant 1; values scale by a fixed positive factor"
    return PellCertificate(m, bound, identity_ok, enumerated, arg, box_min, systoles, systole_ok, note)


# -- the box-covering lemma -------------------------------------------------------------

@dataclass
class BoxCoverReport:
    l: int
    radius: object  # R_l = d M_{l+1} / Delta_l
    side: object  # 2 d zeta_l / Delta_l
    hits: list  # per eta: (q, p) or None
    failures: list

    @property
    def passed(self) -> bool:
        return not self.failures


def _box_params(seq: BestApproxSequence, l: int):
    d = seq.dims.d
    delta = seq.delta(l)
    R = d * Fraction(seq.M[l + 1]) / delta
    side = 2 * d * seq.zeta[l] / delta
    return R, side


def _in_box(A, q, eta, side):
    """Exact test: ``Aq - p`` lies in ``[eta, eta + side)`` for some integer ``p``; returns ``p``."""
    p = []
    for v in _shift_value(A, q, eta):
        k = math.floor(v)
        r = v - k
        if scmp(side, 1) >= 0:
            p.append(k)
            continue
        if not (sc.sign(r) >= 0 and scmp(r, side) < 0):
            return None
        p.append(k)
    # Aq - p = eta + r  with p = floor(Aq - eta)
    return tuple(p)


def _find_in_boxes(A, dims: Dims, R, corners, side):
    """For each corner ``eta``: some ``(q, p)`` with ``|q| <= R`` and ``Aq - p`` in the box."""
    Rq = math.floor(R)
    qs = _shell(dims.n, 0, Rq)
    Af = _float(A)
    X = qs @ Af.T
    sf = sc.to_float(side)
    tol = 64 * 2.0**-52 * ((np.abs(Af).sum(axis=1).max() if Af.size else 0.0) * Rq + 2.0)
    out = []
    for eta in corners:
        E = np.array([sc.to_float(e) for e in eta])
        Y = X - E[None, :]
        r = Y - np.floor(Y)
        if sf >= 1:
            ok = np.ones(len(qs), dtype=bool)
        else:
            # inside the box, or within tolerance of a wrap-around edge
            ok = ((r < sf + tol) | (r > 1 - tol)).all(axis=1)
        idx = np.nonzero(ok)[0]
        # try the candidates farthest from the box edges first
        if len(idx) and sf < 1:
            margin = np.minimum(np.where(r[idx] > 1 - tol, r[idx] - 1, r[idx]), sf - r[idx]).min(axis=1)
            idx = idx[np.argsort(-margin, kind="stable")]
        found = None
        for i in idx[:64]:
            q = tuple(int(v) for v in qs[i])
            p = _in_box(A, q, eta, side)
            if p is not None:
                found = (q, p)
                break
        out.append(found)
    return out


def _find_in_cells(A, dims: Dims, R, cells, side):
    """Like :func:`_find_in_boxes` for the aligned corners ``cell * side``,
    bucketing every ``Aq`` by cell instead of scanning per corner."""
    Rq = math.floor(R)
    qs = _shell(dims.n, 0, Rq)
    Af = _float(A)
    X = qs @ Af.T
    r = X - np.floor(X)
    sf = sc.to_float(side)
    tol = 64 * 2.0**-52 * ((np.abs(Af).sum(axis=1).max() if Af.size else 0.0) * Rq + 2.0)
    # each point goes to its cell and, near an edge, to the neighbouring cell
    lo = np.floor((r - tol) / sf).astype(np.int64)
    hi = np.floor((r + tol) / sf).astype(np.int64)
    wanted = set(cells)
    buckets: dict = {}
    for i in range(len(qs)):
        for cell in product(*[sorted({int(a), int(b)}) for a, b in zip(lo[i], hi[i])]):
            if cell in wanted:
                buckets.setdefault(cell, []).append(i)
    out = []
    for cell in cells:
        corner = tuple(c * side for c in cell)
        found = None
        for i in buckets.get(cell, [])[:64]:
            q = tuple(int(v) for v in qs[i])
            p = _in_box(A, q, corner, side)
            if p is not None:
                found = (q, p)
                break
        out.append(found)
    return out


def box_cover_check(A, l: int, etas, seq: BestApproxSequence | None = None, t_max: int | None = None) -> BoxCoverReport:
    """Every box ``[eta, eta + 2 d zeta_l / Delta_l)`` holds some ``Aq - p`` with ``|q| <= R_l``."""
    A = _as_matrix(A)
    dims = Dims(len(A), len(A[0]))
    if seq is None:
        horizon = t_max or 64
        seq = best_approx_sequence(A, horizon, dims)
        while len(seq) < l + 2 and not seq.rational_dependence:
            horizon *= 4
            seq = best_approx_sequence(A, horizon, dims)
    if len(seq) < l + 2:
        raise ValueError(f"the sequence does not reach index {l + 1}")
    R, side = _box_params(seq, l)
    etas = [_as_eta(e, dims.m) for e in etas]
    hits = _find_in_boxes(A, dims, R, etas, side)
    fails = [(eta, sc.render(R), sc.render(side)) for eta, h in zip(etas, hits) if h is None]
    return BoxCoverReport(l, R, side, hits, fails)


# -- the covering construction ------------------------------------------------------------

@dataclass
class CoveringLevel:
    k: int
    l: int
    delta: object
    zeta: object
    radius: object
    side: object
    per_axis: int  # ceil(Delta / (2 d zeta))
    W: int
    W_inner: int  # (per_axis - 1)^m
    W_sparse: int  # floor((per_axis - 1) / 3)^m
    phi: object
    phi_target: object  # d^d (3/eps)^m H_k
    ff2_ok: bool
    half_width: object  # delta_k
    centres: list  # (q, p, xi) per selected cell; empty in accounting mode
    measure: object  # W_sparse * (2 delta_k)^m
    disjoint: bool | None


@dataclass
class CoveringPlan:
    epsilon: object
    levels: list
    truncated: str | None
    partial_sums: list  # running sums of phi_k Delta_{l_k}^{d-1}
    measure_sums: list  # running sums of the level measures
    measure_ratios: list  # measure / (phi Delta^{d-1})
    intersections: list  # (k, k1, max count, sharp0 bound, sharp bound)


def _ceil_div(a, b) -> int:
    return math.ceil(a / b)


def default_phi(target, k: int):
    """``max(target, k^{-1/2})`` capped below 1."""
    val = sc.smax([target, sc.power(Fraction(1, k), Fraction(1, 2))])
    cap = 1 - Fraction(1, 1024)
    return cap if scmp(val, cap) > 0 else val


def _sparse_cells(per_axis: int, m: int):
    """Cells with every index ``= 1 (mod 3)`` that lie inside ``[0, 1)^m``."""
    idx = list(range(1, per_axis - 1, 3))
    count = (per_axis - 1) // 3
    return [c for c in product(idx[:count], repeat=m)]


def _disjoint(centres, half) -> bool:
    """Pairwise disjointness of closed cubes of half-width ``half``."""
    pts = sorted(centres, key=lambda c: sc.to_float(c[0]))
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            gap0 = pts[j][0] - pts[i][0]
            if sc.to_float(gap0) > 2 * sc.to_float(half) + 1e-9:
                if scmp(gap0, 2 * half) > 0:
                    break
            if all(scmp(abs(a - b), 2 * half) <= 0 for a, b in zip(pts[i], pts[j])):
                return False
    return True


def covering_plan_build(A=None, epsilon=Fraction(1, 10), k_max: int = 4, seq: BestApproxSequence | None = None,
                        subsequence="auto", phi_policy=default_phi, t_max: int = 10**5,
                        on_ff2_failure: str = "truncate", build_centres: bool = True) -> CoveringPlan:
    """Boxes of the covering construction with their audits.

    With ``seq`` synthetic (no matrix) the plan is built in accounting mode:
    all counts and measures are computed but no centres are placed.
    ``on_ff2_failure`` is ``"truncate"`` (stop at the first level where the
    policy cannot meet the lower bound on ``phi_k``) or ``"record"``.
    """
    eps = sc.parse_scalar(epsilon)
    if not (scmp(0, eps) < 0 and scmp(eps, Fraction(1, 2)) < 0):
        raise ValueError("epsilon must lie in (0, 1/2)")
    if seq is None:
        A = _as_matrix(A)
        seq = best_approx_sequence(A, t_max, Dims(len(A), len(A[0])))
    elif A is not None:
        A = _as_matrix(A)
    dims = seq.dims
    m, n, d = dims.m, dims.n, dims.d
    ls = auto_subsequence(seq) if subsequence == "auto" else [int(x) for x in subsequence]
    if ls and max(ls) >= len(seq.zeta):
        raise ValueError(f"subsequence index {max(ls)} exceeds the {len(seq.zeta)} computed approximations")
    H = _h_values(seq, ls)
    levels, truncated = [], None
    for k in range(min(k_max, len(H))):
        l = ls[k]
        delta, zeta = seq.delta(l), seq.zeta[l]
        R, side = _box_params(seq, l)
        per_axis = _ceil_div(delta, 2 * d * zeta)
        target = Fraction(d) ** d * (3 / eps) ** m * H[k]
        phi = phi_policy(target, k + 1)
        ff2 = scmp(phi, target) >= 0 and scmp(phi, 1) < 0
        if not ff2 and on_ff2_failure == "truncate":
            truncated = f"level {k + 1}: phi = {sc.decimal(phi, 6)} cannot meet the bound {sc.decimal(target, 6)}"
            break
        half = sc.power(phi, Fraction(1, m)) / sc.power(R, Fraction(n, m))
        sparse = ((per_axis - 1) // 3) ** m
        centres = []
        disjoint = None
        if build_centres and A is not None and sparse:
            cells = _sparse_cells(per_axis, m)
            found = _find_in_cells(A, dims, R, cells, side)
            for c, f in zip(cells, found):
                if f is None:
                    raise AssertionError(f"no approximation point in cell {c} at level {k + 1}")
                q, p = f
                xi = tuple(v for v in (sum((a * x for a, x in zip(row, q)), Fraction(0)) - pp for row, pp in zip(A, p)))
                centres.append((q, p, xi))
            disjoint = _disjoint([xi for _, _, xi in centres], half)
        elif sparse <= 1:
            disjoint = True
        measure = sparse * (2 * half) ** m
        levels.append(
            CoveringLevel(k + 1, l, delta, zeta, R, side, per_axis, per_axis**m, (per_axis - 1) ** m, sparse,
                          phi, target, ff2, half, centres, measure, disjoint)
        )
    partial, msums, ratios = [], [], []
    tot, mtot = Fraction(0), Fraction(0)
    for lv in levels:
        term = lv.phi * lv.delta ** (d - 1)
        tot = tot + term
        mtot = mtot + lv.measure
        partial.append(tot)
        msums.append(mtot)
        ratios.append(lv.measure / term)
    inter = _intersection_audit(levels, eps, dims)
    return CoveringPlan(eps, levels, truncated, partial, msums, ratios, inter)


def _intersection_audit(levels, eps, dims: Dims):
    m, d = dims.m, dims.d
    out = []
    for a in range(len(levels)):
        for b in range(a + 1, len(levels)):
            lk, lk1 = levels[a], levels[b]
            if not lk.centres or not lk1.centres:
                continue
            reach = lk.half_width + lk1.half_width
            fine = sorted(lk1.centres, key=lambda c: sc.to_float(c[2][0]))
            keys = [sc.to_float(c[2][0]) for c in fine]
            worst = 0
            for _, _, xi in lk.centres:
                lo = np.searchsorted(keys, sc.to_float(xi[0]) - sc.to_float(reach) - 1e-9)
                hi = np.searchsorted(keys, sc.to_float(xi[0]) + sc.to_float(reach) + 1e-9, side="right")
                cnt = 0
                for _, _, yi in fine[lo:hi]:
                    if all(scmp(abs(u - v), reach) <= 0 for u, v in zip(xi, yi)):
                        cnt += 1
                worst = max(worst, cnt)
            ratio = lk1.zeta / lk1.delta
            sharp0 = (2 * lk.half_width / (6 * ratio) + 1) ** m
            sharp = (2 * lk.half_width) ** m * lk1.W_sparse * (1 + 2**m * eps)
            out.append((lk.k, lk1.k, worst, sharp0, sharp))
    return out


# -- counting and measure audits for slabs --------------------------------------------------

DEFAULT_THETA = (sc.sqrt_int(2), sc.sqrt_int(3))


@dataclass
class AuxCount:
    count: int
    bound: int
    passed: bool


def _near_integer(x: float) -> bool:
    return abs(x - round(x)) < 1e-9 * max(1.0, abs(x))


def aux_count_audit(M: int, delta, a_rest, theta=DEFAULT_THETA) -> AuxCount:
    """Exact count of ``(a0, a1, a2)`` with ``|a1|, |a2| < M`` for which some
    ``(theta_3, ...)`` in the unit cube gives ``|a0 + a.theta| <= delta``."""
    delta = sc.parse_scalar(delta)
    if not (scmp(0, delta) < 0 and scmp(delta, Fraction(1, 2)) < 0):
        raise ValueError("delta must lie in (0, 1/2)")
    a_rest = [int(a) for a in a_rest]
    if not any(a_rest):
        raise ValueError("(a_3, ...) must be nonzero")
    t1, t2 = (sc.parse_scalar(x) for x in theta)
    pos = sum(a for a in a_rest if a > 0)
    neg = sum(a for a in a_rest if a < 0)
    f1, f2, fd = sc.to_float(t1), sc.to_float(t2), sc.to_float(delta)
    count = 0
    for a1 in range(-M + 1, M):
        for a2 in range(-M + 1, M):
            c = a1 * f1 + a2 * f2
            lo_f, hi_f = -fd - c - pos, fd - c - neg
            if _near_integer(lo_f) or _near_integer(hi_f):
                # float rounding could move an endpoint across an integer
                c = a1 * t1 + a2 * t2
                lo, hi = math.ceil(-delta - c - pos), math.floor(delta - c - neg)
            else:
                lo, hi = math.ceil(lo_f), math.floor(hi_f)
            if hi >= lo:
                count += hi - lo + 1
    bound = 18 * M * M * (sum(abs(a) for a in a_rest) + 1)
    return AuxCount(count, bound, count <= bound)


def slab_measure(a, theta=DEFAULT_THETA, radius=None, M: int | None = None, epsilon=None) -> float:
    """Measure of ``{t in [0,1]^{m-2} : |a0 + a1 th1 + a2 th2 + a3 t3 + ...| < radius}``
    by inclusion-exclusion on the distribution of a weighted sum of uniforms."""
    a = [int(x) for x in a]
    if radius is None:
        m = len(a) - 1
        radius = Fraction(sc.parse_scalar(epsilon)) / Fraction(M) ** m
    c0 = sc.to_mpf(a[0] + a[1] * theta[0] + a[2] * theta[1])
    w = []
    for x in a[3:]:
        if x < 0:
            c0 += x  # t -> 1 - t turns a negative weight positive
            w.append(-x)
        elif x > 0:
            w.append(x)
    r = sc.to_mpf(radius)
    k = len(w)

    def cdf(s):
        if k == 0:
            return mpmath.mpf(1) if s > 0 else mpmath.mpf(0)
        tot = mpmath.mpf(0)
        for S in product((0, 1), repeat=k):
            shift = s - sum(wi for wi, b in zip(w, S) if b)
            if shift > 0:
                tot += (-1) ** sum(S) * shift**k
        return tot / (math.factorial(k) * math.prod(w))

    # the slab is -r - c0 < sum w_i t_i < r - c0
    return float(cdf(r - c0) - cdf(-r - c0))


def slab_bound(a, M: int, epsilon) -> float:
    """``(m-2)^{(m-3)/2} * 2 eps / (M^m * |(a3, ...)|_2)``."""
    m = len(a) - 1
    norm = math.sqrt(sum(int(x) ** 2 for x in a[3:]))
    return (m - 2) ** ((m - 3) / 2) * 2 * sc.to_float(epsilon) / (M**m * norm)


@dataclass
class MeasureAudit:
    estimate: float
    std_error: float
    samples: int
    K: float
    bound: float  # K * epsilon
    passed: bool  # estimate <= bound + 3 standard errors


def bme_constant(M: int, m: int) -> float:
    """The summation constant from the union bound, evaluated for this ``M``."""
    total = 0.0
    coef = 2 * (m - 2) ** ((m - 3) / 2) / M**m
    for a in product(range(-M + 1, M), repeat=m - 2):
        if any(a):
            s = sum(abs(x) for x in a)
            total += 18 * M * M * (s + 1) * coef / math.sqrt(sum(x * x for x in a))
    return total


def bme_measure_audit(M: int, epsilon, m: int, theta=DEFAULT_THETA, samples: int = 100_000, seed: int = 0,
                      min_samples: int = 1000) -> MeasureAudit:
    """Monte-Carlo measure of the union of slabs with ``max |a_i| < M``."""
    if m <= 2:
        raise ValueError("m must exceed 2")
    eps = sc.to_float(sc.parse_scalar(epsilon))
    if not 0 < eps < 0.5:
        raise ValueError("epsilon must lie in (0, 1/2)")
    if samples < min_samples:
        raise ValueError(f"at least {min_samples} samples are needed for a meaningful standard error")
    rng = np.random.default_rng(seed)
    T = rng.random((samples, m - 2))
    thr = eps / M**m
    t1, t2 = (sc.to_float(x) for x in theta)
    rest = np.array([a for a in product(range(-M + 1, M), repeat=m - 2) if any(a)], dtype=float)
    base = np.array([a1 * t1 + a2 * t2 for a1 in range(-M + 1, M) for a2 in range(-M + 1, M)])
    hit = np.zeros(samples, dtype=bool)
    chunk = max(1, 2_000_000 // (len(base) * len(rest)))
    for s in range(0, samples, chunk):
        Ts = T[s : s + chunk]
        lin = Ts @ rest.T  # (k, R)
        vals = lin[:, :, None] + base[None, None, :]
        dist = np.abs(vals - np.rint(vals))
        hit[s : s + chunk] = (dist < thr).any(axis=(1, 2))
    p = float(hit.mean())
    se = math.sqrt(max(p * (1 - p), 0.0) / samples)
    K = bme_constant(M, m)
    bound = K * eps
    return MeasureAudit(p, se, samples, K, bound, p <= bound + 3 * se)


# -- target search ---------------------------------------------------------------------------

@dataclass
class EtaSearchResult:
    eta: tuple
    score: object
    evaluations: int


def eta_search(theta, Q: int, budget: int = 64, seed: int = 0, start_level: int = 3) -> EtaSearchResult:
    """Multi-start dyadic refinement maximizing the score on the shell ``(1, Q)``.

    ``theta`` is an m-vector (a column matrix).  A witness search only.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    A = [[sc.parse_scalar(x)] for x in theta]
    dims = Dims(len(A), 1)
    m = dims.m
    rng = np.random.default_rng(seed)
    starts = eta_grid(m, 2**start_level) if m <= 2 else []
    starts += [tuple(Fraction(int(x), 2**16) for x in rng.integers(0, 2**16, size=m)) for _ in range(max(1, budget // 8))]
    powered = batch_scores(A, starts, (1, Q), dims)
    evals = len(starts)
    ranked = sorted(range(len(starts)), key=lambda i: -sc.to_float(powered[i]))
    best_i = ranked[0]
    best_eta, best_p = starts[best_i], powered[best_i]
    frontier = [(starts[i], powered[i]) for i in ranked[:4]]
    level = start_level + 1
    while evals < budget and frontier:
        step = Fraction(1, 2**level)
        cands = []
        for eta, _ in frontier:
            for j in range(m):
                for s in (-step, step):
                    e = list(eta)
                    e[j] = (e[j] + s) % 1
                    cands.append(tuple(e))
        cands = cands[: max(1, budget - evals)]
        vals = batch_scores(A, cands, (1, Q), dims)
        evals += len(cands)
        pool = frontier + list(zip(cands, vals))
        pool.sort(key=lambda x: -sc.to_float(x[1]))
        frontier = pool[:4]
        if scmp(frontier[0][1], best_p) > 0:
            best_eta, best_p = frontier[0]
        level += 1
    final = badness_score(A, best_eta, (1, Q), dims)
    return EtaSearchResult(best_eta, final.score, evals)
