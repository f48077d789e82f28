"""The irrationality measure function and its jump sequence.

For an m x n matrix ``A`` the function ``psi(A, t)`` is the smallest
torus distance ``<Aq>`` over integer ``q`` with ``0 < |q| <= t`` (sup-norm).
Its jump points ``M_l`` and values ``zeta_l`` form a
:class:`BestApproxSequence`; ``Delta_l = M_{l+1}^n * zeta_l^m`` never
exceeds 1.

Jumps are found by enumerating integer points ``(q, p)`` in the box
``|q| <= T, |Aq - p| < zeta`` (whose volume stays bounded), and every
candidate is re-evaluated exactly before it is accepted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .core import scalar as sc
from .core.intlat import enumerate_short
from .core.linalg import Dims, scmp, torus_distance

RATIONAL_DEPENDENCE = "rational-dependence"


# -- evaluation helpers -------------------------------------------------------

def torus_value(A, q):
    """Exact ``<Aq>`` for an integer vector ``q``."""
    return torus_distance([sum((a * int(x) for a, x in zip(row, q)), Fraction(0)) for row in A])


def sign_normalized(q) -> bool:
    for x in q:
        if x:
            return x > 0
    return False


def normalize_sign(q) -> tuple:
    q = tuple(int(x) for x in q)
    return q if sign_normalized(q) else tuple(-x for x in q)


def _check_shape(A, dims: Dims):
    if len(A) != dims.m or any(len(r) != dims.n for r in A):
        raise ValueError(f"A must have shape ({dims.m}, {dims.n})")


def _float_A(A):
    return np.array([[sc.to_float(x) for x in row] for row in A], dtype=float)


def _float_tolerance(Af, qs):
    # a generous bound on the float64 error of <Aq> (rounding of A and of the sums)
    scale = np.abs(Af) @ np.abs(qs).T + 1.0
    return (64 * 2.0 ** -52) * scale.max(axis=0)


def _screen_min(A, qs: np.ndarray):
    """Exact minimum of ``<Aq>`` over rows of ``qs`` and all its minimizers."""
    Af = _float_A(A)
    x = Af @ qs.T
    vals = np.abs(x - np.rint(x)).max(axis=0)
    tol = _float_tolerance(Af, qs)
    idx = np.nonzero(vals - tol <= (vals + tol).min())[0]
    best, winners = None, []
    for i in idx:
        q = tuple(int(v) for v in qs[i])
        val = torus_value(A, q)
        c = 1 if best is None else scmp(val, best)
        if best is None or c < 0:
            best, winners = val, [q]
        elif c == 0:
            winners.append(q)
    return best, winners


def _shell_vectors(n: int, lo: int, hi: int) -> np.ndarray:
    """Sign-normalized integer vectors with ``lo <= |q| <= hi``."""
    rng = np.arange(-hi, hi + 1)
    grids = np.meshgrid(*([rng] * n), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    nrm = np.abs(pts).max(axis=1)
    pts = pts[(nrm >= lo) & (nrm <= hi)]
    first = np.zeros(len(pts), dtype=np.int64)
    for j in range(n - 1, -1, -1):
        col = pts[:, j]
        first = np.where(col != 0, col, first)
    return pts[first > 0]


# -- the enumeration engine ---------------------------------------------------

def _body_candidates(A, dims: Dims, T, zeta):
    """Integer ``q`` (sign-normalized, nonzero) with ``|q| <= T`` and ``<Aq>`` possibly ``<= zeta``."""
    m, n, d = dims.m, dims.n, dims.d
    z = sc.to_mpf(zeta)
    rows = []
    for i in range(m):
        rows.append([sc.to_mpf(a) / z for a in A[i]] + [(-1 if k == i else 0) / z for k in range(m)])
    for j in range(n):
        rows.append([mpmath.mpf(int(k == j)) / T for k in range(n)] + [0] * m)
    G = mpmath.matrix(rows)
    gram = G.T * G
    pts = enumerate_short(gram, mpmath.sqrt(d) * (1 + mpmath.mpf(2) ** -30))
    out = set()
    for c in pts:
        q = c[:n]
        if any(q) and max(abs(x) for x in q) <= T:
            out.add(normalize_sign(q))
    return sorted(out)


def _min_over(A, qs):
    best, winners = None, []
    for q in qs:
        val = torus_value(A, q)
        c = 1 if best is None else scmp(val, best)
        if best is None or c < 0:
            best, winners = val, [q]
        elif c == 0:
            winners.append(q)
    return best, winners


@dataclass(frozen=True)
class Jump:
    M: int
    zeta: object
    witness: tuple | None


@dataclass
class BestApproxSequence:
    """Jump points ``M_l``, values ``zeta_l`` and witnesses of ``psi``."""

    dims: Dims
    A: list | None
    entries: list
    t_max: int
    flags: list = field(default_factory=list)

    @classmethod
    def synthetic(cls, dims: Dims, M, zeta) -> BestApproxSequence:
        """A sequence built from given ``(M_l, zeta_l)`` data (no matrix)."""
        if len(M) != len(zeta):
            raise ValueError("M and zeta must have equal length")
        entries = [Jump(int(a), b, None) for a, b in zip(M, zeta)]
        for x, y in zip(entries, entries[1:]):
            if not (x.M < y.M and scmp(y.zeta, x.zeta) < 0):
                raise ValueError("synthetic data must have M increasing and zeta decreasing")
        return cls(dims, None, entries, int(M[-1]) if M else 0, ["synthetic"])

    def __len__(self):
        return len(self.entries)

    @property
    def M(self) -> list[int]:
        return [e.M for e in self.entries]

    @property
    def zeta(self) -> list:
        return [e.zeta for e in self.entries]

    @property
    def witnesses(self) -> list:
        return [e.witness for e in self.entries]

    def delta(self, l: int):
        """``Delta_l = M_{l+1}^n * zeta_l^m`` (defined for ``l < len - 1``)."""
        if not 0 <= l < len(self.entries) - 1:
            raise IndexError("Delta_l needs M_{l+1}")
        return Fraction(self.entries[l + 1].M) ** self.dims.n * self.entries[l].zeta ** self.dims.m

    @property
    def deltas(self) -> list:
        return [self.delta(l) for l in range(len(self.entries) - 1)]

    @property
    def rational_dependence(self) -> bool:
        return RATIONAL_DEPENDENCE in self.flags

    def check_invariants(self) -> list[str]:
        """Violations of monotonicity, witness consistency and ``Delta_l <= 1``."""
        bad = []
        for l, (x, y) in enumerate(zip(self.entries, self.entries[1:])):
            if not x.M < y.M:
                bad.append(f"M not increasing at l={l}")
            if not scmp(y.zeta, x.zeta) < 0:
                bad.append(f"zeta not decreasing at l={l}")
            if scmp(self.delta(l), 1) > 0:
                bad.append(f"Delta_{l} > 1")
        if self.A is not None:
            for l, e in enumerate(self.entries):
                if e.witness is None:
                    continue
                if max(abs(x) for x in e.witness) != e.M:
                    bad.append(f"witness norm mismatch at l={l}")
                if scmp(torus_value(self.A, e.witness), e.zeta) != 0:
                    bad.append(f"witness value mismatch at l={l}")
        return bad

    def rows(self, digits: int = 12) -> list[dict]:
        out = []
        for l, e in enumerate(self.entries):
            out.append(
                {
                    "l": l,
                    "M_l": e.M,
                    "zeta_l": sc.decimal(e.zeta, digits),
                    "Delta_l": sc.decimal(self.delta(l), digits) if l < len(self.entries) - 1 else "",
                    "witness": " ".join(map(str, e.witness)) if e.witness else "",
                }
            )
        return out


def best_approx_sequence(A, t_max: int, dims: Dims | None = None, method: str = "lattice") -> BestApproxSequence:
    """All jump points ``M_l <= t_max`` of ``psi`` with their values.

    ``method="lattice"`` (default) walks from jump to jump by enumerating a
    bounded box; ``method="shell"`` sweeps every shell ``|q| = M`` in order
    and is meant for small horizons and cross-checks.
    """
    A = [list(r) for r in A]
    if dims is None:
        dims = Dims(len(A), len(A[0]))
    _check_shape(A, dims)
    t_max = int(math.floor(t_max))
    if t_max < 1:
        raise ValueError("t_max must be at least 1")
    if method == "shell":
        return _sequence_by_shells(A, t_max, dims)
    if method != "lattice":
        raise ValueError(f"unknown method {method!r}")
    entries: list[Jump] = []
    flags: list[str] = []
    zeta, winners = _screen_min(A, _shell_vectors(dims.n, 1, 1))
    entries.append(Jump(1, zeta, min(winners)))
    if sc.is_zero(zeta) or (not isinstance(zeta, sc.BigReal) and zeta == 0):
        flags.append(RATIONAL_DEPENDENCE)
        return BestApproxSequence(dims, A, entries, t_max, flags)
    M = 1
    searched = 1
    while searched < t_max:
        T = min(t_max, max(2 * searched, searched + 1))
        cands = [q for q in _body_candidates(A, dims, T, zeta) if max(abs(x) for x in q) > M]
        hits = [(q, torus_value(A, q)) for q in cands]
        hits = [(q, v) for q, v in hits if scmp(v, zeta) < 0]
        if not hits:
            searched = T
            continue
        new_M = min(max(abs(x) for x in q) for q, _ in hits)
        at = [q for q, _ in hits if max(abs(x) for x in q) == new_M]
        zeta, winners = _min_over(A, at)
        entries.append(Jump(new_M, zeta, min(winners)))
        M = searched = new_M
        if not isinstance(zeta, sc.BigReal) and zeta == 0:
            flags.append(RATIONAL_DEPENDENCE)
            break
    return BestApproxSequence(dims, A, entries, t_max, flags)


def _sequence_by_shells(A, t_max: int, dims: Dims) -> BestApproxSequence:
    entries: list[Jump] = []
    flags: list[str] = []
    zeta = None
    for M in range(1, t_max + 1):
        val, winners = _screen_min(A, _shell_vectors(dims.n, M, M))
        if zeta is None or scmp(val, zeta) < 0:
            zeta = val
            entries.append(Jump(M, val, min(winners)))
            if not isinstance(val, sc.BigReal) and val == 0:
                flags.append(RATIONAL_DEPENDENCE)
                break
    return BestApproxSequence(dims, A, entries, t_max, flags)


@dataclass(frozen=True)
class PsiResult:
    value: object
    witness: tuple
    flags: tuple = ()


def psi(A, t, dims: Dims | None = None, method: str = "auto") -> PsiResult:
    """``min <Aq>`` over ``0 < |q| <= floor(t)``; witness is the lexicographically
    smallest sign-normalized minimizer.

    >>> psi([[Fraction(1, 3)]], 2).value
    Fraction(1, 3)
    """
    A = [list(r) for r in A]
    if dims is None:
        dims = Dims(len(A), len(A[0]))
    _check_shape(A, dims)
    T = int(math.floor(t))
    if T < 1:
        raise ValueError("t must be at least 1")
    if method == "auto":
        method = "shell" if (2 * T + 1) ** dims.n <= 40_000 else "lattice"
    if method == "shell":
        val, winners = _screen_min(A, _shell_vectors(dims.n, 1, T))
        flags = (RATIONAL_DEPENDENCE,) if not isinstance(val, sc.BigReal) and val == 0 else ()
        return PsiResult(val, min(winners), flags)
    seq = best_approx_sequence(A, T, dims)
    last = seq.entries[-1]
    if seq.rational_dependence:
        return PsiResult(last.zeta, last.witness, (RATIONAL_DEPENDENCE,))
    cands = _body_candidates(A, dims, T, last.zeta)
    _, winners = _min_over(A, cands)
    return PsiResult(last.zeta, min(winners), ())


# -- audits -------------------------------------------------------------------

@dataclass
class GrowthReport:
    verdict: str  # "holds", "violated", "inconclusive"
    offset: int
    checked: int
    violations: list


def growth_audit(seq: BestApproxSequence) -> GrowthReport:
    """Check the exponential growth ``M_{l + 3^d + 1} >= 2 M_l``."""
    off = 3 ** seq.dims.d + 1
    M = seq.M
    if len(M) < off + 1:
        return GrowthReport("inconclusive", off, 0, [])
    viol = [(l, M[l], M[l + off]) for l in range(len(M) - off) if M[l + off] < 2 * M[l]]
    return GrowthReport("violated" if viol else "holds", off, len(M) - off, viol)


@dataclass
class ClassCReport:
    subsequence: list
    partial_sums: list
    H: list
    verdict: str
    horizon_note: str = "H_k is a supremum over the available tail only (finite horizon)"
    term_slope: float | None = None


CONSISTENT = "consistent-with-C"
COND1_FAIL = "condition-1-failing"
COND2_FAIL = "condition-2-failing"
INCONCLUSIVE = "inconclusive"


def auto_subsequence(seq: BestApproxSequence) -> list[int]:
    """Peaks of ``Delta_l`` per dyadic block of ``M_{l+1}``, thinned so that
    consecutive ``M_{l_k + 1}`` at least double."""
    deltas = seq.deltas
    if not deltas:
        return []
    M = seq.M
    blocks: dict[int, int] = {}
    for l, dl in enumerate(deltas):
        b = M[l + 1].bit_length()
        if b not in blocks or scmp(dl, deltas[blocks[b]]) > 0:
            blocks[b] = l
    picks = [blocks[b] for b in sorted(blocks)]
    kept: list[int] = []
    for l in picks:
        if not kept or M[l + 1] >= 2 * M[kept[-1] + 1]:
            kept.append(l)
    return kept


def _h_values(seq: BestApproxSequence, ls: list[int]) -> list:
    m, n = seq.dims.m, seq.dims.n
    zeta, M = seq.zeta, seq.M
    first = [(zeta[l] / seq.delta(l)) ** m for l in ls]
    H = []
    for k in range(len(ls) - 1):
        tail = sc.smax(first[k + 1 :])
        H.append(tail * (Fraction(M[ls[k] + 1]) / seq.delta(ls[k])) ** n)
    return H


def class_c_test(seq: BestApproxSequence, subsequence="auto", min_terms: int = 4) -> ClassCReport:
    """Finite-horizon diagnostic for the two class-C conditions."""
    ls = auto_subsequence(seq) if subsequence == "auto" else [int(x) for x in subsequence]
    if not ls:
        raise ValueError("empty subsequence")
    if any(b <= a for a, b in zip(ls, ls[1:])):
        raise ValueError("subsequence must be increasing")
    if ls[0] < 0 or ls[-1] >= len(seq) - 1:
        raise ValueError("subsequence index out of range (Delta_l needs M_{l+1})")
    d = seq.dims.d
    terms = [seq.delta(l) ** (d - 1) for l in ls]
    sums, total = [], Fraction(0)
    for t in terms:
        total = total + t
        sums.append(total)
    H = _h_values(seq, ls)
    if len(ls) < min_terms:
        return ClassCReport(ls, sums, H, INCONCLUSIVE)
    half = len(terms) // 2
    ks = np.arange(half + 1, len(terms) + 1, dtype=float)
    tail = np.array([max(sc.to_float(x), 1e-300) for x in terms[half:]])
    slope = float(np.polyfit(np.log(ks), np.log(tail), 1)[0]) if len(ks) >= 2 else 0.0
    if slope < -1.1:
        verdict = COND1_FAIL
    elif len(H) < 2 or not scmp(H[-1], H[0] / 2) <= 0:
        verdict = COND2_FAIL
    else:
        verdict = CONSISTENT
    return ClassCReport(ls, sums, H, verdict, term_slope=slope)
