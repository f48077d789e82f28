"""Three-systems: piecewise-linear paths that model log-minima.

A three-system is stored by its breakpoints and the values at them; slopes
are derived.  The checks are:

* S1: ``0 <= P1 <= P2 <= P3`` and ``P1 + P2 + P3 = q`` at every breakpoint,
* S2: on each segment exactly one component has slope 1, the others 0,
* S3: at an interior breakpoint, if the rising component changes from ``r``
  to ``s`` with ``r < s``, then ``P_r = ... = P_s`` there.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .core import scalar as sc
from .core.linalg import scmp

BIGREAL_TOLERANCE = Fraction(1, 2**64)


def _eq(a, b) -> bool:
    if isinstance(a, sc.BigReal) or isinstance(b, sc.BigReal):
        return scmp(abs(a - b), BIGREAL_TOLERANCE) <= 0
    return a == b


@dataclass(frozen=True)
class ThreeSystem:
    interval: tuple
    breakpoints: tuple
    values: tuple  # one (P1, P2, P3) per breakpoint

    def __post_init__(self):
        bps = tuple(self.breakpoints)
        vals = tuple(tuple(v) for v in self.values)
        if len(bps) != len(vals) or len(bps) < 2:
            raise ValueError("need at least two breakpoints with one value triple each")
        if any(scmp(b, a) <= 0 for a, b in zip(bps, bps[1:])):
            raise ValueError("breakpoints must increase")
        if not (_eq(bps[0], self.interval[0]) and _eq(bps[-1], self.interval[1])):
            raise ValueError("breakpoints must start and end at the interval endpoints")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "interval", tuple(self.interval))

    def slopes(self) -> list[tuple]:
        out = []
        for (a, pa), (b, pb) in zip(zip(self.breakpoints, self.values), zip(self.breakpoints[1:], self.values[1:])):
            h = b - a
            out.append(tuple((y - x) / h for x, y in zip(pa, pb)))
        return out

    def __call__(self, q):
        """Linear interpolation at ``q``."""
        bps = self.breakpoints
        if scmp(q, bps[0]) < 0 or scmp(q, bps[-1]) > 0:
            raise ValueError("q outside the interval")
        for i in range(len(bps) - 1):
            if scmp(q, bps[i + 1]) <= 0:
                a, b = bps[i], bps[i + 1]
                w = (q - a) / (b - a)
                return tuple(x + (y - x) * w for x, y in zip(self.values[i], self.values[i + 1]))
        return self.values[-1]

    def to_json(self) -> str:
        return json.dumps(
            {
                "interval": [sc.render(x) for x in self.interval],
                "breakpoints": [sc.render(x) for x in self.breakpoints],
                "values": [[sc.render(x) for x in v] for v in self.values],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> ThreeSystem:
        data = json.loads(text) if isinstance(text, str) else text
        p = sc.parse_scalar
        return cls(
            tuple(p(x) for x in data["interval"]),
            tuple(p(x) for x in data["breakpoints"]),
            tuple(tuple(p(x) for x in v) for v in data["values"]),
        )

    def sample_rows(self, points, digits: int = 12, symbolic: bool = True) -> list[dict]:
        rows = []
        for q in points:
            P = self(q)
            render = (lambda x: sc.render(x, digits)) if symbolic else (lambda x: sc.decimal(x, digits))
            rows.append({"q": render(q), "P1": render(P[0]), "P2": render(P[1]), "P3": render(P[2])})
        return rows


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)
    junction_ties: list = field(default_factory=list)  # (q, components that tie)

    @property
    def valid(self) -> bool:
        return not self.violations


def _rising(slope) -> int | None:
    ones = [i for i, s in enumerate(slope) if _eq(s, 1)]
    return ones[0] if len(ones) == 1 else None


def validate_three_system(P: ThreeSystem) -> ValidationReport:
    """Check S1, S2 and S3; violations are returned as data."""
    rep = ValidationReport()
    for q, v in zip(P.breakpoints, P.values):
        if len(v) != 3:
            rep.violations.append(("S1", q, "value is not a triple"))
            continue
        if not (scmp(0, v[0]) <= 0 and scmp(v[0], v[1]) <= 0 and scmp(v[1], v[2]) <= 0):
            rep.violations.append(("S1", q, "components not ordered 0 <= P1 <= P2 <= P3"))
        if not _eq(v[0] + v[1] + v[2], q):
            rep.violations.append(("S1", q, "components do not sum to q"))
    slopes = P.slopes()
    for i, s in enumerate(slopes):
        ones = [j for j, x in enumerate(s) if _eq(x, 1)]
        zeros = [j for j, x in enumerate(s) if _eq(x, 0)]
        if len(ones) != 1 or len(zeros) != 2:
            rep.violations.append(("S2", (P.breakpoints[i], P.breakpoints[i + 1]), f"slopes {tuple(map(sc.render, s))}"))
    for i in range(1, len(P.breakpoints) - 1):
        r, s = _rising(slopes[i - 1]), _rising(slopes[i])
        q, v = P.breakpoints[i], P.values[i]
        ties = [j + 1 for j in range(2) if _eq(v[j], v[j + 1])]
        if ties:
            rep.junction_ties.append((q, ties))
        if r is None or s is None:
            continue
        if r < s and not all(_eq(v[j], v[r]) for j in range(r, s + 1)):
            rep.violations.append(("S3", q, f"rising component moves from P{r + 1} to P{s + 1} without a tie"))
    return rep


def appendix_template(Q) -> ThreeSystem:
    """The explicit three-system on ``[1, Q-1]`` built from one parameter ``Q > 2``.

    >>> appendix_template(3).values[0]
    (Fraction(1, 4), Fraction(1, 4), Fraction(1, 2))
    """
    Q = sc.parse_scalar(Q)
    if isinstance(Q, int):
        Q = Fraction(Q)
    if scmp(Q, 2) <= 0:
        raise ValueError("Q must exceed 2")
    one = Fraction(1)
    a = one / (Q + 1)
    b1 = (2 * Q - 1) / (Q + 1)
    b2 = (Q * Q - Q + 1) / (Q + 1)
    end = Q - 1
    c = (Q - 1) / (Q + 1)
    bps = (one, b1, b2, end)
    vals = (
        (a, a, c),
        (a, c, c),
        (a, c, c + b2 - b1),
        (a + end - b2, c, (Q - 1) ** 2 / (Q + 1)),
    )
    return ThreeSystem((one, end), bps, vals)


@dataclass
class ExtendedTemplate:
    system: ThreeSystem
    Q: object
    levels: int
    junctions: list  # right endpoints (Q-1)^{l+1}
    junction_checks: list  # (q, consistent) for each internal junction


def self_similar_extend(P: ThreeSystem, levels: int, Q=None) -> ExtendedTemplate:
    """Concatenate ``(Q-1)^l * P`` rescaled onto ``[(Q-1)^l, (Q-1)^{l+1}]``."""
    if levels < 0:
        raise ValueError("levels must be nonnegative")
    if Q is None:
        Q = P.interval[1] + 1
    r = Q - 1
    if not _eq(P.interval[0], 1) or not _eq(P.interval[1], r):
        raise ValueError("expected a template on [1, Q-1]")
    bps, vals, checks, ends = [], [], [], []
    scale = Fraction(1)
    for l in range(levels + 1):
        seg_b = [scale * x for x in P.breakpoints]
        seg_v = [tuple(scale * y for y in v) for v in P.values]
        if l > 0:
            # the level-l start must agree with the level-(l-1) end
            prev_end = (scale / r) * P.values[-1][0], (scale / r) * P.values[-1][1], (scale / r) * P.values[-1][2]
            ok = all(_eq(x, y) for x, y in zip(seg_v[0], prev_end)) and all(
                _eq(x, y) for x, y in zip(seg_v[0], vals[-1])
            )
            checks.append((seg_b[0], ok))
            seg_b, seg_v = seg_b[1:], seg_v[1:]
        bps.extend(seg_b)
        vals.extend(seg_v)
        ends.append(scale * r)
        scale = scale * r
    system = ThreeSystem((Fraction(1), ends[-1]), tuple(bps), tuple(vals))
    return ExtendedTemplate(system, Q, levels, ends, checks)


@dataclass
class ClaimsReport:
    bound_holds: bool  # P1 <= q/(Q+1) at every breakpoint
    equality_at_ends: bool  # P1 = q/(Q+1) at every right endpoint
    failures: list


def template_claims_check(ext: ExtendedTemplate) -> ClaimsReport:
    """Check ``P1(q) <= q/(Q+1)`` at all breakpoints and equality at the right
    endpoints of every level (linearity makes breakpoints sufficient)."""
    Q = ext.Q
    P = ext.system
    fails = []
    bound = True
    for q, v in zip(P.breakpoints, P.values):
        if scmp(v[0], q / (Q + 1)) > 0:
            bound = False
            fails.append(("bound", q))
    eq = True
    for q in ext.junctions:
        if not _eq(P(q)[0], q / (Q + 1)):
            eq = False
            fails.append(("equality", q))
    return ClaimsReport(bound, eq, fails)


@dataclass(frozen=True)
class TransferenceBounds:
    slope: object  # the affine slope in (0, 1)
    offset: object  # the affine offset > 0
    theta_norm: object
    direction: str  # "lower-unbounded" or "upper-eventual"
    coefficient: object
    exponent: object

    def bound_at(self, t):
        return self.coefficient * sc.power(t, self.exponent) if sc.is_exact(t) else self.coefficient * sc.BigReal(t) ** sc.BigReal(self.exponent)


def _check_affine(slope, offset):
    if not (scmp(0, slope) < 0 and scmp(slope, 1) < 0):
        raise ValueError("slope must lie in (0, 1)")
    if not scmp(offset, 0) > 0 and not (sc.is_exact(offset) and offset == 0):
        raise ValueError("offset must be positive")


def psi_lower_from_L1(slope, offset, theta_norm=0) -> TransferenceBounds:
    """If ``L1(q) > slope*q - offset`` on an unbounded set then
    ``psi(t) >= coefficient * t^exponent`` on an unbounded set."""
    _check_affine(slope, offset)
    C = sc.log(1 + theta_norm)
    coeff = sc.exp((-offset - C) / slope)
    return TransferenceBounds(slope, offset, theta_norm, "lower-unbounded", coeff, 1 - 1 / Fraction(slope) if sc.is_exact(slope) else 1 - 1 / slope)


def psi_upper_from_L1(slope, offset) -> TransferenceBounds:
    """If ``L1(q) <= slope*q + offset`` eventually then
    ``psi(t) <= coefficient * t^exponent`` eventually."""
    _check_affine(slope, offset)
    coeff = sc.exp(offset / slope)
    return TransferenceBounds(slope, offset, 0, "upper-eventual", coeff, 1 - 1 / Fraction(slope) if sc.is_exact(slope) else 1 - 1 / slope)


@dataclass
class DeviationReport:
    per_component: list  # (max deviation, argmax q) per component
    overall: object


def compare_L_to_template(profile_or_values, P: ThreeSystem, q_grid=None) -> DeviationReport:
    """Sup-deviation ``max_q |L_j(q) - P_j(q)|`` per component (descriptive)."""
    if hasattr(profile_or_values, "L"):
        q_grid, Ls = profile_or_values.q_grid, profile_or_values.L
    else:
        Ls = list(profile_or_values)
        if q_grid is None:
            raise ValueError("q_grid is required with raw values")
    per = []
    for j in range(3):
        best, where = None, None
        for q, L in zip(q_grid, Ls):
            dev = abs(L[j] - P(q)[j])
            if best is None or scmp(dev, best) > 0:
                best, where = dev, q
        per.append((best, where))
    overall = sc.smax(x for x, _ in per)
    return DeviationReport(per, overall)
