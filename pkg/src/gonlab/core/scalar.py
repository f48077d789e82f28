"""Scalars: exact rationals, exact quadratic irrationals and certified reals.

Three kinds of number flow through the package:

* ``int`` / ``fractions.Fraction`` for rational data,
* :class:`Quadratic` for ``a + b*sqrt(D)`` with rational ``a, b`` and a
  squarefree ``D > 1``,
* :class:`BigReal`, an outward-rounded interval (mpmath ``iv`` context) for
  everything else (exponentials, mixed quadratic fields, decimal input).

Arithmetic between exact kinds stays exact whenever the result lives in the
same field; anything else promotes to :class:`BigReal`, whose error radius
only ever grows.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import total_ordering
from numbers import Rational

import mpmath
from mpmath import iv, mp

DEFAULT_PRECISION = 256

mp.prec = DEFAULT_PRECISION
iv.prec = DEFAULT_PRECISION


def set_precision(bits: int) -> None:
    """Set the working precision (bits) used for every new BigReal."""
    if bits < 53:
        raise ValueError("precision must be at least 53 bits")
    mp.prec = bits
    iv.prec = bits


class UndecidedComparison(ArithmeticError):
    """Raised when two overlapping intervals are compared."""


def squarefree_split(n: int) -> tuple[int, int]:
    """Return ``(k, D)`` with ``n = k**2 * D`` and ``D`` squarefree."""
    if n <= 0:
        raise ValueError("expected a positive integer")
    k, D = 1, n
    p = 2
    while p * p <= D:
        while D % (p * p) == 0:
            D //= p * p
            k *= p
        p += 1
    return k, D


def _floor_sqrt_times(Y: int, D: int) -> int:
    # floor(Y*sqrt(D)) for integer Y and non-square D
    if Y >= 0:
        return math.isqrt(Y * Y * D)
    return -math.isqrt(Y * Y * D) - 1


@total_ordering
class Quadratic:
    """Exact element ``a + b*sqrt(D)`` of a real quadratic field.

    Construct through :func:`quadratic` so that ``b == 0`` collapses to a
    plain ``Fraction``.
    """

    __slots__ = ("a", "b", "D")

    def __init__(self, a, b, D: int):
        self.a = Fraction(a)
        self.b = Fraction(b)
        self.D = int(D)
        if self.D <= 1:
            raise ValueError("D must be a squarefree integer > 1")

    # -- helpers -----------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Quadratic):
            return other if other.D == self.D else None
        if isinstance(other, (int, Fraction)):
            return Quadratic(other, 0, self.D)
        if isinstance(other, Rational):
            return Quadratic(Fraction(other), 0, self.D)
        return None

    def conjugate(self) -> Quadratic:
        return Quadratic(self.a, -self.b, self.D)

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.D

    def sign(self) -> int:
        a, b = self.a, self.b
        sa = (a > 0) - (a < 0)
        sb = (b > 0) - (b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 with b^2 D
        lhs, rhs = a * a, b * b * self.D
        return sa if lhs > rhs else sb

    def __floor__(self) -> int:
        # a + b sqrt(D) = (X + Y sqrt(D)) / Z with Z > 0
        Z = self.a.denominator * self.b.denominator
        X = self.a.numerator * self.b.denominator
        Y = self.b.numerator * self.a.denominator
        return (X + _floor_sqrt_times(Y, self.D)) // Z

    def __ceil__(self) -> int:
        return -math.floor(-self)

    # -- arithmetic --------------------------------------------------------
    def __neg__(self):
        return Quadratic(-self.a, -self.b, self.D)

    def __pos__(self):
        return self

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented if not isinstance(other, (Quadratic, BigReal, float)) else BigReal(self) + other
        return quadratic(self.a + o.a, self.b + o.b, self.D)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented if not isinstance(other, (Quadratic, BigReal, float)) else BigReal(self) - other
        return quadratic(self.a - o.a, self.b - o.b, self.D)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented if not isinstance(other, (Quadratic, BigReal, float)) else BigReal(self) * other
        return quadratic(self.a * o.a + self.b * o.b * self.D, self.a * o.b + self.b * o.a, self.D)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented if not isinstance(other, (Quadratic, BigReal, float)) else BigReal(self) / other
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero")
        c = o.conjugate()
        return quadratic((self.a * c.a + self.b * c.b * self.D) / n, (self.a * c.b + self.b * c.a) / n, self.D)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, k):
        if not isinstance(k, int):
            return BigReal(self) ** k
        if k < 0:
            return 1 / (self ** (-k))
        result = Fraction(1)
        base = self
        while k:
            if k & 1:
                result = base * result
            base = base * base
            k >>= 1
        return result

    # -- comparisons -------------------------------------------------------
    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (BigReal, float)):
                return BigReal(self) == other
            if isinstance(other, Quadratic):
                return False  # distinct fields: irrational parts never agree
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __lt__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (Quadratic, BigReal, float)):
                return BigReal(self) < other
            return NotImplemented
        return (self - o) < 0 if isinstance(self - o, Fraction) else (self - o).sign() < 0

    def __hash__(self):
        return hash((self.a, self.b, self.D))

    def __float__(self):
        return float(self.to_mpf())

    def to_mpf(self):
        return mpmath.mpf(self.a.numerator) / self.a.denominator + (
            mpmath.mpf(self.b.numerator) / self.b.denominator
        ) * mpmath.sqrt(self.D)

    def to_interval(self):
        return iv.mpf(self.a.numerator) / self.a.denominator + (
            iv.mpf(self.b.numerator) / self.b.denominator
        ) * iv.sqrt(self.D)

    def __repr__(self):
        return f"Quadratic({self.a}, {self.b}, {self.D})"

    def __str__(self):
        return render(self)


def quadratic(a, b, D: int):
    """Build ``a + b*sqrt(D)``; returns a ``Fraction`` when ``b == 0``."""
    b = Fraction(b)
    if b == 0:
        return Fraction(a)
    k, Dsf = squarefree_split(int(D))
    if Dsf == 1:
        return Fraction(a) + b * k
    return Quadratic(a, b * k, Dsf)


def sqrt_int(n: int):
    """Exact square root of a nonnegative integer (Fraction or Quadratic)."""
    if n < 0:
        raise ValueError("negative radicand")
    if n == 0:
        return Fraction(0)
    return quadratic(0, 1, n)


GOLDEN_RATIO = Quadratic(Fraction(1, 2), Fraction(1, 2), 5)


class BigReal:
    """A real number known to lie in a closed interval (outward rounded)."""

    __slots__ = ("iv",)

    def __init__(self, value):
        if isinstance(value, BigReal):
            self.iv = value.iv
        elif isinstance(value, Quadratic):
            self.iv = value.to_interval()
        elif isinstance(value, Fraction):
            self.iv = iv.mpf(value.numerator) / value.denominator
        elif isinstance(value, int):
            self.iv = iv.mpf(value)
        elif isinstance(value, (list, tuple)):
            self.iv = iv.mpf([str(value[0]), str(value[1])])
        else:
            self.iv = iv.mpf(value)

    @classmethod
    def from_interval(cls, interval) -> BigReal:
        out = cls.__new__(cls)
        out.iv = interval
        return out

    @classmethod
    def from_decimal(cls, text: str) -> BigReal:
        return cls(Fraction(text))

    # -- interval data ------------------------------------------------------
    @property
    def lo(self):
        return mpmath.mpf(self.iv.a)

    @property
    def hi(self):
        return mpmath.mpf(self.iv.b)

    @property
    def mid(self):
        return mpmath.mpf(self.iv.mid)

    @property
    def radius(self):
        return mpmath.mpf(self.iv.delta) / 2

    def contains(self, x) -> bool:
        other = _as_interval(x)
        return self.iv.a <= other.a and other.b <= self.iv.b

    def to_mpf(self):
        return self.mid

    def __float__(self):
        return float(self.mid)

    # -- arithmetic --------------------------------------------------------
    def _wrap(self, value):
        return BigReal.from_interval(value)

    def __neg__(self):
        return self._wrap(-self.iv)

    def __pos__(self):
        return self

    def __abs__(self):
        return self._wrap(abs(self.iv))

    def __add__(self, other):
        return self._wrap(self.iv + _as_interval(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.iv - _as_interval(other))

    def __rsub__(self, other):
        return self._wrap(_as_interval(other) - self.iv)

    def __mul__(self, other):
        return self._wrap(self.iv * _as_interval(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        den = _as_interval(other)
        if den.a <= 0 <= den.b:
            raise ZeroDivisionError("interval divisor contains zero")
        return self._wrap(self.iv / den)

    def __rtruediv__(self, other):
        if self.iv.a <= 0 <= self.iv.b:
            raise ZeroDivisionError("interval divisor contains zero")
        return self._wrap(_as_interval(other) / self.iv)

    def __pow__(self, k):
        if isinstance(k, int):
            return self._wrap(self.iv ** k)
        if self.iv.a <= 0:
            if self.iv.b <= 0 and self.iv.a == 0:
                return BigReal(0)
            raise ValueError("non-integer power of an interval reaching zero or below")
        return self._wrap(iv.exp(_as_interval(k) * iv.log(self.iv)))

    def __floor__(self) -> int:
        lo = int(mpmath.floor(self.iv.a))
        hi = int(mpmath.floor(self.iv.b))
        if lo != hi:
            raise UndecidedComparison(f"floor undecided for {self!r}")
        return lo

    def __ceil__(self) -> int:
        return -math.floor(-self)

    # -- comparisons -------------------------------------------------------
    def _cmp(self, other) -> int:
        """Order two reals; overlapping intervals compare equal."""
        o = _as_interval(other)
        if self.iv.b < o.a:
            return -1
        if self.iv.a > o.b:
            return 1
        return 0

    def overlaps(self, other) -> bool:
        return self._cmp(other) == 0

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        if not isinstance(other, (BigReal, Quadratic, int, Fraction, float)):
            return NotImplemented
        return self._cmp(other) == 0

    def __hash__(self):
        return hash(("BigReal", float(self.mid)))

    def __repr__(self):
        return f"BigReal({mpmath.nstr(self.mid, 20)} ± {mpmath.nstr(self.radius, 3)})"

    def __str__(self):
        return render(self)


def _as_interval(x):
    if isinstance(x, BigReal):
        return x.iv
    if isinstance(x, Quadratic):
        return x.to_interval()
    if isinstance(x, Fraction):
        return iv.mpf(x.numerator) / x.denominator
    if isinstance(x, int):
        return iv.mpf(x)
    if isinstance(x, float):
        return iv.mpf(x)
    if isinstance(x, mpmath.mpf):
        return iv.mpf(x)
    return iv.mpf(x)


Scalar = "int | Fraction | Quadratic | BigReal"


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, Quadratic))


def to_mpf(x):
    if isinstance(x, (Quadratic, BigReal)):
        return x.to_mpf()
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def to_float(x) -> float:
    return float(to_mpf(x)) if not isinstance(x, (int, float)) else float(x)


def to_bigreal(x) -> BigReal:
    return x if isinstance(x, BigReal) else BigReal(x)


def is_zero(x) -> bool:
    """Exact zero test; for BigReal, whether the interval is the point 0."""
    if isinstance(x, BigReal):
        return x.iv.a == 0 and x.iv.b == 0
    return x == 0


def may_be_zero(x) -> bool:
    if isinstance(x, BigReal):
        return x.iv.a <= 0 <= x.iv.b
    return x == 0


def sign(x) -> int:
    if isinstance(x, Quadratic):
        return x.sign()
    if isinstance(x, BigReal):
        return x._cmp(0)
    return (x > 0) - (x < 0)


def smax(values):
    """Maximum that also works on overlapping intervals (hull of candidates)."""
    values = list(values)
    if not values:
        raise ValueError("smax of empty sequence")
    if all(is_exact(v) for v in values):
        return max(values)
    ivs = [_as_interval(v) for v in values]
    lo = max(mpmath.mpf(v.a) for v in ivs)
    hi = max(mpmath.mpf(v.b) for v in ivs)
    return BigReal.from_interval(iv.mpf([lo, hi]))


def smin(values):
    values = list(values)
    return -smax(-v for v in values)


def exp(x) -> BigReal | int:
    if is_exact(x) and x == 0:
        return 1
    return BigReal.from_interval(iv.exp(_as_interval(x)))


def log(x) -> BigReal | int:
    if is_exact(x) and x == 1:
        return 0
    return BigReal.from_interval(iv.log(_as_interval(x)))


def sqrt(x):
    """Square root; exact for rationals that are squares up to a quadratic field."""
    if isinstance(x, int):
        x = Fraction(x)
    if isinstance(x, Fraction):
        if x < 0:
            raise ValueError("square root of a negative number")
        p, q = x.numerator, x.denominator
        # sqrt(p/q) = sqrt(p*q)/q
        return quadratic(0, Fraction(1, q), p * q) if p else Fraction(0)
    return BigReal.from_interval(iv.sqrt(_as_interval(x)))


def power(x, e):
    """``x**e`` for rational exponent ``e``; exact when the result stays rational."""
    e = Fraction(e)
    if e.denominator == 1:
        return x ** int(e)
    if isinstance(x, (int, Fraction)) and x >= 0:
        base = Fraction(x) ** e.numerator
        r = e.denominator
        num = _exact_root(base.numerator, r)
        den = _exact_root(base.denominator, r)
        if num is not None and den is not None:
            return Fraction(num, den)
        if r == 2:
            return sqrt(base)
    if is_zero(x):
        return Fraction(0)
    return BigReal(x) ** BigReal(e)


def _exact_root(n: int, r: int):
    if n < 0:
        return None
    guess = round(n ** (1.0 / r)) if n < 2**1000 else int(mpmath.root(n, r))
    for g in (guess - 1, guess, guess + 1):
        if g >= 0 and g**r == n:
            return g
    return None


def frac_distance(x):
    """Distance from ``x`` to the nearest integer (exact for exact input)."""
    if isinstance(x, BigReal):
        f = mpmath.floor(x.mid)
        lo = x - int(f)
        hi = int(f) + 1 - x
        # the nearest integer to the midpoint is one of f, f+1
        return smin([abs(lo), abs(hi)])
    k = math.floor(x)
    a = x - k
    b = (k + 1) - x
    return a if a <= b else b


def nearest_integer(x) -> int:
    """Nearest integer to ``x``; ties go to the smaller integer."""
    k = math.floor(x) if not isinstance(x, BigReal) else int(mpmath.floor(x.mid))
    a = x - k
    b = (k + 1) - x
    try:
        return k if a <= b else k + 1
    except UndecidedComparison:
        return k


# -- literals -------------------------------------------------------------

_RAT = r"[+-]?\d+(?:/\d+)?"
_QUAD_RE = re.compile(
    rf"^\s*(?P<a>{_RAT})?\s*(?P<op>[+-])?\s*(?:(?P<b>\d+(?:/\d+)?)\s*\*\s*)?sqrt\((?P<D>\d+)\)\s*$"
)


def parse_scalar(text):
    """Parse a scalar literal.

    Accepted forms: ``rat:p/q``, ``sqrt:D``, ``a+b*sqrt(D)`` (rational ``a``,
    ``b``; either may be omitted), ``dec:<digits>`` (certified real) and bare
    integers or fractions.
    """
    if isinstance(text, (int, Fraction, Quadratic, BigReal)):
        return text
    if isinstance(text, float):
        raise ValueError("floats are not accepted as scalars; use a literal")
    s = str(text).strip()
    if s.startswith("rat:"):
        return Fraction(s[4:])
    if s.startswith("sqrt:"):
        return sqrt_int(int(s[5:]))
    if s.startswith("-sqrt:"):
        return -sqrt_int(int(s[6:]))
    if s.startswith("dec:"):
        return BigReal.from_decimal(s[4:])
    if s == "phi":
        return GOLDEN_RATIO
    if re.fullmatch(_RAT, s):
        return Fraction(s)
    m = _QUAD_RE.match(s)
    if m:
        a = Fraction(m.group("a") or 0)
        b = Fraction(m.group("b") or 1)
        if m.group("op") == "-":
            b = -b
        elif m.group("op") is None and m.group("a") is not None:
            raise ValueError(f"malformed quadratic literal {text!r}")
        root = sqrt_int(int(m.group("D")))
        return a + b * root
    raise ValueError(f"unrecognised scalar literal {text!r}")


def render(x, digits: int = 30, symbolic: bool = True) -> str:
    """Render a scalar; exact values symbolically unless ``symbolic`` is off."""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction) and symbolic:
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, Quadratic) and symbolic:
        a = "" if x.a == 0 else render(x.a)
        b = abs(x.b)
        coef = "" if b == 1 else f"{render(b)}*"
        op = "-" if x.b < 0 else ("+" if a else "")
        return f"{a}{op}{coef}sqrt({x.D})"
    return mpmath.nstr(to_mpf(x), digits, strip_zeros=False, min_fixed=-mpmath.inf, max_fixed=mpmath.inf)


def decimal(x, digits: int = 12) -> str:
    """Fixed decimal rendering used by CSV emitters."""
    return mpmath.nstr(to_mpf(x), digits, min_fixed=-mpmath.inf, max_fixed=mpmath.inf)
