"""Signed log-domain scalars.

Every tiny or huge positive quantity in the pipelines (mode coefficients,
schedules, gap targets) is carried as a sign plus the natural log of its
magnitude, so products and dominant-term sums stay computable far beyond
float range.  The magnitude field saturates at float limits; quantities
whose log itself overflows a double are outside the representable range
and the callers that need them raise rather than silently truncate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class LogValue:
    sign: int
    ln_mag: float = float("-inf")

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or +1, got {self.sign}")
        if math.isnan(self.ln_mag):
            raise ValueError("ln_mag is NaN")
        if math.isinf(self.ln_mag) and self.ln_mag < 0:
            object.__setattr__(self, "sign", 0)  # canonical zero
        if self.sign == 0:
            object.__setattr__(self, "ln_mag", float("-inf"))

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero() -> "LogValue":
        return LogValue(0)

    @staticmethod
    def one() -> "LogValue":
        return LogValue(1, 0.0)

    @staticmethod
    def from_float(x: float) -> "LogValue":
        if x == 0:
            return LogValue(0)
        if math.isnan(x) or math.isinf(x):
            raise ValueError(f"cannot represent {x}")
        return LogValue(1 if x > 0 else -1, math.log(abs(x)))

    @staticmethod
    def from_ln(ln_mag: float, sign: int = 1) -> "LogValue":
        return LogValue(sign, ln_mag)

    @staticmethod
    def from_fraction(q: Fraction) -> "LogValue":
        if q == 0:
            return LogValue(0)
        sign = 1 if q > 0 else -1
        # math.log accepts arbitrary-size ints, so huge exact rationals are fine
        return LogValue(sign, math.log(abs(q.numerator)) - math.log(q.denominator))

    # -- queries -------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    @property
    def is_positive(self) -> bool:
        return self.sign > 0

    def ln(self) -> float:
        """Natural log of a nonnegative value (-inf for the zero element)."""
        if self.sign < 0:
            raise ValueError("ln of a negative LogValue")
        return self.ln_mag if self.sign > 0 else float("-inf")

    def to_float(self) -> float:
        """Convert, under/overflowing to 0 / +-inf outside float range."""
        if self.sign == 0:
            return 0.0
        if self.ln_mag > 709.0:
            return math.inf * self.sign
        return self.sign * math.exp(self.ln_mag)

    __float__ = to_float

    # -- arithmetic ----------------------------------------------------

    def __neg__(self) -> "LogValue":
        return LogValue(-self.sign, self.ln_mag)

    def __abs__(self) -> "LogValue":
        return LogValue(abs(self.sign), self.ln_mag)

    def __mul__(self, other) -> "LogValue":
        other = _coerce(other)
        s = self.sign * other.sign
        if s == 0:
            return LogValue(0)
        return LogValue(s, self.ln_mag + other.ln_mag)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "LogValue":
        other = _coerce(other)
        if other.sign == 0:
            raise ZeroDivisionError("LogValue division by zero")
        if self.sign == 0:
            return LogValue(0)
        return LogValue(self.sign * other.sign, self.ln_mag - other.ln_mag)

    def __add__(self, other) -> "LogValue":
        other = _coerce(other)
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        a, b = self, other
        if b.ln_mag > a.ln_mag:
            a, b = b, a
        d = b.ln_mag - a.ln_mag  # <= 0
        if a.sign == b.sign:
            return LogValue(a.sign, a.ln_mag + math.log1p(math.exp(d)))
        if d == 0.0:
            return LogValue(0)  # exact cancellation
        return LogValue(a.sign, a.ln_mag + math.log1p(-math.exp(d)))

    __radd__ = __add__

    def __sub__(self, other) -> "LogValue":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "LogValue":
        return _coerce(other) + (-self)

    def powi(self, n: int) -> "LogValue":
        """Integer power."""
        if n == 0:
            return LogValue.one()
        if self.sign == 0:
            if n < 0:
                raise ZeroDivisionError("0 ** negative")
            return LogValue(0)
        s = self.sign if n % 2 else 1
        return LogValue(s, self.ln_mag * n)

    def powf(self, p: float) -> "LogValue":
        """Real power of a positive value."""
        if self.sign <= 0:
            raise ValueError("real power needs a positive LogValue")
        return LogValue(1, self.ln_mag * p)

    # -- total order by represented value -------------------------------

    def _cmp(self, other) -> int:
        other = _coerce(other)
        if self.sign != other.sign:
            return -1 if self.sign < other.sign else 1
        if self.sign == 0:
            return 0
        if self.ln_mag == other.ln_mag:
            return 0
        bigger_mag = self.ln_mag > other.ln_mag
        if self.sign > 0:
            return 1 if bigger_mag else -1
        return -1 if bigger_mag else 1

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        try:
            return self._cmp(other) == 0
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash((self.sign, self.ln_mag))

    def __repr__(self):
        if self.sign == 0:
            return "LogValue(0)"
        s = "-" if self.sign < 0 else ""
        return f"LogValue({s}exp({self.ln_mag!r}))"


def _coerce(x) -> LogValue:
    if isinstance(x, LogValue):
        return x
    if isinstance(x, Fraction):
        return LogValue.from_fraction(x)
    if isinstance(x, (int, float)):
        return LogValue.from_float(float(x))
    raise TypeError(f"cannot coerce {type(x)} to LogValue")


def log_sum(values) -> LogValue:
    """Sum of LogValues with a fixed left-to-right reduction order."""
    acc = LogValue.zero()
    for v in values:
        acc = acc + v
    return acc


def ln_int(n: int) -> float:
    """Natural log of a positive (arbitrary size) integer."""
    if n <= 0:
        raise ValueError("ln_int needs a positive integer")
    return math.log(n)


def ln_fraction(q: Fraction) -> float:
    if q <= 0:
        raise ValueError("ln_fraction needs a positive rational")
    return math.log(q.numerator) - math.log(q.denominator)


def dyadic_at_most(ln_value: float, guard: float = 1e-9) -> Fraction:
    """Largest power of two certainly <= exp(ln_value).

    The guard absorbs the rounding of ln_value itself, so the returned
    exact rational is a sound lower bound for outward-rounded checks.
    """
    if math.isinf(ln_value):
        raise OverflowError("log-domain value out of dyadic range")
    e = math.floor((ln_value - guard) / _LN2)
    if e >= 0:
        return Fraction(1 << e, 1)
    return Fraction(1, 1 << (-e))


def dyadic_at_least(ln_value: float, guard: float = 1e-9) -> Fraction:
    """Smallest power of two certainly >= exp(ln_value)."""
    if math.isinf(ln_value):
        raise OverflowError("log-domain value out of dyadic range")
    e = math.ceil((ln_value + guard) / _LN2)
    if e >= 0:
        return Fraction(1 << e, 1)
    return Fraction(1, 1 << (-e))
