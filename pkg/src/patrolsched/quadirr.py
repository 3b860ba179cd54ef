"""Exact arithmetic in Q(sqrt 5)."""

from __future__ import annotations

from fractions import Fraction
from functools import total_ordering
from math import floor, isqrt, sqrt

SQRT5_FLOAT = sqrt(5.0)


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@total_ordering
class QuadIrr:
    """The number ``a + b*sqrt(5)`` with rational ``a`` and ``b``."""

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        self.a = _frac(a)
        self.b = _frac(b)

    @classmethod
    def coerce(cls, x) -> QuadIrr:
        if isinstance(x, QuadIrr):
            return x
        if isinstance(x, float):
            raise TypeError("floats do not embed exactly into Q(sqrt 5)")
        return cls(x, 0)

    def __repr__(self) -> str:
        return f"QuadIrr({self.a}, {self.b})"

    def __str__(self) -> str:
        return f"{self.a} + {self.b}*sqrt(5)"

    def is_rational(self) -> bool:
        return self.b == 0

    def conjugate(self) -> QuadIrr:
        return QuadIrr(self.a, -self.b)

    def norm(self) -> Fraction:
        """a^2 - 5 b^2, the product with the conjugate."""
        return self.a * self.a - 5 * self.b * self.b

    def sign(self) -> int:
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sa == sb or sb == 0:
            return sa
        if sa == 0:
            return sb
        # opposite signs: the larger magnitude wins, compared by squaring
        n = self.norm()
        return sa if n > 0 else sb if n < 0 else 0

    def __float__(self) -> float:
        if self.b == 0:
            return float(self.a)
        if (self.a > 0) == (self.b > 0) or self.a == 0:
            return float(self.a) + float(self.b) * SQRT5_FLOAT
        # avoid cancellation: a + b sqrt5 = norm / (a - b sqrt5)
        return float(self.norm()) / (float(self.a) - float(self.b) * SQRT5_FLOAT)

    def __floor__(self) -> int:
        if self.b == 0:
            return floor(self.a)
        bits = 64 + max(abs(self.a), abs(self.b), 1).numerator.bit_length()
        approx = Fraction(isqrt(5 << (2 * bits)), 1 << bits)
        guess = floor(self.a + self.b * approx)
        while self < guess:
            guess -= 1
        while self >= guess + 1:
            guess += 1
        return guess

    def frac(self) -> QuadIrr:
        """The fractional part, in [0, 1)."""
        return self - floor(self)

    def __hash__(self):
        return hash((self.a, self.b)) if self.b else hash(self.a)

    def __eq__(self, other):
        try:
            o = QuadIrr.coerce(other)
        except TypeError:
            return float(self) == other
        return self.a == o.a and self.b == o.b

    def __lt__(self, other):
        if isinstance(other, float):
            return float(self) < other
        return (self - other).sign() < 0

    def __neg__(self):
        return QuadIrr(-self.a, -self.b)

    def __pos__(self):
        return self

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __add__(self, other):
        if isinstance(other, float):
            return float(self) + other
        o = QuadIrr.coerce(other)
        return QuadIrr(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, float):
            return float(self) - other
        o = QuadIrr.coerce(other)
        return QuadIrr(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, float):
            return float(self) * other
        o = QuadIrr.coerce(other)
        return QuadIrr(self.a * o.a + 5 * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def inverse(self) -> QuadIrr:
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt 5)")
        return QuadIrr(self.a / n, -self.b / n)

    def __truediv__(self, other):
        if isinstance(other, float):
            return float(self) / other
        return self * QuadIrr.coerce(other).inverse()

    def __rtruediv__(self, other):
        if isinstance(other, float):
            return other / float(self)
        return QuadIrr.coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result, base = QuadIrr(1), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result


SQRT5 = QuadIrr(0, 1)
PHI = QuadIrr(Fraction(1, 2), Fraction(1, 2))
INV_PHI = QuadIrr(Fraction(-1, 2), Fraction(1, 2))
