"""Golden Ratio schedule: exact stepping, Fibonacci toolkit, three-gap law.

The schedule visits target i at step t when (lambda + phi*t) mod 1 falls in
[P_i, P_{i+1}), where P_i are the cumulative frequencies and lambda is a
uniform random phase.  lambda is never materialised: only a dyadic prefix
``[l/2^k, (l+1)/2^k)`` is committed, and it is extended one random bit at
a time whenever the image of that prefix straddles an interval boundary.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import ceil, isqrt, log
from typing import Iterable, Sequence

import numpy as np

from patrolsched.core import HALF, InvalidValuesError, frequency_vector
from patrolsched.quadirr import INV_PHI, PHI, QuadIrr

PHI_FLOAT = float(PHI)

# floor(phi * 2^96); (t * PHI_FIX) mod 2^96 approximates frac(phi t) * 2^96 to within t
_FIX_BITS = 96
_FIX_MASK = (1 << _FIX_BITS) - 1
PHI_FIX = ((1 << _FIX_BITS) + isqrt(5 << (2 * _FIX_BITS))) // 2
# slack for float comparisons against interval boundaries; true errors are < 1e-15
_EPS = 1e-12


def fib(k: int) -> int:
    """Fibonacci number with F_0 = 0, F_1 = 1."""
    if k < 0:
        raise ValueError("k must be non-negative")
    a, b = 0, 1
    for _ in range(k):
        a, b = b, a + b
    return a


def compare_phi(numerator: int, denominator: int) -> int:
    """Sign of numerator/denominator - phi: -1 (less) or +1 (greater).

    Exact: for N >= 0, N/D > phi iff N^2 - N*D - D^2 > 0, since phi is the
    positive root of x^2 - x - 1.  Equality is impossible.
    """
    if denominator <= 0:
        raise ValueError("denominator must be positive")
    if numerator < 0:
        return -1
    return 1 if numerator * numerator - numerator * denominator - denominator * denominator > 0 else -1


def _phi_exceeds(r: Fraction) -> bool:
    return compare_phi(r.numerator, r.denominator) < 0


@lru_cache(maxsize=None)
def inv_phi_power(j: int) -> QuadIrr:
    """(1/phi)^j, exactly."""
    return INV_PHI**j


def three_gap_range(p) -> int:
    """Smallest k with (1/phi)^(k+1) <= p."""
    if not p > 0:
        raise InvalidValuesError("p must be positive")
    k = max(0, ceil(log(float(p)) / log(1 / PHI_FLOAT)) - 1)
    if isinstance(p, float):
        # float powers are accurate to ~1e-16 relative; settle near-ties exactly
        for j in (k, k + 1):
            if abs(float(inv_phi_power(j)) - p) <= 1e-12 * p:
                return three_gap_range(Fraction(p))
        while k > 0 and float(inv_phi_power(k)) <= p:
            k -= 1
        while float(inv_phi_power(k + 1)) > p:
            k += 1
        return k
    exact = QuadIrr.coerce(p)
    while k > 0 and inv_phi_power(k) <= exact:
        k -= 1
    while inv_phi_power(k + 1) > exact:
        k += 1
    return k


@dataclass(frozen=True)
class ThreeGapDistribution:
    """Attacker-side gap law of one target of the Golden Ratio schedule."""

    p: object
    k: int
    support: tuple[int, int, int]
    probabilities: tuple

    def __post_init__(self):
        if any(q < 0 for q in self.probabilities):
            raise AssertionError("negative return probability")
        total = sum(self.probabilities)
        if isinstance(total, QuadIrr):
            if total != 1:
                raise AssertionError("return probabilities do not sum to 1")
        elif abs(total - 1) > 1e-9:
            raise AssertionError("return probabilities do not sum to 1")

    def float_probabilities(self) -> tuple[float, float, float]:
        return tuple(float(q) for q in self.probabilities)

    def gap_distribution(self):
        from patrolsched.core import GapDistribution

        return GapDistribution(self.support, self.float_probabilities(), float(self.p))


def three_gap_distribution(p) -> ThreeGapDistribution:
    """Return-time law for an interval of length p in (0, 1/2].

    Exact in Q(sqrt 5) when p is a Fraction or QuadIrr, binary64 when p is
    a float.
    """
    if not (0 < p <= HALF):
        raise InvalidValuesError(f"p must lie in (0, 1/2], got {p}")
    k = three_gap_range(p)
    x1, x2, x3 = fib(k + 1), fib(k + 2), fib(k + 3)
    if isinstance(p, float):
        pw = [float(inv_phi_power(j)) for j in (k, k + 1, k + 2)]
    else:
        p = p if isinstance(p, QuadIrr) else Fraction(p)
        pw = [inv_phi_power(j) for j in (k, k + 1, k + 2)]
    probs = (x1 * (p - pw[1]), x2 * (p - pw[2]), x3 * (pw[0] - p))
    return ThreeGapDistribution(p, k, (x1, x2, x3), probs)


def golden_quasi_regularity(p) -> Fraction:
    """Worst gap ratio F_(k+3)/F_(k+1) of a target with frequency p."""
    if not (0 < p <= HALF):
        raise InvalidValuesError(f"p must lie in (0, 1/2], got {p}")
    k = three_gap_range(p)
    return Fraction(fib(k + 3), fib(k + 1))


class GoldenState:
    """Stepping cursor for the Golden Ratio schedule.

    Mutable; use one instance per thread.  ``bits`` pre-commits a phase
    prefix (a string of '0'/'1'); further bits come from ``rng``.
    """

    def __init__(self, frequencies: Iterable, rng: np.random.Generator | None = None, bits: str = ""):
        self.frequencies = frequency_vector(frequencies)
        self.n = len(self.frequencies)
        cum = [Fraction(0)]
        for v in self.frequencies:
            cum.append(cum[-1] + v)
        self.boundaries = tuple(cum)
        lifted = [(cum[j] + d, j) for d in range(3) for j in range(self.n)]
        self._bx = [b for b, _ in lifted]
        self._bf = [float(b) for b in self._bx]
        self._tg = [j for _, j in lifted]
        self.rng = rng
        self._pending = [int(c) for c in reversed(bits)]
        if any(c not in (0, 1) for c in self._pending):
            raise ValueError("bits must be a string of 0s and 1s")
        self._word = 0
        self._word_left = 0
        self.lam_num = 0
        self.lam_bits = 0
        self._lf = 0.0
        self._w = 1.0
        self.t = 0

    @property
    def lambda_bits(self) -> str:
        if self.lam_bits == 0:
            return ""
        return format(self.lam_num, f"0{self.lam_bits}b")

    @property
    def lambda_interval(self) -> tuple[Fraction, Fraction]:
        lo = Fraction(self.lam_num, 1 << self.lam_bits)
        return lo, lo + Fraction(1, 1 << self.lam_bits)

    def _next_bit(self) -> int:
        if self._pending:
            return self._pending.pop()
        if self.rng is None:
            raise RuntimeError("phase needs more bits but no rng was supplied")
        if self._word_left == 0:
            self._word = int(self.rng.integers(0, 2**64, dtype=np.uint64))
            self._word_left = 64
        self._word_left -= 1
        return (self._word >> self._word_left) & 1

    def extend(self) -> None:
        """Commit one more random bit of the phase."""
        self.lam_num = 2 * self.lam_num + self._next_bit()
        self.lam_bits += 1
        self._lf = self.lam_num / (1 << self.lam_bits)
        self._w = 2.0**-self.lam_bits

    def _resolve_exact(self, t: int, lo: int, hi: int) -> int | None:
        low, high = self.lambda_interval
        mid = (low + high) / 2
        f = (t + isqrt(5 * t * t)) // 2  # floor(phi t)
        below_mid = 0
        for i in range(lo, hi):
            b = self._bx[i]
            if t == 0:
                inside = low < b < high
                at_or_below = b <= mid
            else:
                inside = _phi_exceeds((b - high + f) / t) and not _phi_exceeds((b - low + f) / t)
                at_or_below = not _phi_exceeds((b - mid + f) / t)
            if inside:
                return None
            below_mid += at_or_below
        return self._tg[lo - 1 + below_mid]

    def step(self) -> int:
        """Target visited at the current step; advances the cursor."""
        t = self.t
        self.t += 1
        if self.n == 1:
            return 0
        y = ((t * PHI_FIX) & _FIX_MASK) / (1 << _FIX_BITS)
        bf = self._bf
        while True:
            s = self._lf + y
            e = s + self._w
            lo = bisect_left(bf, s - _EPS)
            hi = bisect_right(bf, e + _EPS)
            if lo == hi:
                return self._tg[lo - 1]
            if any(s + _EPS < bf[i] < e - _EPS for i in range(lo, hi)):
                self.extend()
                continue
            target = self._resolve_exact(t, lo, hi)
            if target is not None:
                return target
            self.extend()

    def run(self, steps: int) -> np.ndarray:
        out = np.empty(steps, dtype=np.int64)
        for i in range(steps):
            out[i] = self.step()
        return out


def golden_step(state: GoldenState) -> tuple[int, GoldenState]:
    return state.step(), state


def golden_trajectory(frequencies: Sequence, steps: int, rng: np.random.Generator) -> np.ndarray:
    return GoldenState(frequencies, rng).run(steps)


def exact_target(frequencies: Sequence, lam: Fraction, t: int) -> int:
    """Target at step t for a fully specified rational phase (reference path).

    Uses only Q(sqrt 5) arithmetic; slow but independent of the cursor.
    """
    freqs = frequency_vector(frequencies)
    x = (QuadIrr(lam) + PHI * t).frac()
    acc = Fraction(0)
    for i, v in enumerate(freqs):
        acc += v
        if x < acc:
            return i
    raise AssertionError("point outside [0, 1)")
