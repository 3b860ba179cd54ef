"""Dependent rounding of a probability vector onto dyadic interval endpoints.

Every coordinate p_i lives in I_i = [2^-m_i, 2^(1-m_i)].  Pairs of interior
coordinates are moved in opposite directions, unbiasedly, until at most
one coordinate is strictly inside its interval.  Pairs are always the two
lowest-indexed interior coordinates, which makes the enumerated mixture
and the sampler identical in distribution.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from patrolsched.core import InvalidValuesError, ValueVector
from patrolsched.rng import bernoulli

MAX_ENUMERATE = 20

Interval = tuple[Fraction, Fraction]


@dataclass(frozen=True)
class RoundingOutcome:
    q: tuple[Fraction, ...]
    weight: Fraction

    def interior(self, intervals: Sequence[Interval]) -> list[int]:
        return _interior(self.q, intervals)


def dyadic_exponent(p: Fraction) -> int:
    """The m with 2^-m <= p < 2^(1-m)."""
    p = Fraction(p)
    if p <= 0:
        raise InvalidValuesError(f"probability must be positive: {p}")
    # floor(log2 p) is e or e - 1
    e = p.numerator.bit_length() - p.denominator.bit_length()
    if Fraction(2) ** e > p:
        e -= 1
    return -e


def dyadic_intervals(p: Sequence[Fraction]) -> list[tuple[int, Interval]]:
    """``(m_i, [2^-m_i, 2^(1-m_i)])`` for each coordinate."""
    out = []
    for v in p:
        m = dyadic_exponent(v)
        lo = Fraction(2) ** -m
        out.append((m, (lo, 2 * lo)))
    return out


def _interior(q: Sequence[Fraction], intervals: Sequence[Interval]) -> list[int]:
    return [i for i, (v, (lo, hi)) in enumerate(zip(q, intervals)) if lo < v < hi]


def round_step_outcomes(
    p_i: Fraction, p_j: Fraction, interval_i: Interval, interval_j: Interval
) -> list[tuple[tuple[Fraction, Fraction], Fraction]]:
    """Both branches of one rounding move, with their probabilities."""
    (li, ri), (lj, rj) = interval_i, interval_j
    if not (li < p_i < ri and lj < p_j < rj):
        raise InvalidValuesError("both coordinates must be strictly inside their intervals")
    eps_i, eps_j = p_i - li, p_j - lj
    d_i = min(eps_i, rj - lj - eps_j)
    d_j = min(eps_j, ri - li - eps_i)
    total = d_i + d_j
    return [
        ((p_i - d_i, p_j + d_i), d_j / total),
        ((p_i + d_j, p_j - d_j), d_i / total),
    ]


def round_step(
    p_i: Fraction,
    p_j: Fraction,
    interval_i: Interval,
    interval_j: Interval,
    rng: np.random.Generator,
) -> tuple[Fraction, Fraction]:
    (down, prob_down), (up, _) = round_step_outcomes(p_i, p_j, interval_i, interval_j)
    return down if bernoulli(rng, prob_down) else up


def round_to_dyadic(p: ValueVector, rng: np.random.Generator) -> RoundingOutcome:
    """Sample one rounded vector; ``weight`` is its probability."""
    intervals = [iv for _, iv in dyadic_intervals(p)]
    q = list(p)
    weight = Fraction(1)
    while len(inner := _interior(q, intervals)) >= 2:
        i, j = inner[0], inner[1]
        branches = round_step_outcomes(q[i], q[j], intervals[i], intervals[j])
        (q[i], q[j]), w = branches[0] if bernoulli(rng, branches[0][1]) else branches[1]
        weight *= w
    return RoundingOutcome(tuple(q), weight)


def enumerate_outcomes(p: ValueVector) -> list[RoundingOutcome]:
    """Exact support of the rounding distribution, identical outcomes merged."""
    if len(p) > MAX_ENUMERATE:
        raise InvalidValuesError(f"n={len(p)} is too large to enumerate; use sampling mode")
    intervals = [iv for _, iv in dyadic_intervals(p)]
    merged: dict[tuple[Fraction, ...], Fraction] = {}

    def walk(q: tuple[Fraction, ...], weight: Fraction) -> None:
        inner = _interior(q, intervals)
        if len(inner) < 2:
            merged[q] = merged.get(q, Fraction(0)) + weight
            return
        i, j = inner[0], inner[1]
        for (vi, vj), w in round_step_outcomes(q[i], q[j], intervals[i], intervals[j]):
            if w == 0:
                continue
            nq = list(q)
            nq[i], nq[j] = vi, vj
            walk(tuple(nq), weight * w)

    walk(tuple(p), Fraction(1))
    return [RoundingOutcome(q, w) for q, w in merged.items()]
