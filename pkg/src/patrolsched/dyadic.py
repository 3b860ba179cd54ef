"""Optimal randomized 2-quasi-regular schedules from dyadic frequencies.

Pipeline: round the values to a vector ``q`` whose entries are powers of
two except for at most one, lay ``q`` out as a periodic sequence by
repeated halving, and start that sequence at a uniformly random phase.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

import numpy as np

from patrolsched.core import HALF, InvalidValuesError, PeriodicSequence, ValueVector
from patrolsched.rounding import (
    RoundingOutcome,
    dyadic_intervals,
    enumerate_outcomes,
    round_to_dyadic,
)


def is_power_of_two(x: Fraction) -> bool:
    x = Fraction(x)
    if x <= 0:
        return False
    a, b = x.numerator, x.denominator
    return (a == 1 and b & (b - 1) == 0) or (b == 1 and a & (a - 1) == 0)


def subset_with_sum(items: Sequence[Fraction], target: Fraction) -> list[int]:
    """Indices of a sub-multiset of powers of two summing exactly to ``target``.

    Greedy largest-first: with every item at most ``target`` and all items
    powers of two, the remainder is always a multiple of the next item, so
    the greedy pass never overshoots.
    """
    target = Fraction(target)
    if not is_power_of_two(target):
        raise InvalidValuesError(f"target {target} is not a power of two")
    if any(not is_power_of_two(x) for x in items):
        raise InvalidValuesError("items must be powers of two")
    if not items or max(items) > target or sum(items) < target:
        raise InvalidValuesError("need max(items) <= target <= sum(items)")
    remaining = target
    chosen = []
    for i in sorted(range(len(items)), key=lambda k: -items[k]):
        if remaining == 0:
            break
        if items[i] <= remaining:
            chosen.append(i)
            remaining -= items[i]
    if remaining != 0:  # unreachable given the preconditions
        raise AssertionError("greedy cover failed")
    return sorted(chosen)


def _interleave(even: list[int], odd: list[int]) -> list[int]:
    """Alternate two periodic sequences; each is stretched by a factor of 2."""
    period = lcm(len(even), len(odd))
    out = []
    for j in range(period):
        out.append(even[j % len(even)])
        out.append(odd[j % len(odd)])
    return out


def _regular(items: list[tuple[int, Fraction]]) -> list[int]:
    if len(items) == 1:
        return [items[0][0]]
    half = subset_with_sum([q for _, q in items], HALF)
    chosen = set(half)
    first = [(t, 2 * q) for k, (t, q) in enumerate(items) if k in chosen]
    rest = [(t, 2 * q) for k, (t, q) in enumerate(items) if k not in chosen]
    return _interleave(_regular(rest), _regular(first))


def _one_nonpower(items: list[tuple[int, Fraction]], special: int | None) -> list[int]:
    q_special = dict(items).get(special) if special is not None else None
    if q_special is None or is_power_of_two(q_special):
        return _regular(items)
    others = [(t, q) for t, q in items if t != special]
    if q_special <= HALF:
        half = set(subset_with_sum([q for _, q in others], HALF))
        regular_part = [(t, 2 * q) for k, (t, q) in enumerate(others) if k in half]
        rest = [(special, 2 * q_special)] + [
            (t, 2 * q) for k, (t, q) in enumerate(others) if k not in half
        ]
        return _interleave(_one_nonpower(rest, special), _regular(regular_part))
    rest = [(special, 2 * (q_special - HALF))] + [(t, 2 * q) for t, q in others]
    return _interleave(_one_nonpower(rest, special), [special])


def special_exponent(q: Fraction) -> int:
    """The m with 2^-(m+1) < q <= 2^-m, i.e. q = 2^-m - eps, 0 <= eps < 2^-(m+1)."""
    q = Fraction(q)
    if q <= 0:
        raise InvalidValuesError("non-positive entry")
    m = 0
    while Fraction(1, 2 ** (m + 1)) >= q:
        m += 1
    return m


@dataclass(frozen=True)
class DyadicVector:
    """Frequencies that are powers of two except possibly ``q[special]``."""

    q: tuple[Fraction, ...]
    special: int | None = None

    def __post_init__(self):
        q = tuple(Fraction(v) for v in self.q)
        if any(v <= 0 for v in q) or sum(q) != 1:
            raise InvalidValuesError("dyadic vector must be positive and sum to 1")
        for i, v in enumerate(q):
            if i != self.special and not is_power_of_two(v):
                raise InvalidValuesError(f"entry {i} = {v} is not a power of two")
        object.__setattr__(self, "q", q)

    def special_gaps(self) -> tuple[int, int] | None:
        """Allowed gaps {2^m, 2^(m+1)} of the special target."""
        if self.special is None:
            return None
        m = special_exponent(self.q[self.special])
        return 2**m, 2 ** (m + 1)


def schedule_all_powers(q: Sequence[Fraction]) -> PeriodicSequence:
    """A regular sequence: target i recurs exactly every 1/q_i steps."""
    vec = DyadicVector(tuple(q))
    return PeriodicSequence(tuple(_regular(list(enumerate(vec.q)))), len(vec.q))


def schedule_one_nonpower(vec: DyadicVector) -> PeriodicSequence:
    """Every target except ``vec.special`` recurs regularly; the special one
    recurs with gaps 2^m or 2^(m+1)."""
    return PeriodicSequence(tuple(_one_nonpower(list(enumerate(vec.q)), vec.special)), len(vec.q))


@dataclass(frozen=True)
class OptimalSampler:
    """Random 2-quasi-regular sequences whose expected frequencies are the values."""

    values: ValueVector

    @property
    def intervals(self):
        return [iv for _, iv in dyadic_intervals(self.values)]

    def sequence_for(self, q: Sequence[Fraction]) -> PeriodicSequence:
        inner = [i for i, (v, (lo, hi)) in enumerate(zip(q, self.intervals)) if lo < v < hi]
        if len(inner) > 1:
            raise InvalidValuesError("rounded vector has more than one interior coordinate")
        return schedule_one_nonpower(DyadicVector(tuple(q), inner[0] if inner else None))

    def draw(
        self, rng: np.random.Generator, shift_rng: np.random.Generator | None = None
    ) -> tuple[RoundingOutcome, PeriodicSequence]:
        """Round, lay out, then shift uniformly (``shift_rng`` defaults to ``rng``)."""
        outcome = round_to_dyadic(self.values, rng)
        seq = self.sequence_for(outcome.q)
        shift_rng = rng if shift_rng is None else shift_rng
        return outcome, seq.shifted(int(shift_rng.integers(seq.period)))

    def sample(self, rng: np.random.Generator) -> PeriodicSequence:
        return self.draw(rng)[1]

    def mixture(self) -> list[tuple[Fraction, PeriodicSequence]]:
        """The exact rounding mixture, one unshifted sequence per outcome.

        The uniform phase is implicit: cyclic gap statistics of a periodic
        sequence already describe its uniformly shifted version.
        """
        return [(o.weight, self.sequence_for(o.q)) for o in enumerate_outcomes(self.values)]


def build_optimal_sampler(values) -> OptimalSampler:
    if not isinstance(values, ValueVector):
        values = ValueVector(values)
    return OptimalSampler(values)
