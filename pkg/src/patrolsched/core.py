"""Exact domain types shared by the schedulers and the attacker oracle."""

from __future__ import annotations

from bisect import bisect_right
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence, Union

Number = Union[Fraction, float]

HALF = Fraction(1, 2)
FLOAT_TOL = 1e-12


class InvalidValuesError(ValueError):
    """A value or frequency vector violates its invariants."""


def to_fraction(x) -> Fraction:
    """Parse ``x`` into an exact rational.

    Accepts ints, Fractions and strings such as ``"1/3"`` or ``"0.25"``.
    Binary floats are rejected: they are almost never the rational the
    user meant.
    """
    if isinstance(x, bool):
        raise InvalidValuesError(f"not a rational: {x!r}")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidValuesError(f"not a rational: {x!r}") from exc
    raise InvalidValuesError(f"expected an exact rational, got {type(x).__name__} {x!r}")


def frequency_vector(values: Iterable) -> tuple[Fraction, ...]:
    """Positive rationals summing to exactly one (no upper bound per entry)."""
    vals = tuple(to_fraction(v) for v in values)
    if not vals:
        raise InvalidValuesError("empty value vector")
    for i, v in enumerate(vals):
        if v <= 0:
            raise InvalidValuesError(f"entry {i} is not positive: {v}")
    total = sum(vals)
    if total != 1:
        raise InvalidValuesError(f"entries sum to {total}, not 1")
    return vals


@dataclass(frozen=True)
class ValueVector:
    """Normalised target values, each in (0, 1/2], summing to one."""

    values: tuple[Fraction, ...]

    def __init__(self, values: Iterable):
        vals = frequency_vector(values)
        for i, v in enumerate(vals):
            if v > HALF:
                raise InvalidValuesError(f"entry {i} exceeds 1/2: {v}")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    @property
    def n(self) -> int:
        return len(self.values)

    def as_strings(self) -> list[str]:
        return [str(v) for v in self.values]


@dataclass(frozen=True)
class PeriodicSequence:
    """One period of a deterministic, periodically repeated visit sequence.

    ``n_targets`` defaults to ``max(entries) + 1``; every target below it
    must occur at least once per period.
    """

    entries: tuple[int, ...]
    n_targets: int = -1

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        if not entries:
            raise InvalidValuesError("empty sequence")
        if min(entries) < 0:
            raise InvalidValuesError("negative target index")
        n = self.n_targets if self.n_targets >= 0 else max(entries) + 1
        missing = sorted(set(range(n)) - set(entries))
        if missing:
            raise InvalidValuesError(f"targets never visited: {missing}")
        if max(entries) >= n:
            raise InvalidValuesError(f"target index {max(entries)} >= n_targets={n}")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "n_targets", n)

    @property
    def period(self) -> int:
        return len(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def count(self, target: int) -> int:
        return self.entries.count(target)

    def frequency(self, target: int) -> Fraction:
        return Fraction(self.count(target), self.period)

    def positions(self, target: int) -> list[int]:
        return [t for t, e in enumerate(self.entries) if e == target]

    def cyclic_gaps(self, target: int) -> list[int]:
        pos = self.positions(target)
        if not pos:
            raise InvalidValuesError(f"target {target} never visited")
        return [b - a for a, b in zip(pos, pos[1:])] + [pos[0] + self.period - pos[-1]]

    def shifted(self, k: int) -> PeriodicSequence:
        k %= self.period
        return PeriodicSequence(self.entries[k:] + self.entries[:k], self.n_targets)


@dataclass(frozen=True)
class GapDistribution:
    """Distribution of the visit gap straddling a stationary random time.

    ``probabilities`` are the attacker-side (size-biased) weights of the
    ``support`` gaps.  ``frequency`` is the visit frequency p, and must
    satisfy p = sum_j P(Z = x_j) / x_j.
    """

    support: tuple[int, ...]
    probabilities: tuple
    frequency: object
    counts: tuple[int, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.support:
            raise InvalidValuesError("empty gap support")
        if len(self.support) != len(self.probabilities):
            raise InvalidValuesError("support and probabilities differ in length")
        if any(b <= a for a, b in zip(self.support, self.support[1:])):
            raise InvalidValuesError("support must be strictly increasing")
        if self.support[0] <= 0:
            raise InvalidValuesError("gaps must be positive")
        if any(p < 0 for p in self.probabilities):
            raise InvalidValuesError("negative gap probability")
        total = sum(self.probabilities)
        implied = sum(p / x for p, x in zip(self.probabilities, self.support))
        if self.is_exact:
            if total != 1:
                raise InvalidValuesError(f"gap probabilities sum to {total}")
            if implied != self.frequency:
                raise InvalidValuesError("frequency is inconsistent with the size-biased gaps")
        else:
            if abs(float(total) - 1.0) > FLOAT_TOL:
                raise InvalidValuesError(f"gap probabilities sum to {float(total)}")
            if abs(float(implied) - float(self.frequency)) > FLOAT_TOL:
                raise InvalidValuesError("frequency is inconsistent with the size-biased gaps")

    @property
    def is_exact(self) -> bool:
        return all(isinstance(p, (int, Fraction)) for p in self.probabilities) and isinstance(
            self.frequency, (int, Fraction)
        )

    @property
    def expected_absence(self):
        """E = 1/p, the mean gap seen by the defender."""
        return 1 / self.frequency

    def defender_weights(self) -> tuple:
        """q_j = P(Z = x_j) * E / x_j: per-visit gap frequencies."""
        e = self.expected_absence
        return tuple(p * e / x for p, x in zip(self.probabilities, self.support))

    def as_floats(self) -> GapDistribution:
        return GapDistribution(
            self.support,
            tuple(float(p) for p in self.probabilities),
            float(self.frequency),
            self.counts,
        )


def _size_biased(gaps: Iterable[int]) -> GapDistribution:
    counts = Counter(gaps)
    if not counts:
        raise InvalidValuesError("target never visited")
    support = tuple(sorted(counts))
    length = sum(g * c for g, c in counts.items())
    probs = tuple(Fraction(g * counts[g], length) for g in support)
    freq = Fraction(sum(counts.values()), length)
    return GapDistribution(support, probs, freq, tuple(counts[g] for g in support))


def empirical_gap_distribution(seq: PeriodicSequence, target: int) -> GapDistribution:
    """Size-biased cyclic gap distribution of ``target`` in ``seq``."""
    if target not in seq.entries:
        raise InvalidValuesError("target never visited")
    return _size_biased(seq.cyclic_gaps(target))


def trajectory_gaps(entries: Sequence[int], target: int) -> list[int]:
    """Gaps between consecutive visits in a finite, non-periodic trajectory."""
    pos = [t for t, e in enumerate(entries) if e == target]
    return [b - a for a, b in zip(pos, pos[1:])]


def trajectory_gap_distribution(entries: Sequence[int], target: int) -> GapDistribution:
    """Size-biased distribution of the complete gaps inside a trajectory.

    The partial gaps before the first and after the last visit are
    dropped, so the frequency is count/length over the covered stretch.
    """
    gaps = trajectory_gaps(entries, target)
    if not gaps:
        raise InvalidValuesError("target visited fewer than twice")
    return _size_biased(gaps)


def mix_gap_distributions(parts: Iterable[tuple[object, GapDistribution]]) -> GapDistribution:
    """Convex combination of gap distributions (weights must sum to 1)."""
    parts = list(parts)
    acc: dict[int, object] = {}
    counts: Counter = Counter()
    freq = 0
    for w, d in parts:
        for x, p in zip(d.support, d.probabilities):
            acc[x] = acc.get(x, 0) + w * p
        if d.counts is not None:
            for x, c in zip(d.support, d.counts):
                counts[x] += c
        freq += w * d.frequency
    support = tuple(sorted(acc))
    return GapDistribution(
        support,
        tuple(acc[x] for x in support),
        freq,
        tuple(counts[x] for x in support) if counts else None,
    )


@dataclass(frozen=True)
class PiecewiseLinearCdf:
    """Concave piecewise-linear CDF of the attacker's return time.

    ``breakpoints`` runs from ``(0, 0)`` to ``(x_max, 1)``; F is 1 after
    ``x_max``.
    """

    breakpoints: tuple[tuple[object, object], ...]

    def __post_init__(self):
        bps = self.breakpoints
        if len(bps) < 2:
            raise InvalidValuesError("need at least two breakpoints")
        if bps[0][0] != 0 or bps[0][1] != 0:
            raise InvalidValuesError("CDF must start at (0, 0)")
        if not _close(bps[-1][1], 1):
            raise InvalidValuesError("CDF must end at 1")
        if any(b[0] <= a[0] for a, b in zip(bps, bps[1:])):
            raise InvalidValuesError("breakpoints must be strictly increasing in t")
        slopes = self.slopes()
        if any(s < -FLOAT_TOL for s in slopes):
            raise InvalidValuesError("CDF must be non-decreasing")
        if any(b > a + FLOAT_TOL * max(1, abs(a)) for a, b in zip(slopes, slopes[1:])):
            raise InvalidValuesError("CDF must be concave")

    @property
    def x_max(self):
        return self.breakpoints[-1][0]

    def slopes(self) -> list:
        bps = self.breakpoints
        return [_ratio(f1 - f0, t1 - t0) for (t0, f0), (t1, f1) in zip(bps, bps[1:])]

    def segments(self):
        """Yield ``(t0, t1, F(t0), slope)`` for each linear piece."""
        bps = self.breakpoints
        for (t0, f0), (t1, f1) in zip(bps, bps[1:]):
            yield t0, t1, f0, _ratio(f1 - f0, t1 - t0)

    def __call__(self, t):
        if t <= 0:
            return 0 * t
        bps = self.breakpoints
        if t >= bps[-1][0]:
            return 1
        i = bisect_right([b[0] for b in bps], t) - 1
        (t0, f0), (t1, f1) = bps[i], bps[i + 1]
        return f0 + _ratio((f1 - f0) * (t - t0), t1 - t0)

    @staticmethod
    def mixture(parts: Iterable[tuple[object, PiecewiseLinearCdf]]) -> PiecewiseLinearCdf:
        """Convex combination, evaluated on the union of breakpoints."""
        parts = list(parts)
        ts = sorted({t for _, cdf in parts for t, _ in cdf.breakpoints})
        return PiecewiseLinearCdf(tuple((t, sum(w * cdf(t) for w, cdf in parts)) for t in ts))


def _ratio(a, b):
    """a / b, kept exact when both are rational."""
    if isinstance(a, int) and isinstance(b, (int, Fraction)):
        return Fraction(a) / b
    return a / b


def _close(a, b) -> bool:
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return a == b
    return abs(float(a) - float(b)) <= FLOAT_TOL


def gap_cdf(d: GapDistribution) -> PiecewiseLinearCdf:
    """F(t) = E[min(1, t/Z)], with breakpoints at the support points."""
    if not d.support:
        raise InvalidValuesError("empty gap support")
    pts = [(0, 0)]
    for x in d.support:
        f = sum(p * (1 if x >= z else Fraction(x, z) if d.is_exact else x / z)
                for z, p in zip(d.support, d.probabilities))
        pts.append((x, f))
    # pin the final value to exactly 1 for float inputs
    pts[-1] = (pts[-1][0], 1 if d.is_exact else 1.0)
    return PiecewiseLinearCdf(tuple(pts))


@dataclass(frozen=True)
class AttackerResponse:
    target: int
    t_star: object
    utility: object
    ratio_to_quarter: object

    def as_floats(self) -> dict:
        return {
            "target": self.target,
            "t_star": float(self.t_star),
            "utility": float(self.utility),
            "ratio_to_quarter": float(self.ratio_to_quarter),
        }
