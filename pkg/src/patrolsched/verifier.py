"""Certification: quasi-regularity, exact optimality certificates, gap-law
cross-checks and the approximation-ratio table."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from patrolsched.attacker import QUARTER, best_response, golden_ratio_worstcase, iid_worstcase
from patrolsched.core import (
    AttackerResponse,
    GapDistribution,
    InvalidValuesError,
    PeriodicSequence,
    ValueVector,
    empirical_gap_distribution,
    gap_cdf,
    mix_gap_distributions,
)
from patrolsched.golden import GoldenState, inv_phi_power, three_gap_distribution

CERTIFY_TOL = Fraction(1, 10**9)


def _target_gaps(seq, target: int) -> list[int]:
    if isinstance(seq, PeriodicSequence):
        return seq.cyclic_gaps(target) if target in seq.entries else []
    pos = np.flatnonzero(np.asarray(seq) == target)
    return np.diff(pos).tolist()


def quasi_regularity(seq, n_targets: int | None = None) -> tuple[Fraction, dict[int, tuple[int, int]]]:
    """(K, {target: (min gap, max gap)}) with K the worst max/min gap ratio.

    A ``PeriodicSequence`` is measured cyclically; any other sequence is
    treated as a finite trajectory and only its complete gaps count.
    """
    if isinstance(seq, PeriodicSequence):
        n = seq.n_targets if n_targets is None else n_targets
    else:
        seq = np.asarray(seq)
        n = int(seq.max()) + 1 if n_targets is None else n_targets
    ranges = {}
    for i in range(n):
        gaps = _target_gaps(seq, i)
        if not gaps:
            raise InvalidValuesError(f"target {i} does not recur")
        ranges[i] = (min(gaps), max(gaps))
    k = max(Fraction(hi, lo) for lo, hi in ranges.values())
    return k, ranges


@dataclass(frozen=True)
class GapViolation:
    target: int
    gap: int
    sequence: int  # index into the mixture


@dataclass(frozen=True)
class TargetCertificate:
    target: int
    value: Fraction
    frequency: Fraction
    multiplier: Fraction  # smallest m with every gap <= m * E
    gap_condition: bool
    response: AttackerResponse


@dataclass(frozen=True)
class CertificateReport:
    certified: bool
    targets: tuple[TargetCertificate, ...]
    violations: tuple[GapViolation, ...] = ()
    failures: tuple[str, ...] = field(default=())

    @property
    def max_ratio(self):
        return max(t.response.ratio_to_quarter for t in self.targets)


def certify_optimal(values, mixture: Sequence[tuple[object, PeriodicSequence]]) -> CertificateReport:
    """Check the sufficient optimality conditions and the attacker's best response.

    Per target: the mixture frequency must equal the value exactly, and the
    gaps across all sequences must fit in [m/(m+1) E, m E] for some m with
    E = 1/value.  Certified iff frequencies are exact and every target's
    best-response utility is at most 1/4 (+1e-9).
    """
    vals = values if isinstance(values, ValueVector) else ValueVector(values)
    weights = [Fraction(w) for w, _ in mixture]
    if sum(weights) != 1:
        raise InvalidValuesError("mixture weights must sum to 1")
    failures, violations, targets = [], [], []
    for i, alpha in enumerate(vals):
        parts = []
        for w, seq in zip(weights, mixture):
            if i not in seq[1].entries:
                failures.append(f"target {i} missing from a mixture sequence")
                continue
            parts.append((w, empirical_gap_distribution(seq[1], i)))
        if not parts:
            raise InvalidValuesError(f"target {i} never visited")
        dist: GapDistribution = mix_gap_distributions(parts)
        if dist.frequency != alpha:
            failures.append(f"target {i}: frequency {dist.frequency} != value {alpha}")
        e = 1 / alpha
        m = Fraction(max(dist.support)) / e
        lower = m / (m + 1) * e
        bad = [
            GapViolation(i, g, s)
            for s, (_, seq) in enumerate(mixture)
            for g in sorted(set(_target_gaps(seq, i)))
            if g < lower
        ]
        violations.extend(bad)
        response = best_response(alpha, gap_cdf(dist), target=i)
        if response.utility > QUARTER + CERTIFY_TOL:
            failures.append(f"target {i}: best-response utility {float(response.utility):.12g} > 1/4")
        targets.append(TargetCertificate(i, alpha, dist.frequency, m, not bad, response))
    return CertificateReport(not failures, tuple(targets), tuple(violations), tuple(failures))


def deterministic_attack_utility(seq: PeriodicSequence, values) -> Fraction:
    """Attacker utility against one fixed-phase periodic sequence.

    Knowing the phase, the attacker starts right after a visit to target i
    and has its longest gap free: utility max_i alpha_i * maxgap_i.
    """
    vals = values if isinstance(values, ValueVector) else ValueVector(values)
    return max(a * max(seq.cyclic_gaps(i)) for i, a in enumerate(vals))


@dataclass(frozen=True)
class ThreeGapCrosscheck:
    p: Fraction
    k: int
    tv: float
    observed_support: tuple[int, ...]
    expected_support: tuple[int, int, int]
    observed: dict
    expected: dict


def three_gap_crosscheck(p, steps: int, rng: np.random.Generator, samples: int | None = None) -> ThreeGapCrosscheck:
    """Census of the gap straddling uniform random times of a golden trajectory.

    The trajectory uses the partition [0, p), [p, 1); target 0 is checked
    against the closed-form three-gap law.  Times are drawn uniformly from
    the stretch covered by complete gaps (``samples`` defaults to ``steps``).
    """
    p = Fraction(p)
    if steps < 10**4:
        raise InvalidValuesError("steps must be at least 10^4")
    law = three_gap_distribution(p)
    traj = GoldenState([p, 1 - p], rng).run(steps)
    pos = np.flatnonzero(traj == 0)
    if len(pos) < 2:
        raise InvalidValuesError("target 0 recurs fewer than twice")
    gaps = np.diff(pos)
    times = rng.integers(pos[0], pos[-1], size=samples or steps)
    straddling = gaps[np.searchsorted(pos, times, side="right") - 1]
    support, counts = np.unique(straddling, return_counts=True)
    observed = {int(g): c / counts.sum() for g, c in zip(support, counts)}
    expected = dict(zip(law.support, law.float_probabilities()))
    keys = set(observed) | set(expected)
    tv = 0.5 * sum(abs(observed.get(g, 0.0) - expected.get(g, 0.0)) for g in keys)
    observed_support = tuple(sorted(int(g) for g in np.unique(gaps)))
    return ThreeGapCrosscheck(p, law.k, float(tv), observed_support, law.support, observed, expected)


@dataclass(frozen=True)
class RatioRow:
    strategy: str
    ratio: float
    argument: str  # where the worst case is attained


OPTIMAL_WITNESS = ("1/2", "1/3", "1/6")


def ratio_table() -> list[RatioRow]:
    """Worst-case attacker utility over the optimum 1/4, per strategy."""
    from patrolsched.dyadic import build_optimal_sampler

    sampler = build_optimal_sampler(OPTIMAL_WITNESS)
    report = certify_optimal(sampler.values, sampler.mixture())
    if not report.certified:
        raise AssertionError("optimal schedule failed certification: " + "; ".join(report.failures))
    golden = golden_ratio_worstcase()
    golden_k2 = golden_ratio_worstcase(alpha_max=inv_phi_power(2))
    iid_p, iid_ratio = iid_worstcase()
    return [
        RatioRow("optimal", float(report.max_ratio), "values=(" + ",".join(OPTIMAL_WITNESS) + ")"),
        RatioRow("golden", golden.ratio, f"alpha={golden.alpha:.6f}"),
        RatioRow("golden_k>=2", golden_k2.ratio, f"alpha={golden_k2.alpha:.6f}"),
        RatioRow("iid", iid_ratio, f"p={iid_p:.3g}"),
    ]
