"""Schedule synthesis and verification for patrol security games.

Targets are indexed from 0.  Schedule-side quantities (values, frequencies,
gap probabilities) are exact :class:`fractions.Fraction` objects; the
attacker-side optimisation works in whatever number type it is handed
(exact for rationals, binary64 for floats).
"""

from patrolsched.core import (
    AttackerResponse,
    GapDistribution,
    PeriodicSequence,
    PiecewiseLinearCdf,
    ValueVector,
    empirical_gap_distribution,
    gap_cdf,
)

__all__ = [
    "AttackerResponse",
    "GapDistribution",
    "PeriodicSequence",
    "PiecewiseLinearCdf",
    "ValueVector",
    "empirical_gap_distribution",
    "gap_cdf",
]

__version__ = "0.1.0"
