"""Attacker best responses and the closed-form response analyses.

The attacker picks a target i and a duration t and earns alpha_i * t * (1 - F_i(t)).
Against a piecewise-linear concave F this is a concave quadratic on every
piece, so the optimum is among the piece endpoints and the clamped piece
vertices.  Arithmetic follows the inputs: Fractions give exact answers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from patrolsched.core import AttackerResponse, InvalidValuesError, PiecewiseLinearCdf
from patrolsched.golden import fib, three_gap_distribution
from patrolsched.quadirr import INV_PHI, PHI, QuadIrr

QUARTER = Fraction(1, 4)
FLOAT_TIE = 1e-12


def attacker_utility(alpha, cdf: PiecewiseLinearCdf, t):
    return alpha * t * (1 - cdf(t))


def best_response(alpha, cdf: PiecewiseLinearCdf, target: int = 0) -> AttackerResponse:
    """Exact maximiser of alpha * t * (1 - F(t)) over t >= 0 (smallest t on ties)."""
    candidates = []
    for t0, t1, f0, slope in cdf.segments():
        candidates.append(t0)
        if slope > 0:
            vertex = (1 - f0 + slope * t0) / (2 * slope)
            if t0 < vertex < t1:
                candidates.append(vertex)
    candidates.append(cdf.x_max)
    exact = all(isinstance(t, (int, Fraction)) for t in candidates) and isinstance(alpha, (int, Fraction))
    best_t, best_u = 0, 0
    for t in sorted(candidates):
        u = attacker_utility(alpha, cdf, t)
        margin = 0 if exact else FLOAT_TIE * max(abs(float(best_u)), 1e-300)
        if u > best_u + margin:
            best_t, best_u = t, u
    return AttackerResponse(target, best_t, best_u, best_u / QUARTER if exact else float(best_u) * 4)


def three_point_utility(alpha, x: Sequence[int], gap_probs: Sequence) -> tuple:
    """(u1, u2, max(u1, u2)) for a return-time law on x1 < x2 < x3.

    u1 = alpha*E/4 is what waiting E/2 earns; u2 is the vertex value on the
    second CDF piece.  Requires x2 <= 2*x1 and x3 <= 2*x2.
    """
    x1, x2, x3 = x
    if not (0 < x1 < x2 < x3) or x2 > 2 * x1 or x3 > 2 * x2:
        raise InvalidValuesError("need x1 < x2 <= 2*x1 and x2 < x3 <= 2*x2")
    inv_e = sum(p / xi for p, xi in zip(gap_probs, x))
    e = 1 / inv_e
    q1 = gap_probs[0] * e / x1
    u1 = alpha * e / 4
    u2 = 0 * u1 if q1 == 1 else alpha / 4 * (e - q1 * x1) ** 2 / (e * (1 - q1))
    return u1, u2, u2 if u2 > u1 else u1


def fibonacci_ratio(alpha, k: int):
    """u2/u1 in closed form for a Golden Ratio target in the k-th range."""
    return (
        alpha
        * INV_PHI ** (k + 1)
        * (fib(k + 2) + PHI * fib(k + 1) - alpha * PHI ** (k + 1) * fib(k + 1)) ** 2
    )


def worst_case_candidate(k: int) -> QuadIrr:
    """The local maximiser alpha = c / (3b) of the k-th range ratio."""
    b = PHI ** (k + 1) * fib(k + 1)
    c = fib(k + 2) + PHI * fib(k + 1)
    return c / (3 * b)


def golden_ratio_bound() -> QuadIrr:
    return QuadIrr(Fraction(2966, 81), Fraction(-1290, 81))


def worst_value() -> QuadIrr:
    return QuadIrr(Fraction(23, 18), Fraction(-1, 2))


@dataclass(frozen=True)
class GoldenWorstCase:
    alpha: float
    ratio: float
    alpha_exact: QuadIrr | None = None
    ratio_exact: QuadIrr | None = None


def golden_ratio_u_ratio(alpha):
    """u2/u1 for a Golden Ratio target of value (and frequency) alpha."""
    d = three_gap_distribution(alpha)
    u1, u2, _ = three_point_utility(alpha, d.support, d.probabilities)
    return u2 / u1


def golden_best_response_ratio(alpha) -> float:
    """True best-response utility over alpha*E/4 for a Golden Ratio target.

    Unlike ``golden_ratio_u_ratio`` this never credits a vertex that lies
    outside its CDF piece, so it is the attained ratio, not a bound.
    """
    from patrolsched.core import gap_cdf

    alpha = float(alpha)
    d = three_gap_distribution(alpha)
    return best_response(alpha, gap_cdf(d.gap_distribution())).utility * 4


def _u_ratio_grid(alphas: np.ndarray) -> np.ndarray:
    """Vectorised u2/u1 over a float grid (E = 1/alpha, q1 = P1*E/x1)."""
    powers = np.array([float(INV_PHI**j) for j in range(200)])
    # k = #{j >= 1 : phi^-j > alpha}, the smallest k with phi^-(k+1) <= alpha
    k = np.searchsorted(-powers[1:], -alphas, side="left")
    fibs = np.array([fib(j) for j in range(203)], dtype=float)
    x1 = fibs[k + 1]
    q1 = (alphas - powers[k + 1]) / alphas
    return (1 - alphas * q1 * x1) ** 2 / (1 - q1)


def golden_ratio_worstcase(
    grid_step: float = 1e-5, kmax: int = 30, alpha_max=Fraction(1, 2)
) -> GoldenWorstCase:
    """Sweep alpha over (0, alpha_max] plus the exact per-range maximisers c/(3b).

    The default range (0, 1/2] includes the k = 1 range, whose maximiser
    5/6 - sqrt(5)/6 is the global one.  ``alpha_max = (1/phi)^2`` restricts
    the sweep to targets with k >= 2, where k = 3 is the maximiser.
    """
    n = int(math.floor(float(alpha_max) / grid_step + 1e-9))
    alphas = np.arange(1, n + 1) * grid_step
    alphas = alphas[alphas <= float(alpha_max)]
    ratios = _u_ratio_grid(alphas)
    j = int(np.argmax(ratios))
    best = GoldenWorstCase(float(alphas[j]), float(ratios[j]))
    for k in range(1, kmax + 1):
        alpha = worst_case_candidate(k)
        if not (0 < alpha <= alpha_max):
            continue
        r = golden_ratio_u_ratio(alpha)
        if float(r) >= best.ratio:
            best = GoldenWorstCase(float(alpha), float(r), alpha, r)
    return best


def iid_utility(alpha, p, t) -> float:
    """Attacker utility against i.i.d. visits with probability p per step."""
    whole = math.floor(t)
    return alpha * t * (1 - p * (t - whole)) * (1 - p) ** whole


def iid_best_response(p) -> AttackerResponse:
    """Continuous-relaxation optimum t* = -1/ln(1-p) with alpha = p.

    Between visits the actual CDF interpolates linearly, which lies below
    1 - (1-p)^t, so this is a lower bound on the attacker's optimum; the two
    agree to O(p) and coincide as p -> 0, where the 4/e worst case sits.
    """
    p = float(p)
    if not 0 < p < 1:
        raise InvalidValuesError(f"p must lie in (0, 1), got {p}")
    t_star = -1 / math.log1p(-p)
    utility = p * t_star / math.e
    return AttackerResponse(0, t_star, utility, 4 * utility)


def iid_worstcase(p_min: float = 1e-9, points: int = 2000) -> tuple[float, float]:
    """(p, ratio) maximising the i.i.d. ratio over p in [p_min, 1/2]."""
    grid = np.geomspace(p_min, 0.5, points)
    ratios = [iid_best_response(p).ratio_to_quarter for p in grid]
    j = int(np.argmax(ratios))
    return float(grid[j]), float(ratios[j])


def iid_trajectory(frequencies, steps: int, rng: np.random.Generator) -> np.ndarray:
    """Visits drawn independently each step with the given probabilities."""
    probs = np.array([float(f) for f in frequencies])
    return rng.choice(len(probs), size=steps, p=probs / probs.sum())
