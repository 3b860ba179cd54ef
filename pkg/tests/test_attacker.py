import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from patrolsched.attacker import (
    _u_ratio_grid,
    attacker_utility,
    best_response,
    fibonacci_ratio,
    golden_best_response_ratio,
    golden_ratio_bound,
    golden_ratio_u_ratio,
    golden_ratio_worstcase,
    iid_best_response,
    iid_trajectory,
    iid_utility,
    iid_worstcase,
    three_point_utility,
    worst_case_candidate,
    worst_value,
)
from patrolsched.core import GapDistribution, InvalidValuesError, gap_cdf, trajectory_gap_distribution
from patrolsched.golden import inv_phi_power, three_gap_distribution
from patrolsched.quadirr import QuadIrr
from patrolsched.rng import make_rng


def random_gap_distribution(rng, max_gap=30, max_support=6) -> GapDistribution:
    support = sorted(set(rng.integers(1, max_gap + 1, size=rng.integers(1, max_support + 1)).tolist()))
    weights = [F(int(w)) for w in rng.integers(1, 20, size=len(support))]
    probs = tuple(w / sum(weights) for w in weights)
    return GapDistribution(tuple(support), probs, sum(p / x for p, x in zip(probs, support)))


@pytest.mark.parametrize("x", [1, 2, 5, 12])
def test_regular_schedule_best_response(x):
    d = GapDistribution((x,), (F(1),), F(1, x))
    r = best_response(d.frequency, gap_cdf(d))
    assert r.t_star == F(x, 2)
    assert r.utility == F(1, 4) and r.ratio_to_quarter == 1
    assert isinstance(r.utility, F)


def test_best_response_uses_the_value_not_the_frequency():
    d = GapDistribution((4,), (F(1),), F(1, 4))
    r = best_response(F(1, 2), gap_cdf(d))
    assert r.utility == F(1, 2) * 4 / 4


@pytest.mark.parametrize("seed", range(100))
def test_best_response_matches_dense_grid(seed):
    rng = np.random.default_rng(seed)
    d = random_gap_distribution(rng)
    alpha = F(int(rng.integers(1, 50)), 100)
    cdf = gap_cdf(d)
    exact = best_response(alpha, cdf)
    fcdf = gap_cdf(d.as_floats())
    a = float(alpha)

    def u(t):
        return a * t * (1 - fcdf(t))

    top = float(cdf.x_max) * 1.1
    best = max(u(t) for t in np.linspace(0, top, 20001))
    # refine within every linear piece with a bounded scalar search
    for t0, t1, *_ in fcdf.segments():
        res = minimize_scalar(lambda t: -u(t), bounds=(float(t0), float(t1)), method="bounded",
                              options={"xatol": 1e-12})
        best = max(best, -res.fun)
    assert float(exact.utility) >= best * (1 - 1e-12)
    assert float(exact.utility) == pytest.approx(best, rel=1e-6)
    assert attacker_utility(alpha, cdf, exact.t_star) == exact.utility


@pytest.mark.parametrize("seed", range(100))
def test_attacker_gets_at_least_a_quarter(seed):
    # waiting E/2 earns alpha E/4 because F(t) <= t / E
    d = random_gap_distribution(np.random.default_rng(1000 + seed))
    r = best_response(d.frequency, gap_cdf(d))
    assert r.utility >= F(1, 4)
    assert r.utility == F(1, 4) or len(d.support) > 1


def test_three_point_degenerate_and_preconditions():
    u1, u2, top = three_point_utility(F(1, 2), (2, 3, 4), (F(1), F(0), F(0)))
    assert (u1, u2, top) == (F(1, 4), 0, F(1, 4))
    with pytest.raises(InvalidValuesError):
        three_point_utility(F(1, 2), (2, 5, 6), (F(1, 3), F(1, 3), F(1, 3)))


@pytest.mark.parametrize("p", [F(1, 2), F(3, 10), F(1, 7), F(1, 50), F(9, 20), F(2, 9)])
def test_three_point_bound_brackets_true_response(p):
    d = three_gap_distribution(p)
    u1, u2, top = three_point_utility(p, d.support, d.probabilities)
    attained = golden_best_response_ratio(p) / 4
    assert float(u1) - 1e-12 <= attained <= float(top) + 1e-12


@pytest.mark.parametrize("k", range(1, 11))
def test_range_maximisers_are_attained(k):
    alpha = worst_case_candidate(k)
    predicted = golden_ratio_u_ratio(alpha)
    assert predicted == fibonacci_ratio(alpha, k)
    assert golden_best_response_ratio(alpha) == pytest.approx(float(predicted), rel=1e-9)


@given(st.fractions(F(1, 10**5), F(1, 2), max_denominator=10**6))
@settings(max_examples=200, deadline=None)
def test_closed_form_ratio_agrees(alpha):
    if alpha == 0:
        return
    k = three_gap_distribution(alpha).k
    exact = golden_ratio_u_ratio(alpha)
    assert exact == fibonacci_ratio(alpha, k)
    assert _u_ratio_grid(np.array([float(alpha)]))[0] == pytest.approx(float(exact), rel=1e-12)


@pytest.mark.parametrize("k", range(2, 11))
def test_ratio_is_one_at_range_boundaries(k):
    assert golden_ratio_u_ratio(inv_phi_power(k)) == 1


def test_golden_worst_case_over_all_values():
    # the k = 1 range (values in [(1/phi)^2, 1/2]) holds the global maximiser
    res = golden_ratio_worstcase()
    assert res.alpha_exact == QuadIrr(F(5, 6), F(-1, 6))
    assert res.ratio_exact == QuadIrr(F(50, 27), F(-10, 27))
    assert res.ratio == pytest.approx(1.0236785, abs=1e-7)
    assert golden_best_response_ratio(res.alpha_exact) == pytest.approx(res.ratio, rel=1e-9)


def test_golden_worst_case_below_second_range():
    res = golden_ratio_worstcase(alpha_max=inv_phi_power(2))
    assert res.alpha_exact == worst_value() == QuadIrr(F(23, 18), F(-1, 2))
    assert res.ratio_exact == golden_ratio_bound()
    assert res.ratio == pytest.approx(1.0058310, abs=1e-7)
    assert res.alpha == pytest.approx(0.159744, abs=1e-6)


def test_iid_closed_form():
    p = 1 - 1 / math.e
    r = iid_best_response(p)
    assert r.t_star == pytest.approx(1.0, rel=1e-12)
    assert r.utility == pytest.approx(p / math.e, rel=1e-12)
    with pytest.raises(InvalidValuesError):
        iid_best_response(0.0)


@pytest.mark.parametrize("p", [0.5, 0.1, 0.01])
def test_iid_closed_form_is_tight_lower_bound(p):
    grid = np.linspace(0, 20 / p, 200_001)
    lattice = max(iid_utility(p, p, t) for t in grid)
    cont = iid_best_response(p).utility
    assert cont <= lattice + 1e-12
    assert lattice <= cont * (1 + p / 4)


def test_iid_worst_case_is_four_over_e():
    _, ratio = iid_worstcase()
    assert abs(ratio - 4 / math.e) < 1e-3


def test_iid_simulated_best_response():
    traj = iid_trajectory([0.1, 0.9], 200_000, make_rng(1, 4))
    d = trajectory_gap_distribution(traj, 0).as_floats()
    r = best_response(0.1, gap_cdf(d))
    assert r.utility == pytest.approx(iid_best_response(0.1).utility, rel=0.03)
