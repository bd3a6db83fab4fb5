import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats
from scipy.special import ndtr

from randsum.metrics import (AnalyticCdf, EmpiricalDistribution, PairLaw, ecdf, ks, levy,
                             weak2d)


def point(a):
    return EmpiricalDistribution(np.array([float(a)]))


def _feasible(F1, F2, xs, y):
    lower = F2(xs - y) - y <= F1(xs) + 1e-15
    upper = F1(xs) <= F2(xs + y) + y + 1e-15
    return bool(np.all(lower & upper))


def brute_levy(F1, F2, xs, step=1e-6):
    """Grid search over y: a 1e-3 scan, then ``step`` inside the first feasible cell.

    Feasibility is monotone in y, so the two-stage scan finds the same grid
    minimum as a full fine scan.
    """
    coarse = np.linspace(0, 1, 1001)
    first = next(y for y in coarse if _feasible(F1, F2, xs, y))
    if first == 0:
        return 0.0
    fine = np.arange(first - 1e-3, first + step / 2, step)
    return float(next(y for y in fine if _feasible(F1, F2, xs, y)))


def test_ecdf_examples():
    s = EmpiricalDistribution(np.array([3.0, 1.0, 2.0]))
    assert ecdf(s, 2.0) == pytest.approx(1 / 3)
    assert ecdf(s, 0.0) == 0 and ecdf(s, 5.0) == 1
    w = EmpiricalDistribution(np.array([0.0, 1.0]), np.array([0.25, 0.75]))
    assert ecdf(w, 0.5) == 0.25
    with pytest.raises(ValueError):
        EmpiricalDistribution(np.array([]))
    with pytest.raises(ValueError):
        EmpiricalDistribution(np.array([0.0, 1.0]), np.array([0.5, 0.6]))


def test_levy_identity():
    s = EmpiricalDistribution(np.random.default_rng(0).normal(size=500))
    assert levy(s, s) == 0.0


@pytest.mark.parametrize("a", [0.3, 0.7, 2.0])
def test_levy_point_masses(a):
    F1, F2 = point(0.0), point(a)
    xs = np.linspace(-3, 5, 8001)
    xs = np.concatenate([xs, xs + 1e-9])
    oracle = brute_levy(F1, F2, xs)
    assert oracle == pytest.approx(min(a, 1.0), abs=2e-6)
    assert levy(F1, F2) == pytest.approx(min(a, 1.0), abs=1e-6)
    assert levy(F2, F1) == pytest.approx(levy(F1, F2), abs=1e-6)


def _random_step(rng):
    k = int(rng.integers(1, 6))
    w = rng.dirichlet(np.ones(k))
    return EmpiricalDistribution(rng.uniform(-2, 2, k), w)


def test_levy_metric_axioms():
    rng = np.random.default_rng(42)
    for _ in range(10):
        F, G, H = (_random_step(rng) for _ in range(3))
        fg, gh, fh = levy(F, G), levy(G, H), levy(F, H)
        assert fg >= 0
        assert abs(fg - levy(G, F)) <= 1e-6
        assert fh <= fg + gh + 1e-6


def test_levy_step_against_brute_force():
    rng = np.random.default_rng(3)
    for _ in range(5):
        F, G = _random_step(rng), _random_step(rng)
        xs = np.linspace(-4, 4, 4001)
        bps = np.concatenate([F.values, G.values])
        xs = np.concatenate([xs, bps, bps + 1e-9])
        # the x grid sees shifted jumps only to within its spacing
        assert levy(F, G) == pytest.approx(brute_levy(F, G, np.sort(xs), step=1e-5), abs=3e-3)


def test_levy_bounded_by_ks():
    rng = np.random.default_rng(9)
    for _ in range(10):
        F, G = _random_step(rng), _random_step(rng)
        assert levy(F, G) <= ks(F, G) + 1e-6
    s = EmpiricalDistribution(rng.normal(size=2000))
    phi = AnalyticCdf(ndtr, -9, 9)
    assert levy(s, phi) <= ks(s, phi) + 1e-6


def test_ks_examples():
    s = EmpiricalDistribution(np.arange(10.0))
    assert ks(s, s) == 0
    assert ks(point(0.0), point(0.5)) == 1.0
    n = 10 ** 5
    draws = EmpiricalDistribution(np.random.default_rng(1).normal(size=n))
    d = ks(draws, AnalyticCdf(ndtr, -9, 9))
    assert d < 1.95 / math.sqrt(n)
    # matches scipy's one-sample statistic
    assert d == pytest.approx(stats.kstest(draws.values, "norm").statistic, abs=1e-9)


def test_levy_between_independent_samples_is_small():
    rng = np.random.default_rng(12)
    a = EmpiricalDistribution(rng.exponential(size=10 ** 5))
    b = EmpiricalDistribution(rng.exponential(size=10 ** 5))
    assert levy(a, b) < 0.02


def test_levy_analytic_pair():
    F = AnalyticCdf(ndtr, -9, 9)
    G = AnalyticCdf(lambda x: ndtr(x - 0.2), -9, 9)
    d = levy(F, G)
    # Levy distance of a shift sits strictly below the shift and the KS gap
    assert 0 < d < 0.2 and d <= ks(F, G) + 1e-6
    assert levy(F, F) == 0.0


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=30),
       st.lists(st.floats(-5, 5), min_size=1, max_size=30))
def test_levy_properties(a, b):
    F, G = EmpiricalDistribution(np.array(a)), EmpiricalDistribution(np.array(b))
    d = levy(F, G)
    assert 0 <= d <= 1
    assert abs(d - levy(G, F)) <= 1e-6
    assert d <= ks(F, G) + 1e-6


def test_weak2d_identity_and_shift():
    rng = np.random.default_rng(4)
    A = rng.normal(size=(5000, 2))
    assert weak2d(A, A) == 0.0
    B = A + np.array([0.5, 0.0])
    assert weak2d(A, B) > 0.1
    with pytest.raises(ValueError):
        weak2d(np.empty((0, 2)), A)


def test_weak2d_axis_swap_symmetric_law():
    rng = np.random.default_rng(8)
    A = rng.normal(size=(20_000, 2))
    # i.i.d. coordinates: swapping axes gives the same law
    assert weak2d(A, A[:, ::-1]) < 1.63 * 2 / math.sqrt(20_000)


def test_weak2d_against_analytic_product():
    rng = np.random.default_rng(10)
    A = rng.uniform(size=(20_000, 2))
    law = PairLaw(lambda u, v: np.clip(u, 0, 1) * np.clip(v, 0, 1))
    assert weak2d(A, law) < 0.02
    assert weak2d(A, PairLaw(lambda u, v: np.clip(u, 0, 1) ** 2 * np.clip(v, 0, 1))) > 0.2
