import math

import numpy as np
import pytest
from scipy import integrate, stats

from randsum import index_laws as il


def _mixed_poisson_oracle(r, m, k):
    """Integrate the Poisson pmf against the gamma intensity, then condition on N >= 1."""
    lam = stats.gamma(r, scale=m / r)

    def mix(j):
        f = lambda x: stats.poisson.pmf(j, x) * lam.pdf(x)
        return integrate.quad(f, 0, np.inf, epsabs=1e-14, epsrel=1e-12, limit=400)[0]

    return mix(k) / (1 - mix(0))


def test_pmf_examples():
    assert il.pmf(il.Deterministic(5), 5) == 1
    assert il.pmf(il.Deterministic(5), 4) == 0
    assert il.pmf(il.Geometric(0.5), 2) == 0.25
    law = il.MixedPoissonGamma(2.0, 10.0)
    for k in (1, 3, 12):
        assert il.pmf(law, k) == pytest.approx(_mixed_poisson_oracle(2.0, 10.0, k), abs=1e-12)


def test_truncate_examples():
    sup = il.truncate(il.Deterministic(7), 1e-9)
    assert sup.ks.tolist() == [7] and sup.weights.tolist() == [1.0]
    sup = il.truncate(il.Geometric(0.01), 1e-12)
    K = math.ceil(math.log(1e-12) / math.log(0.99))
    assert sup.kmax == K
    # direct summation of the tail confirms K is the smallest valid prefix
    pmf = 0.01 * 0.99 ** np.arange(0, 20_000)
    tail = lambda k: 1 - math.fsum(pmf[:k].tolist())
    assert tail(K) <= 1e-12 + 1e-15 and tail(K - 1) > 1e-12 - 1e-15


@pytest.mark.parametrize("law", [il.Geometric(0.3), il.Geometric(0.001),
                                 il.MixedPoissonGamma(2.0, 50.0), il.MixedPoissonGamma(0.5, 7.0),
                                 il.Deterministic(3)])
@pytest.mark.parametrize("eps", [1e-6, 1e-10, 1e-12])
def test_truncation_contract(law, eps):
    sup = il.truncate(law, eps)
    assert abs(math.fsum(sup.weights.tolist()) - 1) <= 1e-15
    raw = math.fsum(il.pmf(law, sup.ks).tolist())
    assert 1 - eps - 1e-14 <= raw <= 1 + 1e-14
    if sup.kmax > 1 and not isinstance(law, il.Deterministic):
        # the prefix is minimal
        shorter = math.fsum(il.pmf(law, np.arange(1, sup.kmax)).tolist())
        assert 1 - shorter > eps * (1 - 1e-9)


def test_truncate_cap_and_bad_eps():
    with pytest.raises(il.TruncationError):
        il.truncate(il.Geometric(1e-6), 1e-12, max_atoms=10 ** 5)
    with pytest.raises(ValueError):
        il.truncate(il.Geometric(0.5), 1e-3)


def test_psi_examples():
    s = np.linspace(0, 1, 11)
    np.testing.assert_allclose(il.psi(il.Deterministic(4), s), s ** 4, atol=1e-15)
    assert il.psi_integral(il.Deterministic(4)) == pytest.approx(0.25, abs=1e-12)
    p = 0.5
    np.testing.assert_allclose(il.psi(il.Geometric(p), s), p * s / (1 - (1 - p) * s), atol=1e-12)
    k = np.arange(1, 200)
    series = math.fsum((p * (1 - p) ** (k - 1) / k).tolist())
    assert il.psi_integral(il.Geometric(p)) == pytest.approx(series, abs=1e-10)
    for law in (il.Deterministic(3), il.Geometric(0.2), il.MixedPoissonGamma(2.0, 10.0)):
        assert il.psi(law, 1.0) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("law", [il.Geometric(0.05), il.Geometric(0.001),
                                 il.MixedPoissonGamma(2.0, 100.0), il.Deterministic(9)])
def test_psi_integral_is_expected_inverse(law):
    sup = il.truncate(law)
    assert il.psi_integral(law) == pytest.approx(sup.expect(1.0 / sup.ks), abs=1e-8)
    # E[1/sqrt(N)] <= sqrt(E[1/N])
    assert il.expected_inverse_sqrt(law) <= math.sqrt(il.psi_integral(law)) + 1e-10


def test_psi_monotone():
    s = np.linspace(0, 1, 101)
    for law in (il.Geometric(0.1), il.MixedPoissonGamma(1.5, 20.0)):
        assert np.all(np.diff(il.psi(law, s)) >= -1e-15)


def test_mean_index():
    assert il.mean_index(il.Geometric(0.1)) == pytest.approx(10.0)
    assert il.mean_index(il.Deterministic(12)) == 12
    law = il.MixedPoissonGamma(2.0, 10.0)
    m = il.mean_index(law)
    # conditioned mean m / (1 - P(N=0)) in closed form
    p0 = (2 / 12) ** 2
    assert m == pytest.approx(10 / (1 - p0), rel=1e-12)
    sup = il.truncate(law)
    assert sup.expect(sup.ks) == pytest.approx(m, rel=1e-10)
    draws = il.sample(law, np.random.default_rng(3), 10 ** 6)
    assert draws.min() >= 1
    sd = math.sqrt(il.truncate(law).expect(il.truncate(law).ks ** 2) - m * m)
    assert abs(draws.mean() - m) < 4 * sd / 1000


@pytest.mark.parametrize("law", [il.Geometric(0.2), il.MixedPoissonGamma(2.0, 10.0),
                                 il.Deterministic(4)])
def test_sampler_chi_square(law):
    draws = il.sample(law, np.random.default_rng(5), 10 ** 5)
    sup = il.truncate(law)
    if isinstance(law, il.Deterministic):
        assert np.all(draws == 4)
        return
    expected = 10 ** 5 * sup.weights
    # pool the tail so every bin expects at least 5 draws
    cut = int(np.flatnonzero(expected >= 5)[-1])
    obs = np.bincount(draws, minlength=sup.kmax + 2)[1:]
    o = np.append(obs[:cut], obs[cut:].sum())
    e = np.append(expected[:cut], expected[cut:].sum())
    chi2 = float(np.sum((o - e) ** 2 / e))
    assert chi2 < stats.chi2.ppf(0.999, len(o) - 1)
