import math

import numpy as np
import pytest
from scipy import integrate, stats

from oracles import ks_critical_two_sample
from privcov import nucsampler as ns
from privcov.errors import DomainError, ParameterError, SamplerError
from privcov.randsrc import RandomStream
from privcov.spectra import nuclear_norm, singular_values


def test_haar_d1_signs():
    U = ns.sample_haar_orthogonal(1, RandomStream(0), 10**4)
    assert set(np.unique(U)) <= {-1.0, 1.0}
    assert abs(np.mean(U == 1.0) - 0.5) <= 0.02


@pytest.mark.parametrize("d", [2, 5, 17])
def test_haar_orthogonal(d):
    U = ns.sample_haar_orthogonal(d, RandomStream(d))
    assert np.linalg.norm(U.T @ U - np.eye(d)) <= 1e-10


def test_haar_entry_mean_and_invariance():
    rng = RandomStream(1)
    U = ns.sample_haar_orthogonal(3, rng, 10**5)
    assert abs(U[:, 0, 0].mean()) <= 0.01
    # a uniform unit vector in R^3 has squared coordinates with mean 1/3
    assert abs((U[:, 0, 0] ** 2).mean() - 1 / 3) <= 0.005
    Q = ns.sample_haar_orthogonal(3, RandomStream(99))
    QU = Q @ U
    for stat in (lambda A: A[:, 0, 0], lambda A: A[:, 1, 2] ** 2, lambda A: A[:, 0, 0] * A[:, 1, 1]):
        a, b = stat(U), stat(QU)
        se = math.sqrt(a.var() / a.size + b.var() / b.size)
        assert abs(a.mean() - b.mean()) <= 4 * se


def test_weight_log_density_examples():
    assert ns.weight_log_density([0.75, 0.25]) == pytest.approx(math.log(0.5))
    assert ns.weight_log_density([0.5, 0.5]) == -math.inf
    expect = math.log(0.2 * 0.3 * 0.1) + math.log(0.8 * 0.7 * 0.5)
    assert ns.weight_log_density([0.5, 0.3, 0.2]) == pytest.approx(expect)
    # log(0.006) + log(0.28)
    assert expect == pytest.approx(-6.38896, abs=1e-5)


@pytest.mark.parametrize("w", [[0.5, 0.6], [1.0, 0.0], [-0.1, 1.1], [0.2, 0.2]])
def test_weight_log_density_domain(w):
    with pytest.raises(DomainError):
        ns.weight_log_density(w)


def test_exact_d2_quantile_and_mean():
    assert ns._d2_quantile(0.5) == pytest.approx(0.5)
    assert ns._d2_quantile(1e-12) < 1e-6
    assert ns._d2_quantile(1 - 1e-12) > 1 - 1e-6
    # quantile inverts the CDF
    p = np.linspace(0.01, 0.99, 50)
    np.testing.assert_allclose(ns.d2_cdf(ns._d2_quantile(p)), p, atol=1e-12)
    oracle = integrate.quad(lambda t: max(t, 1 - t) * 2 * abs(2 * t - 1), 0, 1, points=[0.5])[0]
    assert oracle == pytest.approx(5 / 6)
    w = ns.sample_weights_exact_d2(RandomStream(2), 10**5)
    assert abs(w.max(axis=1).mean() - oracle) <= 0.005


def test_rejection_d2_agrees_with_exact_and_rate():
    w, rate = ns.sample_weights_rejection(2, RandomStream(3), 10**4, return_rate=True)
    ex = ns.sample_weights_exact_d2(RandomStream(4), 10**4)
    assert stats.ks_2samp(w[:, 0], ex[:, 0]).statistic <= ks_critical_two_sample(10**4, 10**4)
    assert abs(rate - 0.5) <= 0.01


@pytest.mark.parametrize("d", [3, 4])
def test_rejection_envelope_bounds_density(d):
    # the envelope must dominate the density on the simplex; probe near its maximizer too
    rng = np.random.default_rng(d)
    e = rng.exponential(size=(200_000, d))
    w = e / e.sum(axis=1, keepdims=True)
    i, j = np.triu_indices(d, 1)
    f = np.prod(np.abs(w[:, i] ** 2 - w[:, j] ** 2), axis=1)
    assert f.max() <= ns._REJECTION_ENVELOPE[d]
    assert f.max() >= 0.9 * ns._REJECTION_ENVELOPE[d]


def test_rejection_errors():
    with pytest.raises(ParameterError):
        ns.sample_weights_rejection(5, RandomStream(0))
    with pytest.raises(SamplerError):
        ns.sample_weights_rejection(4, RandomStream(0), 10**6, max_proposals=10)


def test_sample_weights_small_d():
    np.testing.assert_array_equal(ns.sample_weights(1, None, RandomStream(0)), [1.0])
    w = ns.sample_weights(2, None, RandomStream(0), 5)
    np.testing.assert_allclose(w.sum(axis=1), 1.0)


def test_chain_d2_matches_exact():
    w, diag = ns.sample_weights_mcmc(2, None, RandomStream(5), 10**4)
    ex = ns.sample_weights_exact_d2(RandomStream(6), 10**4)
    assert stats.ks_2samp(w[:, 0], ex[:, 0]).statistic <= ks_critical_two_sample(10**4, 10**4)
    assert abs(w.max(axis=1).mean() - 5 / 6) <= 0.01
    assert diag.stalls == 0


@pytest.mark.parametrize("method", ns.METHODS)
def test_chain_d3_matches_rejection(method):
    cfg = ns.ChainConfig(method=method)
    w, _ = ns.sample_weights_mcmc(3, cfg, RandomStream(7), 10**4)
    r = ns.sample_weights_rejection(3, RandomStream(8), 10**4)
    a, b = w.max(axis=1), r.max(axis=1)
    se = math.sqrt(a.var() / a.size + b.var() / b.size)
    assert abs(a.mean() - b.mean()) <= 3 * se


def test_chain_d4_matches_rejection():
    w, _ = ns.sample_weights_mcmc(4, None, RandomStream(9), 10**4)
    r = ns.sample_weights_rejection(4, RandomStream(10), 10**4)
    assert stats.ks_2samp(w.max(axis=1), r.max(axis=1)).pvalue >= 0.01
    assert stats.ks_2samp(w.min(axis=1), r.min(axis=1)).pvalue >= 0.01


@pytest.mark.parametrize("d", [3, 6])
def test_chain_outputs_strictly_inside_simplex(d):
    w, diag = ns.sample_weights_mcmc(d, None, RandomStream(d), 2000)
    assert np.all(w > 0)
    np.testing.assert_allclose(w.sum(axis=1), 1.0, atol=1e-12)
    se = w.std(axis=0) / math.sqrt(len(w))
    assert np.all(np.abs(w.mean(axis=0) - 1 / d) <= 3.5 * se)
    assert diag.chains == 2000 and diag.n_steps == 150 * d


def test_chain_reproducible():
    a, _ = ns.sample_weights_mcmc(5, None, RandomStream(3), 10)
    b, _ = ns.sample_weights_mcmc(5, None, RandomStream(3), 10)
    np.testing.assert_array_equal(a, b)


def test_chain_config():
    cfg = ns.ChainConfig().resolve(10)
    assert (cfg.n_steps, cfg.burn_in, cfg.step_size) == (1500, 500, 0.05)
    assert ns.ChainConfig(n_steps=10).resolve(10).burn_in == 9
    with pytest.raises(ParameterError):
        ns.ChainConfig(n_steps=5, burn_in=5)
    with pytest.raises(ParameterError):
        ns.ChainConfig(method="gibbs")
    with pytest.raises(ParameterError):
        ns.ChainConfig.from_dict({"steps": 10, "thin": 2})
    cfg = ns.ChainConfig.from_dict({"steps": 100, "burn_in": 10, "step_size": 0.1, "method": "preconditioned-Langevin"})
    assert ns.ChainConfig.from_dict(cfg.to_dict()) == cfg


def test_radius_moments():
    rho = 0.7
    R = ns.sample_radius(10, rho, RandomStream(1), 10**4)
    assert abs(R.mean() / (100 * rho) - 1) <= 0.03
    assert abs(R.std() / (10 * rho) - 1) <= 0.05
    R1 = ns.sample_radius(1, rho, RandomStream(2), 10**4)
    assert stats.kstest(R1, stats.expon(scale=rho).cdf).pvalue >= 0.01


def test_noise_d1_is_laplace():
    rho = 0.25
    z = np.array([s.matrix[0, 0] for s in ns.sample_noise(1, rho, None, RandomStream(3), size=10**4)])
    assert stats.kstest(z, stats.laplace(scale=rho).cdf).pvalue >= 0.01


@pytest.mark.parametrize("d", [1, 2, 3, 7])
def test_noise_identities(d):
    for z in ns.sample_noise(d, 0.5, None, RandomStream(d), size=50):
        assert abs(nuclear_norm(z.matrix) - z.radius) <= 1e-8 * z.radius
        np.testing.assert_allclose(singular_values(z.matrix), z.radius * np.sort(z.weights)[::-1],
                                   rtol=1e-8, atol=1e-12 * z.radius)
        assert abs(z.weights.sum() - 1) <= 1e-12


def test_noise_radial_mean_d30():
    R = np.array([z.radius for z in ns.sample_noise(30, 1.0, None, RandomStream(30), size=1000)])
    assert abs(R.mean() / 900 - 1) <= 0.01


def test_log_density():
    assert ns.noise_log_density_unnormalized(np.zeros((3, 3)), 1.0) == 0.0
    assert ns.noise_log_density_unnormalized(np.diag([3.0, 4.0]), 1.0) == pytest.approx(-7.0)
    rng = np.random.default_rng(0)
    y, a, b = rng.standard_normal((3, 4, 4))
    lhs = ns.noise_log_density_unnormalized(y - a, 0.3) - ns.noise_log_density_unnormalized(y - b, 0.3)
    assert lhs == pytest.approx((nuclear_norm(y - b) - nuclear_norm(y - a)) / 0.3, rel=1e-12)
    with pytest.raises(ParameterError):
        ns.noise_log_density_unnormalized(np.eye(2), 0.0)


def test_limit_law_cdf():
    assert ns.limit_cdf(0.0) == 0.0
    assert ns.limit_cdf(1.0) == pytest.approx(1.0)
    # derivative matches the density (2/pi^2) arccosh(pi/s) with s = pi u
    u = 0.4
    h = 1e-6
    dens = (ns.limit_cdf(u + h) - ns.limit_cdf(u - h)) / (2 * h)
    assert dens == pytest.approx(math.pi * (2 / math.pi**2) * math.acosh(1 / u), rel=1e-6)


def test_bad_dimension_and_scale():
    with pytest.raises(ParameterError):
        ns.sample_noise(0, 1.0, None, RandomStream(0))
    with pytest.raises(ParameterError):
        ns.sample_noise(3, -1.0, None, RandomStream(0))
    with pytest.raises(ParameterError):
        ns.sample_weights_mcmc(1, None, RandomStream(0))
