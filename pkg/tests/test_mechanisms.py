import json

import numpy as np
import pytest
from scipy import stats

from privcov import mechanisms as mech
from privcov import nucsampler as ns
from privcov.errors import InputError, ParameterError, ValidationError
from privcov.randsrc import RandomStream
from privcov.spectra import nuclear_norm


def unit_ball_rows(n, d, seed):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * rng.uniform(size=(n, 1)) ** (1 / d)


def zero_noise(d, rho, cfg, rng, size=None):
    return ns.SpectralNoise(0.0, np.eye(d), np.full(d, 1 / d), np.eye(d), np.zeros((d, d)))


def test_covariance_examples():
    np.testing.assert_array_equal(mech.compute_covariance([[1.0, 0.0, 0.0]]).matrix, np.diag([1.0, 0, 0]))
    np.testing.assert_allclose(mech.compute_covariance([[1.0, 0.0], [0.0, 1.0]]).matrix, np.diag([0.5, 0.5]))


def test_covariance_random_is_psd_with_small_trace():
    X = unit_ball_rows(500, 6, 0)
    cov = mech.compute_covariance(X)
    assert cov.n == 500 and cov.dim == 6
    assert cov.trace <= 1
    assert cov.trace == pytest.approx(np.mean(np.sum(X**2, axis=1)))
    assert np.linalg.eigvalsh(cov.matrix).min() >= -1e-12
    np.testing.assert_array_equal(cov.matrix, cov.matrix.T)
    assert nuclear_norm(cov.matrix) == pytest.approx(cov.trace)


def test_row_norm_validation_and_clipping():
    X = [[1.5, 0.0], [0.0, 1.0]]
    with pytest.raises(ValidationError):
        mech.compute_covariance(X)
    cov = mech.compute_covariance(X, clip_rows=True)
    np.testing.assert_allclose(cov.matrix, np.diag([0.5, 0.5]))
    # norm exactly at the tolerance is accepted
    mech.validate_dataset([[1.0 + 5e-13, 0.0]])
    with pytest.raises(InputError):
        mech.compute_covariance([[np.nan, 0.0]])
    with pytest.raises(InputError):
        mech.compute_covariance(np.zeros((0, 3)))


def test_privacy_params():
    p = mech.PrivacyParams(2.0, 100)
    assert p.sensitivity == 0.02
    assert p.rho == pytest.approx(0.01)
    assert p.radius_scale == pytest.approx(0.05)
    assert p.halved().rho == pytest.approx(0.02)
    for eps, n in [(0, 10), (-1, 10), (float("inf"), 10), (1, 0), (1, 2.5)]:
        with pytest.raises(ParameterError):
            mech.PrivacyParams(eps, n)


def test_perturb_vanishing_noise():
    cov = mech.compute_covariance(unit_ball_rows(50, 4, 1))
    params = mech.PrivacyParams(2.0 / (1e-12 * 50), 50)
    assert params.rho == pytest.approx(1e-12)
    out = mech.perturb_mechanism(cov, params, None, RandomStream(0))
    assert np.linalg.norm(out.estimate - cov.matrix) <= 1e-6
    assert out.budget_spent == out.epsilon and out.mechanism == "perturb"


def test_perturb_d1_is_laplace():
    cov = mech.CovarianceMatrix(np.array([[0.5]]), 20)
    params = mech.PrivacyParams(1.0, 20)
    rng = RandomStream(2)
    z = np.array([mech.perturb_mechanism(cov, params, None, rng).estimate[0, 0] - 0.5 for _ in range(10**4)])
    assert stats.kstest(z, stats.laplace(scale=2 / 20).cdf).pvalue >= 0.01


def test_private_radius_hooks(monkeypatch):
    cov = mech.CovarianceMatrix(np.diag([0.2, 0.1]), 10)
    params = mech.PrivacyParams(1.0, 10)
    monkeypatch.setattr(mech, "laplace", lambda scale, rng, size=None: 0.0)
    assert mech.private_radius(cov, params, RandomStream(0)) == pytest.approx(0.6)
    monkeypatch.setattr(mech, "laplace", lambda scale, rng, size=None: -1e3)
    assert mech.private_radius(cov, params, RandomStream(0)) == 0.0


def test_private_radius_median():
    cov = mech.CovarianceMatrix(np.diag([0.2, 0.1]), 50)
    params = mech.PrivacyParams(1.0, 50)
    rng = RandomStream(3)
    trials = 4000
    r = np.array([mech.private_radius(cov, params, rng) for _ in range(trials)])
    assert abs(np.median(r - 0.6)) <= 3 * params.radius_scale / np.sqrt(trials)


def test_project_with_forced_zero_draws(monkeypatch):
    monkeypatch.setattr(mech, "sample_noise", zero_noise)
    monkeypatch.setattr(mech, "laplace", lambda scale, rng, size=None: 0.0)
    cov = mech.compute_covariance(unit_ball_rows(30, 3, 4))
    out = mech.project_mechanism(cov, mech.PrivacyParams(1.0, 30), None, RandomStream(0))
    np.testing.assert_allclose(out.estimate, cov.matrix, atol=1e-14)
    assert out.realized_radius == pytest.approx(2 * cov.trace)


def test_project_invariants():
    cov = mech.compute_covariance(unit_ball_rows(200, 5, 5) * 0.3)
    params = mech.PrivacyParams(1.0, 200)
    rng = RandomStream(6)
    for _ in range(100):
        out, tr = mech.project_with_trace(cov, params, None, rng)
        assert out.budget_spent == pytest.approx(0.9) and out.budget_spent <= out.epsilon
        assert nuclear_norm(out.estimate) <= out.realized_radius + 1e-8
        errF = np.linalg.norm(out.estimate - cov.matrix)
        if tr.radius >= cov.trace:
            assert errF <= np.linalg.norm(tr.perturbed - cov.matrix) + 1e-12
        else:
            assert errF <= nuclear_norm(out.estimate - cov.matrix) + 1e-12 <= tr.radius + cov.trace + 1e-9
        # the perturbation step runs with half the budget
        assert nuclear_norm(tr.perturbed - cov.matrix) == pytest.approx(tr.noise.radius, rel=1e-8)


def test_release_dispatch_and_unknown():
    cov = mech.CovarianceMatrix(np.eye(2) / 2, 2)
    params = mech.PrivacyParams(1.0, 2)
    assert mech.release(cov, params, "project", None, RandomStream(0)).mechanism == "project"
    with pytest.raises(ParameterError):
        mech.release(cov, params, "gauss", None, RandomStream(0))
    with pytest.raises(InputError):
        mech.perturb_mechanism(np.eye(2), params, None, RandomStream(0))


def test_symmetrize_psd():
    A = unit_ball_rows(10, 3, 7)
    P = A.T @ A
    np.testing.assert_allclose(mech.symmetrize_psd(P), P, atol=1e-12)
    np.testing.assert_allclose(mech.symmetrize_psd(np.diag([1.0, -1.0])), np.diag([1.0, 0.0]), atol=1e-15)
    K = np.array([[0.0, 2.0], [-2.0, 0.0]])
    np.testing.assert_array_equal(mech.symmetrize_psd(K), np.zeros((2, 2)))


def test_dp_log_ratio_examples():
    X = unit_ball_rows(20, 3, 8)
    Xp = X.copy()
    Xp[4] = unit_ball_rows(1, 3, 9)[0]
    a, b = mech.compute_covariance(X), mech.compute_covariance(Xp)
    rho = mech.PrivacyParams(1.0, 20).rho
    assert mech.dp_log_ratio_bound(a, a, a.matrix + 0.1, rho) == (0.0, 0.0)
    obs, bound = mech.dp_log_ratio_bound(a, b, a.matrix, rho)
    assert obs == pytest.approx(bound, rel=1e-12)
    assert bound <= 1.0 + 1e-9
    rng = np.random.default_rng(0)
    for _ in range(200):
        y = a.matrix + rng.standard_normal((3, 3)) * rho
        obs, bound = mech.dp_log_ratio_bound(a, b, y, rho)
        assert obs <= bound + 1e-9


def test_output_serialization_roundtrip():
    out = mech.MechanismOutput(np.array([[1.0, 0.25], [0.5, 2.0]]), "project", 1.0, 0.9, 0.3)
    data = json.loads(json.dumps(out.to_dict()))
    assert list(data) == ["dim", "epsilon", "mechanism", "realized_radius", "budget_spent", "matrix"]
    back = mech.MechanismOutput.from_dict(data)
    np.testing.assert_array_equal(back.estimate, out.estimate)
    assert back.realized_radius == 0.3 and back.budget_spent == 0.9
    assert "realized_radius" not in mech.MechanismOutput(np.eye(1), "perturb", 1.0, 1.0).to_dict()
