"""Pure epsilon-DP covariance release.

Two mechanisms are provided:

``perturb``
    Release ``Sigma + Z`` with ``Z ~ exp(-||Z||_* / rho)`` and
    ``rho = 2 / (eps n)``. Replacing one row moves ``Sigma`` by at most
    ``2/n`` in nuclear norm, so this is the K-norm mechanism for the nuclear
    ball.

``project``
    Run ``perturb`` with budget ``eps/2``, then project the result onto the
    nuclear ball of radius ``max(0, 2 tr(Sigma) + Lap(10 / (eps n)))``. The
    radius query has sensitivity ``4/n`` and costs ``0.4 eps``, so the total
    spend is ``0.9 eps``.

The released matrix of ``perturb`` is in general neither symmetric nor PSD;
:func:`symmetrize_psd` is available as opt-in post-processing.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InputError, ParameterError, ValidationError
from .nucsampler import check_rho, noise_log_density_unnormalized, sample_noise
from .randsrc import as_stream, laplace
from .spectra import as_matrix, nuclear_norm, project_nuclear_ball

ROW_NORM_SLACK = 1e-12
MECHANISMS = ("perturb", "project")
RADIUS_BUDGET_FRACTION = 0.4


def validate_dataset(X, clip_rows=False):
    """Return ``X`` as an ``(n, d)`` float array whose rows lie in the unit ball.

    With ``clip_rows`` rows of norm above 1 are rescaled to norm 1; otherwise
    they raise :class:`ValidationError`.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise InputError(f"dataset must be a non-empty (n, d) array, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InputError("dataset has non-finite entries")
    norms = np.linalg.norm(X, axis=1)
    bad = norms > 1.0 + ROW_NORM_SLACK
    if np.any(bad):
        if not clip_rows:
            first = int(np.argmax(bad))
            raise ValidationError(f"row {first} has norm {norms[first]:.6g} > 1")
        X = X.copy()
        X[bad] /= norms[bad, None]
    return X


@dataclass(frozen=True)
class CovarianceMatrix:
    """``(1/n) sum_i x_i x_i^T`` together with the row count ``n``."""

    matrix: np.ndarray
    n: int

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def trace(self):
        return float(np.trace(self.matrix))


def compute_covariance(X, clip_rows=False):
    X = validate_dataset(X, clip_rows)
    n = X.shape[0]
    S = X.T @ X / n
    return CovarianceMatrix(0.5 * (S + S.T), n)


@dataclass(frozen=True)
class PrivacyParams:
    epsilon: float
    n: int

    def __post_init__(self):
        if not (float(self.epsilon) > 0) or not np.isfinite(self.epsilon):
            raise ParameterError(f"epsilon must be positive and finite, got {self.epsilon}")
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"n must be a positive integer, got {self.n}")

    @property
    def sensitivity(self):
        """Nuclear-norm distance between covariances of adjacent datasets."""
        return 2.0 / self.n

    @property
    def rho(self):
        return self.sensitivity / self.epsilon

    @property
    def radius_scale(self):
        """Laplace scale of the private trace estimate used by ``project``."""
        return 10.0 / (self.epsilon * self.n)

    def halved(self):
        return PrivacyParams(self.epsilon / 2.0, self.n)


@dataclass
class MechanismOutput:
    estimate: np.ndarray
    mechanism: str
    epsilon: float
    budget_spent: float
    realized_radius: float | None = None

    @property
    def dim(self):
        return self.estimate.shape[0]

    def to_dict(self):
        out = {"dim": self.dim, "epsilon": self.epsilon, "mechanism": self.mechanism}
        if self.realized_radius is not None:
            out["realized_radius"] = self.realized_radius
        out["budget_spent"] = self.budget_spent
        out["matrix"] = self.estimate.tolist()
        return out

    @classmethod
    def from_dict(cls, data):
        return cls(np.asarray(data["matrix"], dtype=float), data["mechanism"], data["epsilon"],
                   data.get("budget_spent", data["epsilon"]), data.get("realized_radius"))


def _as_cov(cov):
    if not isinstance(cov, CovarianceMatrix):
        raise InputError("expected a CovarianceMatrix (see compute_covariance)")
    return cov


def perturb_with_noise(cov, params, cfg, rng):
    """``perturb`` that also returns the noise draw, for experiments only."""
    cov = _as_cov(cov)
    noise = sample_noise(cov.dim, params.rho, cfg, as_stream(rng))
    out = MechanismOutput(cov.matrix + noise.matrix, "perturb", params.epsilon, params.epsilon)
    return out, noise


def perturb_mechanism(cov, params, cfg, rng):
    """Release ``Sigma + Z`` with nuclear-Laplace noise of scale ``2 / (eps n)``."""
    return perturb_with_noise(cov, params, cfg, rng)[0]


def private_radius(cov, params, rng):
    """``max(0, 2 tr(Sigma) + Lap(10 / (eps n)))``; spends ``0.4 eps``."""
    cov = _as_cov(cov)
    return max(0.0, 2.0 * cov.trace + float(laplace(params.radius_scale, as_stream(rng))))


@dataclass
class ProjectionTrace:
    """Intermediate quantities of one ``project`` run, for experiments."""

    perturbed: np.ndarray
    radius: float
    noise: object


def project_with_trace(cov, params, cfg, rng):
    cov = _as_cov(cov)
    rng = as_stream(rng)
    half = params.halved()
    first, noise = perturb_with_noise(cov, half, cfg, rng)
    r = private_radius(cov, params, rng)
    estimate = project_nuclear_ball(first.estimate, r)
    spent = half.epsilon + RADIUS_BUDGET_FRACTION * params.epsilon
    out = MechanismOutput(estimate, "project", params.epsilon, spent, r)
    return out, ProjectionTrace(first.estimate, r, noise)


def project_mechanism(cov, params, cfg, rng):
    """Perturb with ``eps/2``, then project onto a privately sized nuclear ball."""
    return project_with_trace(cov, params, cfg, rng)[0]


def release(cov, params, mechanism, cfg, rng):
    if mechanism == "perturb":
        return perturb_mechanism(cov, params, cfg, rng)
    if mechanism == "project":
        return project_mechanism(cov, params, cfg, rng)
    raise ParameterError(f"unknown mechanism {mechanism!r}; expected one of {MECHANISMS}")


def symmetrize_psd(M):
    """Nearest PSD matrix to the symmetric part of ``M`` (negative eigenvalues clipped)."""
    M = as_matrix(M)
    sym = 0.5 * (M + M.T)
    vals, vecs = np.linalg.eigh(sym)
    return (vecs * np.clip(vals, 0.0, None)) @ vecs.T


def dp_log_ratio_bound(cov, cov_prime, y, rho):
    """Log-density ratio of outputs ``y`` under two inputs, and its bound.

    Returns ``(observed, bound)`` with
    ``observed = log p(y | Sigma) - log p(y | Sigma')`` (the normalizers
    cancel) and ``bound = ||Sigma - Sigma'||_* / rho``. The triangle
    inequality gives ``observed <= bound`` for every ``y``.
    """
    A = cov.matrix if isinstance(cov, CovarianceMatrix) else as_matrix(cov)
    B = cov_prime.matrix if isinstance(cov_prime, CovarianceMatrix) else as_matrix(cov_prime)
    y = as_matrix(y, "y")
    rho = check_rho(rho)
    observed = noise_log_density_unnormalized(y - A, rho) - noise_log_density_unnormalized(y - B, rho)
    return observed, nuclear_norm(A - B) / rho
