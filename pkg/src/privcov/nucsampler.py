"""Sampler for the nuclear-Laplace matrix law ``p(Z) ~ exp(-||Z||_* / rho)``.

Writing ``Z = R U diag(w) V^T`` with ``R = ||Z||_*`` and ``w`` on the simplex,
the Lebesgue measure on real d x d matrices factors so that

* ``R ~ Gamma(shape=d**2, scale=rho)``,
* ``U`` and ``V`` are independent Haar orthogonal matrices,
* ``w`` has density proportional to ``prod_{i<j} |w_i**2 - w_j**2|``,

all mutually independent. ``R``, ``U`` and ``V`` are sampled exactly. ``w`` is
exact for ``d <= 2`` and otherwise comes from an MCMC chain, so for ``d >= 3``
the released noise matches the target only up to the chain's total-variation
error; :class:`ChainDiagnostics` reports what the chain saw.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _chain
from .errors import DomainError, ParameterError, SamplerError
from .randsrc import as_stream, gamma
from .spectra import as_matrix, nuclear_norm

METHODS = ("hit-and-run", "preconditioned-Langevin")


@dataclass(frozen=True)
class ChainConfig:
    """MCMC settings for the weight chain.

    Fields left as None scale with the dimension at :meth:`resolve` time:
    ``n_steps = 150 d``, ``burn_in = 50 d``, ``step_size = 0.5 / d``.
    ``step_size`` is only used by the Langevin method; hit-and-run samples
    whole chords and needs no step.
    """

    n_steps: int | None = None
    burn_in: int | None = None
    step_size: float | None = None
    method: str = "hit-and-run"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ParameterError(f"unknown chain method {self.method!r}; expected one of {METHODS}")
        if self.n_steps is not None and self.n_steps < 1:
            raise ParameterError("n_steps must be positive")
        if self.burn_in is not None and self.burn_in < 1:
            raise ParameterError("burn_in must be positive")
        if self.n_steps is not None and self.burn_in is not None and self.burn_in >= self.n_steps:
            raise ParameterError("burn_in must be smaller than n_steps")
        if self.step_size is not None and not self.step_size > 0:
            raise ParameterError("step_size must be positive")

    def resolve(self, d):
        n_steps = self.n_steps if self.n_steps is not None else 150 * d
        burn_in = self.burn_in if self.burn_in is not None else min(50 * d, n_steps - 1)
        step = self.step_size if self.step_size is not None else 0.5 / d
        if burn_in >= n_steps:
            raise ParameterError(f"burn_in ({burn_in}) must be smaller than n_steps ({n_steps})")
        return replace(self, n_steps=n_steps, burn_in=burn_in, step_size=step)

    @classmethod
    def from_dict(cls, data):
        """Build from the JSON keys ``steps``, ``burn_in``, ``step_size``, ``method``."""
        known = {"steps", "burn_in", "step_size", "method"}
        extra = set(data) - known
        if extra:
            raise ParameterError(f"unknown chain keys: {sorted(extra)}")
        return cls(
            n_steps=data.get("steps"),
            burn_in=data.get("burn_in"),
            step_size=data.get("step_size"),
            method=data.get("method", "hit-and-run"),
        )

    def to_dict(self):
        return {"steps": self.n_steps, "burn_in": self.burn_in, "step_size": self.step_size, "method": self.method}


@dataclass
class ChainDiagnostics:
    method: str
    chains: int
    n_steps: int
    burn_in: int
    # hit-and-run: density evaluations per move; Langevin: acceptance rate
    efficiency: float
    stalls: int
    mean_max_weight: float

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class SpectralNoise:
    """A noise draw together with the factors it was assembled from."""

    radius: float
    left: np.ndarray
    weights: np.ndarray
    right: np.ndarray
    matrix: np.ndarray = field(repr=False)
    diagnostics: ChainDiagnostics | None = field(default=None, repr=False)


def check_rho(rho):
    rho = float(rho)
    if not rho > 0 or not math.isfinite(rho):
        raise ParameterError(f"noise scale rho must be positive and finite, got {rho}")
    return rho


def _check_dim(d):
    if int(d) != d or d < 1:
        raise ParameterError(f"dimension must be a positive integer, got {d!r}")
    return int(d)


def sample_haar_orthogonal(d, rng, size=None):
    """Haar-distributed orthogonal matrices via sign-corrected QR of Gaussians.

    Multiplying each column of ``Q`` by the sign of the matching diagonal
    entry of ``R`` makes the decomposition unique, which is what turns QR of
    a Gaussian matrix into an exact Haar draw.
    """
    d = _check_dim(d)
    rng = as_stream(rng)
    shape = (d, d) if size is None else (size, d, d)
    q, r = np.linalg.qr(rng.gaussian(shape))
    signs = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    signs[signs == 0] = 1.0
    return q * signs[..., None, :]


def weight_log_density(w):
    """Unnormalized log density of the simplex weight law.

    Returns ``sum_{i<j} log|w_i - w_j| + log(w_i + w_j)``, which is ``-inf``
    when two weights coincide.
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise DomainError("weights must be a non-empty 1-D vector")
    if np.any(~np.isfinite(w)) or np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-9:
        raise DomainError("weights must lie in the open simplex")
    i, j = np.triu_indices(w.size, 1)
    with np.errstate(divide="ignore"):
        return float(np.sum(np.log(np.abs(w[i] - w[j]))) + np.sum(np.log(w[i] + w[j])))


def sample_weights_exact_d2(rng, size=None):
    """Exact inverse-CDF draw of the d = 2 weight law.

    The first weight ``t`` has density ``2 |2t - 1|`` on (0, 1).
    """
    rng = as_stream(rng)
    p = rng.uniform(size=size)
    t = _d2_quantile(p)
    return np.stack([t, 1.0 - t], axis=-1)


def _d2_quantile(p):
    p = np.asarray(p, dtype=float)
    low = 0.5 * (1.0 - np.sqrt(np.clip(1.0 - 2.0 * p, 0.0, None)))
    high = 0.5 * (1.0 + np.sqrt(np.clip(2.0 * p - 1.0, 0.0, None)))
    return np.where(p <= 0.5, low, high)


def d2_cdf(t):
    """CDF of the first weight for d = 2."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return np.where(t <= 0.5, 2.0 * t * (1.0 - t), 0.5 + 2.0 * (t - 0.5) ** 2)


# sup of prod |w_i^2 - w_j^2| over the simplex (numerical maximization,
# attained on the face w_d = 0), padded by 0.1%
_REJECTION_ENVELOPE = {2: 1.0, 3: 0.0178885438200 * 1.001, 4: 2.62227155917e-06 * 1.001}


def sample_weights_rejection(d, rng, size=None, max_proposals=10**7, return_rate=False):
    """Exact weight draws for small ``d`` by rejection from the uniform simplex.

    A uniform proposal is accepted with probability
    ``prod |w_i**2 - w_j**2| / M`` where ``M`` bounds the product from above.
    With ``return_rate`` the empirical acceptance rate is returned as well.
    """
    d = _check_dim(d)
    if d not in (2, 3, 4):
        raise ParameterError("rejection sampler supports d in {2, 3, 4}")
    rng = as_stream(rng)
    want = 1 if size is None else int(size)
    out = []
    have = 0
    proposed = 0
    i, j = np.triu_indices(d, 1)
    while have < want:
        batch = min(max(8 * (want - have), 1024), 2**20)
        e = rng.exponential((batch, d))
        w = e / e.sum(axis=1, keepdims=True)
        accept = np.prod(np.abs(w[:, i] ** 2 - w[:, j] ** 2), axis=1) / _REJECTION_ENVELOPE[d]
        if accept.max() > 1.0:
            raise SamplerError("rejection envelope is below the target density")
        keep = rng.uniform(size=batch) < accept
        proposed += batch
        out.append(w[keep])
        have += int(keep.sum())
        if have < want and proposed > max_proposals:
            raise SamplerError(f"rejection sampler stalled after {proposed} proposals")
    rate = have / proposed
    w = np.concatenate(out)[:want]
    w = w[0] if size is None else w
    return (w, rate) if return_rate else w


def sample_radius(d, rho, rng, size=None):
    """Nuclear norm of a noise draw: ``Gamma(shape=d**2, scale=rho)``."""
    d = _check_dim(d)
    return gamma(d * d, check_rho(rho), as_stream(rng), size)


def limit_cdf(u):
    """Large-d CDF of ``d w_i / pi`` (a weight rescaled to [0, 1]).

    The rescaled singular values ``s = d w`` converge to the density
    ``(2 / pi**2) arccosh(pi / s)`` on ``[0, pi]``.
    """
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    safe = np.where(u > 0, u, 1.0)
    head = np.where(u > 0, u * np.arccosh(1.0 / safe), 0.0)
    return (2.0 / np.pi) * (head + np.arcsin(u))


def _limit_quantile(p):
    lo = np.zeros_like(p)
    hi = np.ones_like(p)
    for _ in range(55):
        mid = 0.5 * (lo + hi)
        below = limit_cdf(mid) < p
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def _initial_states(d, chains, rng):
    """Stratified draws from the large-d limit law, sorted descending.

    Starting near the bulk shape leaves the chain only finite-d corrections
    to equilibrate; the start is strictly inside the chamber almost surely.
    """
    p = (np.arange(d)[None, :] + rng.uniform(size=(chains, d))) / d
    w = np.sort(_limit_quantile(p), axis=1)[:, ::-1]
    w = np.ascontiguousarray(w) + 1e-12
    return w / w.sum(axis=1, keepdims=True)


def sample_weights_mcmc(d, cfg, rng, size=None):
    """Weight draws from independent MCMC chains, one chain per draw.

    Each chain lives in the ordered chamber; the returned coordinates are
    uniformly permuted, which is exact because the target is symmetric.

    Returns:
      ``(weights, diagnostics)`` with weights of shape ``(d,)`` or ``(size, d)``.
    """
    d = _check_dim(d)
    if d < 2:
        raise ParameterError("MCMC weight chain needs d >= 2")
    cfg = (cfg or ChainConfig()).resolve(d)
    rng = as_stream(rng)
    chains = 1 if size is None else int(size)
    W = _initial_states(d, chains, rng)
    if cfg.method == "hit-and-run":
        diag = np.zeros((chains, 3))
        _chain.hit_and_run(W, cfg.n_steps, cfg.burn_in, rng.kernel_seed(), diag)
        stalls = int(diag[:, 1].sum())
        diagnostics = ChainDiagnostics(cfg.method, chains, cfg.n_steps, cfg.burn_in,
                                       float(diag[:, 0].mean()), stalls, float(diag[:, 2].mean()))
        if stalls > 0.01 * chains * cfg.n_steps:
            raise SamplerError(f"weight chain stalled on {stalls} moves")
    else:
        W, diagnostics = _langevin(W, cfg, rng)
    if not np.all(np.isfinite(W)) or np.any(W <= 0):
        raise SamplerError("weight chain left the open simplex")
    perm = np.argsort(rng.uniform(size=W.shape), axis=1)
    W = np.take_along_axis(W, perm, axis=1)
    return (W[0] if size is None else W), diagnostics


def sample_weights(d, cfg, rng, size=None):
    """Weight draws; exact for ``d <= 2``, MCMC otherwise."""
    d = _check_dim(d)
    rng = as_stream(rng)
    if d == 1:
        return np.ones(1) if size is None else np.ones((int(size), 1))
    if d == 2:
        return sample_weights_exact_d2(rng, size)
    return sample_weights_mcmc(d, cfg, rng, size)[0]


def _sample_weights_diag(d, cfg, rng, size):
    if d <= 2:
        return sample_weights(d, cfg, rng, size), None
    return sample_weights_mcmc(d, cfg, rng, size)


def sample_noise(d, rho, cfg, rng, size=None):
    """Draw ``Z ~ exp(-||Z||_* / rho)`` as a :class:`SpectralNoise`.

    With ``size`` a list of independent draws is returned.
    """
    d = _check_dim(d)
    rho = check_rho(rho)
    rng = as_stream(rng)
    k = 1 if size is None else int(size)
    radius = np.atleast_1d(sample_radius(d, rho, rng, k))
    U = sample_haar_orthogonal(d, rng, k)
    V = sample_haar_orthogonal(d, rng, k)
    W, diag = _sample_weights_diag(d, cfg, rng, k)
    W = W.reshape(k, d)
    Z = np.einsum("bij,bj,bkj->bik", U, radius[:, None] * W, V)
    draws = [SpectralNoise(float(radius[b]), U[b], W[b], V[b], Z[b], diag) for b in range(k)]
    return draws[0] if size is None else draws


def noise_log_density_unnormalized(Z, rho):
    """``-||Z||_* / rho``."""
    return -nuclear_norm(as_matrix(Z)) / check_rho(rho)


def _tangent_basis(d):
    q, _ = np.linalg.qr(np.eye(d)[:, :-1] - 1.0 / d)
    return q


def _langevin_terms(W, Q):
    """Log density, tangent gradient and tangent Hessian of ``-log f``."""
    B, d = W.shape
    diff = W[:, :, None] - W[:, None, :]
    tot = W[:, :, None] + W[:, None, :]
    eye = np.eye(d, dtype=bool)
    upper = np.triu(np.ones((d, d), dtype=bool), 1)
    inside = np.all(np.where(upper, diff > 0, True), axis=(1, 2)) & np.all(W > 0, axis=1)
    diff = np.where(eye, 1.0, diff)
    tot = np.where(eye, 1.0, tot)
    with np.errstate(divide="ignore", invalid="ignore"):
        logf = np.where(upper, np.log(np.abs(diff)) + np.log(np.abs(tot)), 0.0).sum(axis=(1, 2))
        inv_d = np.where(eye, 0.0, 1.0 / diff)
        inv_t = np.where(eye, 0.0, 1.0 / tot)
    grad = (inv_d + inv_t).sum(axis=2) @ Q
    hess = np.where(eye, 0.0, inv_t**2 - inv_d**2)
    hess = hess + np.eye(d) * (inv_d**2 + inv_t**2).sum(axis=2)[:, :, None]
    G = np.einsum("ia,bij,jc->bac", Q, hess, Q)
    logf = np.where(inside, logf, -np.inf)
    return logf, grad, G


def _langevin(W, cfg, rng):
    """Position-preconditioned MALA in tangent coordinates.

    The preconditioner is the Hessian of ``-log f`` at the current point, which
    is positive definite on the tangent space inside the chamber.
    """
    B, d = W.shape
    Q = _tangent_basis(d)
    h = cfg.step_size

    def local(W):
        logf, grad, G = _langevin_terms(W, Q)
        L = np.linalg.cholesky(G)
        drift = np.linalg.solve(G, grad[..., None])[..., 0]
        logdet = 2.0 * np.log(np.diagonal(L, axis1=1, axis2=2)).sum(axis=1)
        return logf, G, L, drift, logdet

    state = local(W)
    accepted = 0.0
    counted = 0
    max_acc = np.zeros(B)
    for step in range(cfg.n_steps):
        logf, G, L, drift, logdet = state
        xi = rng.gaussian((B, d - 1))
        noise = np.linalg.solve(np.transpose(L, (0, 2, 1)), xi[..., None])[..., 0]
        dx = 0.5 * h * drift + math.sqrt(h) * noise
        prop = W + dx @ Q.T
        inside = np.all(prop > 0, axis=1) & np.all(prop[:, :-1] > prop[:, 1:], axis=1)
        prop = np.where(inside[:, None], prop, W)
        new = local(prop)
        logf_p, G_p, _, drift_p, logdet_p = new
        fwd = dx - 0.5 * h * drift
        bwd = -dx - 0.5 * h * drift_p
        log_q_fwd = -0.5 / h * np.einsum("bi,bij,bj->b", fwd, G, fwd) + 0.5 * logdet
        log_q_bwd = -0.5 / h * np.einsum("bi,bij,bj->b", bwd, G_p, bwd) + 0.5 * logdet_p
        with np.errstate(invalid="ignore"):
            log_alpha = logf_p - logf + log_q_bwd - log_q_fwd
        accept = inside & (np.log(rng.uniform(size=B)) < log_alpha)
        W = np.where(accept[:, None], prop, W)
        state = tuple(
            np.where(accept.reshape((B,) + (1,) * (a.ndim - 1)), a, b) for a, b in zip(new, state)
        )
        if step >= cfg.burn_in:
            accepted += accept.mean()
            counted += 1
            max_acc += W[:, 0]
    W = W / W.sum(axis=1, keepdims=True)
    diag = ChainDiagnostics(cfg.method, B, cfg.n_steps, cfg.burn_in,
                            accepted / max(counted, 1), 0, float(max_acc.mean() / max(counted, 1)))
    return W, diag
