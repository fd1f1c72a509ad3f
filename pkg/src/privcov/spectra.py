"""Dense spectral linear algebra: SVD, Schatten norms, l1/nuclear-ball projections."""

from typing import NamedTuple

import numpy as np

from .errors import InputError, ParameterError


class SvdTriple(NamedTuple):
    """Full SVD ``M = left @ diag(singular_values) @ right.T``."""

    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray

    def reconstruct(self):
        return (self.left * self.singular_values) @ self.right.T


def as_matrix(M, name="matrix"):
    """Return ``M`` as a square float array, raising InputError otherwise."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise InputError(f"{name} must be a non-empty square 2-D array, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InputError(f"{name} has non-finite entries")
    return M


def svd(M):
    """Full singular value decomposition of a square matrix.

    Singular values are returned nonincreasing (LAPACK order). The input is
    not assumed symmetric.
    """
    M = as_matrix(M)
    u, s, vh = np.linalg.svd(M)
    return SvdTriple(u, s, vh.T)


def singular_values(M):
    return np.linalg.svd(as_matrix(M), compute_uv=False)


def _check_p(p):
    p = float(p)
    if np.isnan(p) or p < 1:
        raise ParameterError(f"Schatten exponent must satisfy p >= 1, got {p}")
    return p


def schatten_norm(M, p):
    """Schatten p-norm: the l_p norm of the singular values of ``M``.

    ``p = np.inf`` gives the spectral norm, ``p = 1`` the nuclear norm and
    ``p = 2`` the Frobenius norm.
    """
    p = _check_p(p)
    s = singular_values(M)
    return _lp(s, p)


def _lp(s, p):
    if np.isinf(p):
        return float(s.max())
    if p == 1:
        return float(s.sum())
    if p == 2:
        return float(np.sqrt(np.dot(s, s)))
    top = s.max()
    if top == 0:
        return 0.0
    # scale first so s**p cannot overflow for large p
    return float(top * np.sum((s / top) ** p) ** (1.0 / p))


def schatten_norms(M, ps=(1, 2, 4, np.inf)):
    """Several Schatten norms from one SVD, as a dict keyed by ``p``."""
    s = singular_values(M)
    return {p: _lp(s, _check_p(p)) for p in ps}


def nuclear_norm(M):
    return float(singular_values(M).sum())


def project_l1_ball(s, r):
    """Euclidean projection of a nonnegative vector onto ``{w >= 0, sum(w) <= r}``.

    Uses the sort-based threshold: find the largest ``k`` with
    ``s_(k) > (cumsum_k - r) / k`` and soft-threshold at that value.
    """
    s = np.asarray(s, dtype=float)
    if s.ndim != 1:
        raise InputError("s must be a 1-D vector")
    if not np.all(np.isfinite(s)) or np.any(s < 0):
        raise InputError("s must be finite and entrywise nonnegative")
    r = float(r)
    if not np.isfinite(r) or r < 0:
        raise InputError(f"radius must be finite and nonnegative, got {r}")
    if r == 0:
        return np.zeros_like(s)
    if s.sum() <= r:
        return s.copy()
    desc = np.sort(s, kind="stable")[::-1]
    css = np.cumsum(desc)
    k = np.arange(1, s.size + 1)
    theta = (css - r) / k
    active = np.nonzero(desc > theta)[0]
    # k = 0 always qualifies in exact arithmetic; rounding can hide it when r is tiny
    k = active[-1] if active.size else 0
    return np.maximum(s - theta[k], 0.0)


def project_nuclear_ball(M, r):
    """Frobenius projection of ``M`` onto ``{Y : ||Y||_* <= r}``.

    Both norms are unitarily invariant, so the projection keeps the singular
    vectors and projects the singular values onto the l1 ball.
    """
    r = float(r)
    if not np.isfinite(r) or r < 0:
        raise InputError(f"radius must be finite and nonnegative, got {r}")
    M = as_matrix(M)
    u, s, v = svd(M)
    if s.sum() <= r:
        return M.copy()
    return (u * project_l1_ball(s, r)) @ v.T
