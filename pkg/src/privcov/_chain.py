"""Compiled MCMC moves for the simplex weight law.

Target (unnormalized) on the ordered chamber ``w_0 > w_1 > ... > w_{d-1} > 0``,
``sum(w) = 1``::

    log f(w) = sum_{i<j} log(w_i - w_j) + log(w_i + w_j)

``log f`` is concave on the chamber, so its restriction to any line is
log-concave on the chord. Every move below samples a chord exactly with
shrinkage slice sampling, which keeps the target invariant without tuning.
Each kernel reseeds numba's generator, so a call is a pure function of its
arguments.
"""

import numpy as np
from numba import njit

MAX_SHRINK = 200


@njit(cache=True, nogil=True)
def _pair_logf(w, i, j, t):
    d = w.shape[0]
    wi = w[i] + t
    wj = w[j] - t
    acc = np.log(abs(wi - wj))
    for k in range(d):
        if k == i or k == j:
            continue
        wk = w[k]
        acc += np.log(abs(wi - wk) * (wi + wk) * abs(wj - wk) * (wj + wk))
    return acc


@njit(cache=True, nogil=True)
def _pair_move(w, i, j):
    # direction e_i - e_j; chord ends at the nearest coincidence or zero
    d = w.shape[0]
    wi = w[i]
    wj = w[j]
    lo = -wi
    hi = wj
    mid = 0.5 * (wj - wi)
    if mid < 0:
        lo = max(lo, mid)
    else:
        hi = min(hi, mid)
    for k in range(d):
        if k == i or k == j:
            continue
        a = w[k] - wi
        b = wj - w[k]
        if a < 0:
            lo = max(lo, a)
        else:
            hi = min(hi, a)
        if b < 0:
            lo = max(lo, b)
        else:
            hi = min(hi, b)
    level = _pair_logf(w, i, j, 0.0) - np.random.exponential()
    n = 0
    while True:
        n += 1
        t = lo + (hi - lo) * np.random.random()
        if _pair_logf(w, i, j, t) > level:
            break
        if t < 0.0:
            lo = t
        else:
            hi = t
        if n >= MAX_SHRINK:
            return n, True
    w[i] += t
    w[j] -= t
    return n, False


@njit(cache=True, nogil=True)
def _radial_logf(dev, c, s, power):
    d = dev.shape[0]
    acc = power * np.log(s)
    for i in range(d):
        for j in range(i + 1, d):
            acc += np.log(2.0 * c + s * (dev[i] + dev[j]))
    return acc


@njit(cache=True, nogil=True)
def _radial_move(w):
    # w -> c + s (w - c) about the barycenter c; polar Jacobian s^(d-2),
    # pairwise differences contribute s^(d(d-1)/2)
    d = w.shape[0]
    c = 1.0 / d
    dev = w - c
    smax = np.inf
    for i in range(d):
        if dev[i] < 0:
            smax = min(smax, c / -dev[i])
    power = d * (d - 1) / 2.0 + d - 2.0
    level = _radial_logf(dev, c, 1.0, power) - np.random.exponential()
    lo = 0.0
    hi = smax
    n = 0
    while True:
        n += 1
        s = lo + (hi - lo) * np.random.random()
        if s > 0.0 and _radial_logf(dev, c, s, power) > level:
            break
        if s < 1.0:
            lo = s
        else:
            hi = s
        if n >= MAX_SHRINK:
            return n, True
    for i in range(d):
        w[i] = c + s * dev[i]
    return n, False


@njit(cache=True, nogil=True)
def hit_and_run(W, n_steps, burn_in, seed, out_diag):
    """Advance each row of ``W`` (sorted, descending) by ``n_steps`` moves.

    One step is a pair move along ``e_i - e_j`` for a uniform random pair;
    after every ``d`` steps a radial move rescales the spread about the
    barycenter. ``out_diag[b]`` receives, per chain: mean density evaluations
    per move, number of stalled moves, and the post-burn-in time average of
    ``max(w)``.
    """
    np.random.seed(seed)
    B, d = W.shape
    for b in range(B):
        w = W[b]
        evals = 0
        moves = 0
        stalls = 0
        max_acc = 0.0
        kept = 0
        for step in range(n_steps):
            i = np.random.randint(d)
            j = (i + 1 + np.random.randint(d - 1)) % d
            n, stalled = _pair_move(w, i, j)
            evals += n
            moves += 1
            stalls += stalled
            if d > 2 and (step + 1) % d == 0:
                n, stalled = _radial_move(w)
                evals += n
                moves += 1
                stalls += stalled
            if step >= burn_in:
                max_acc += w[0]
                kept += 1
        total = w.sum()
        for k in range(d):
            w[k] /= total
        out_diag[b, 0] = evals / max(moves, 1)
        out_diag[b, 1] = stalls
        out_diag[b, 2] = max_acc / max(kept, 1)
