"""Monte Carlo experiments for the release mechanisms and the noise sampler.

Every experiment returns an :class:`ExperimentReport`: one row per trial,
summary statistics, and a list of :class:`Verdict` objects, each naming the
check it performed. Reports are reproducible from ``(config, seed)``: trial
``t`` draws from child stream ``t + 1`` of the root stream and the dataset
from child stream 0, so the result does not depend on ``workers``.
"""

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from . import mechanisms as mech
from . import nucsampler as ns
from .errors import AuditFailure, ParameterError
from .randsrc import RandomStream, as_stream
from .spectra import schatten_norms, singular_values

SCHATTEN_PS = (1, 2, 4, math.inf)
CHECKED_PS = (1, 2, math.inf)
PROFILES = ("isotropic", "low-trace", "rank-one")


def p_label(p):
    return "inf" if math.isinf(p) else str(int(p)) if float(p).is_integer() else str(p)


def schatten_bound(d, p, epsilon, n):
    """High-probability error bound ``3 d^(1 + 1/p) / (eps n)`` for ``perturb``."""
    return 3.0 * d ** (1.0 + 1.0 / p) / (epsilon * n)


@dataclass
class Verdict:
    name: str
    criterion: str
    passed: bool
    observed: object = None
    threshold: object = None

    def line(self):
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.name}: {self.criterion} (observed={_fmt(self.observed)}, threshold={_fmt(self.threshold)})"


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.6g}"
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


@dataclass
class ExperimentReport:
    kind: str
    config: dict
    columns: list
    rows: list
    summary: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)
    wall_clock: float = 0.0

    @property
    def passed(self):
        return all(v.passed for v in self.verdicts)

    def verdict(self, name):
        for v in self.verdicts:
            if v.name == name:
                return v
        raise KeyError(name)

    def column(self, name):
        k = self.columns.index(name)
        return np.array([row[k] for row in self.rows], dtype=float)

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
        return buf.getvalue()

    def to_json(self, include_timing=True):
        out = {
            "kind": self.kind,
            "config": self.config,
            "passed": self.passed,
            "verdicts": [asdict(v) for v in self.verdicts],
            "summary": self.summary,
        }
        if include_timing:
            out["wall_clock_s"] = self.wall_clock
        return json.dumps(_jsonable(out), indent=2, sort_keys=True) + "\n"

    def lines(self):
        return [v.line() for v in self.verdicts]


@dataclass
class ExperimentConfig:
    d: int
    n: int
    epsilon: float
    trials: int = 100
    mechanism: str = "perturb"
    data_profile: str = "isotropic"
    tau: float = 1.0
    seed: int | None = None
    chain: ns.ChainConfig = field(default_factory=ns.ChainConfig)
    workers: int = 1

    def __post_init__(self):
        if self.d < 1 or self.n < 1 or self.trials < 1:
            raise ParameterError("d, n and trials must be positive")
        if not self.epsilon > 0:
            raise ParameterError("epsilon must be positive")
        if self.mechanism not in mech.MECHANISMS:
            raise ParameterError(f"unknown mechanism {self.mechanism!r}")
        if self.data_profile not in PROFILES:
            raise ParameterError(f"unknown data profile {self.data_profile!r}; expected one of {PROFILES}")
        if not 0 < self.tau <= 1:
            raise ParameterError("tau must lie in (0, 1]")

    def to_dict(self):
        out = asdict(self)
        out["chain"] = self.chain.to_dict()
        return out


def synthesize_dataset(d, n, profile, tau, rng, chunk=100_000):
    """Rows inside the unit ball with ``tr(Sigma) = tau`` exactly.

    ``isotropic``: uniform on the sphere of radius ``sqrt(tau)``.
    ``low-trace``: Gaussian with variances ``1/i`` projected to that sphere,
    so the spectrum of ``Sigma`` decays.
    ``rank-one``: ``+-sqrt(tau) v`` for a single random unit vector ``v``.
    """
    rng = as_stream(rng)
    if profile == "rank-one":
        v = rng.gaussian(d)
        v /= np.linalg.norm(v)
        signs = np.where(rng.uniform(size=n) < 0.5, -1.0, 1.0)
        return math.sqrt(tau) * signs[:, None] * v[None, :]
    scale = np.ones(d) if profile == "isotropic" else 1.0 / np.sqrt(np.arange(1, d + 1))
    parts = []
    for start in range(0, n, chunk):
        g = rng.gaussian((min(chunk, n - start), d)) * scale
        parts.append(math.sqrt(tau) * g / np.linalg.norm(g, axis=1, keepdims=True))
    return np.concatenate(parts)


def _covariance_of_profile(cfg, rng):
    # streamed so n = 10**6 never materializes the whole dataset
    if cfg.n <= 200_000:
        return mech.compute_covariance(synthesize_dataset(cfg.d, cfg.n, cfg.data_profile, cfg.tau, rng))
    acc = np.zeros((cfg.d, cfg.d))
    if cfg.data_profile == "rank-one":
        X = synthesize_dataset(cfg.d, 1, "rank-one", cfg.tau, rng)
        return mech.CovarianceMatrix(X.T @ X, cfg.n)
    step = 100_000
    for start in range(0, cfg.n, step):
        X = synthesize_dataset(cfg.d, min(step, cfg.n - start), cfg.data_profile, cfg.tau, rng)
        acc += X.T @ X
    acc /= cfg.n
    return mech.CovarianceMatrix(0.5 * (acc + acc.T), cfg.n)


def _map(fn, items, workers):
    if workers <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(fn, items))


def _error_columns(kind):
    cols = ["trial"] + [f"err_S{p_label(p)}" for p in SCHATTEN_PS] + [f"bound_S{p_label(p)}" for p in SCHATTEN_PS]
    if kind == "perturb":
        cols += ["radius", "noise_S1", "noise_S2", "noise_S4", "noise_Sinf", "d_max_w", "spectral_over_rho_d"]
    else:
        cols += ["perturbed_err_F", "ratio_F", "realized_radius", "trace", "err_nuclear_vs_radius"]
    return cols


def run_error_experiment(cfg):
    """Run a release mechanism ``cfg.trials`` times on one synthesized dataset.

    For ``perturb`` the verdicts check that at least 95% of trials meet
    ``3 d^(1+1/p) / (eps n)`` for ``p`` in {1, 2, inf}, and that the recorded
    errors equal the Schatten norms of the stored noise. For ``project`` they
    check the median Frobenius ratio against the intermediate ``perturb``
    output (<= 0.3), per-trial non-worsening when the radius covers
    ``tr(Sigma)``, and the small-radius fallback bound otherwise.
    """
    t0 = time.perf_counter()
    root = RandomStream(cfg.seed)
    cov = _covariance_of_profile(cfg, root.child(0))
    params = mech.PrivacyParams(cfg.epsilon, cfg.n)
    bounds = [schatten_bound(cfg.d, p, cfg.epsilon, cfg.n) for p in SCHATTEN_PS]
    rho_d = params.rho * cfg.d

    def trial(t):
        rng = root.child(t + 1)
        if cfg.mechanism == "perturb":
            out, noise = mech.perturb_with_noise(cov, params, cfg.chain, rng)
            err = schatten_norms(out.estimate - cov.matrix, SCHATTEN_PS)
            nz = schatten_norms(noise.matrix, SCHATTEN_PS)
            return ([t] + [err[p] for p in SCHATTEN_PS] + bounds
                    + [noise.radius] + [nz[p] for p in SCHATTEN_PS]
                    + [cfg.d * float(noise.weights.max()), nz[math.inf] / rho_d])
        out, tr = mech.project_with_trace(cov, params, cfg.chain, rng)
        err = schatten_norms(out.estimate - cov.matrix, SCHATTEN_PS)
        first = float(np.linalg.norm(tr.perturbed - cov.matrix))
        return ([t] + [err[p] for p in SCHATTEN_PS] + bounds
                + [first, err[2] / first, tr.radius, cov.trace, err[1] - (tr.radius + cov.trace)])

    rows = _map(trial, range(cfg.trials), cfg.workers)
    report = ExperimentReport("error", cfg.to_dict(), _error_columns(cfg.mechanism), rows)
    summary = report.summary
    summary["trace"] = cov.trace
    summary["rho"] = params.rho if cfg.mechanism == "perturb" else params.halved().rho
    for p in SCHATTEN_PS:
        e = report.column(f"err_S{p_label(p)}")
        summary[f"S{p_label(p)}"] = {
            "q50": float(np.quantile(e, 0.50)),
            "q95": float(np.quantile(e, 0.95)),
            "q99": float(np.quantile(e, 0.99)),
            "bound": schatten_bound(cfg.d, p, cfg.epsilon, cfg.n),
            "fraction_within_bound": float(np.mean(e <= schatten_bound(cfg.d, p, cfg.epsilon, cfg.n))),
        }
    if cfg.mechanism == "perturb":
        _perturb_verdicts(report, cfg)
    else:
        _project_verdicts(report, cfg, cov)
    report.wall_clock = time.perf_counter() - t0
    return report


def _perturb_verdicts(report, cfg):
    s = report.summary
    for p in CHECKED_PS:
        frac = s[f"S{p_label(p)}"]["fraction_within_bound"]
        report.verdicts.append(Verdict(
            f"schatten_bound_S{p_label(p)}",
            f"at least 95% of trials have ||out - Sigma||_S{p_label(p)} <= 3 d^(1+1/p)/(eps n)",
            frac >= 0.95, frac, 0.95))
    radius = report.column("radius")
    rel = np.abs(report.column("err_S1") - radius) / radius
    report.verdicts.append(Verdict(
        "nuclear_error_equals_radius", "per trial |err_S1 - R| / R <= 1e-8", bool(rel.max() <= 1e-8), float(rel.max()), 1e-8))
    worst = 0.0
    for p in SCHATTEN_PS:
        e = report.column(f"err_S{p_label(p)}")
        z = report.column(f"noise_S{p_label(p)}")
        worst = max(worst, float(np.max(np.abs(e - z) / z)))
    report.verdicts.append(Verdict(
        "error_equals_noise_norm", "per trial recorded errors equal Schatten norms of the stored noise (rel 1e-8)",
        worst <= 1e-8, worst, 1e-8))
    s["d_max_w_mean"] = float(report.column("d_max_w").mean())
    s["spectral_over_rho_d_median"] = float(np.median(report.column("spectral_over_rho_d")))


def _project_verdicts(report, cfg, cov):
    ratio = report.column("ratio_F")
    med = float(np.median(ratio))
    report.summary["ratio_F_median"] = med
    report.verdicts.append(Verdict(
        "frobenius_ratio_median", "median ||proj - Sigma||_F / ||perturbed - Sigma||_F <= 0.3", med <= 0.3, med, 0.3))
    r = report.column("realized_radius")
    errF = report.column("err_S2")
    first = report.column("perturbed_err_F")
    covered = r >= cov.trace
    slack = 1e-12 * np.maximum(1.0, first)
    worsened = int(np.sum(covered & (errF > first + slack)))
    report.verdicts.append(Verdict(
        "projection_non_worsening", "every trial with radius >= tr(Sigma) has ||proj - Sigma||_F <= ||perturbed - Sigma||_F",
        worsened == 0, worsened, 0))
    errN = report.column("err_S1")
    small = ~covered
    broken = int(np.sum(small & ((errF > errN + 1e-12) | (errN > r + cov.trace + 1e-9))))
    report.verdicts.append(Verdict(
        "small_radius_fallback", "every trial with radius < tr(Sigma) has ||proj - Sigma||_F <= ||proj - Sigma||_* <= r + tr(Sigma)",
        broken == 0, {"violations": broken, "trials_with_small_radius": int(small.sum())}, 0))
    spent = mech.PrivacyParams(cfg.epsilon, cfg.n).halved().epsilon + mech.RADIUS_BUDGET_FRACTION * cfg.epsilon
    report.verdicts.append(Verdict(
        "budget_within_epsilon", "recorded budget 0.9 eps <= eps", spent <= cfg.epsilon, spent, cfg.epsilon))
    report.summary["radius_covers_trace_fraction"] = float(covered.mean())


def run_concentration_experiment(d, rho, trials, cfg, rng, *, spectral_factor=1.5, median_range=(0.8, 1.3)):
    """Radial, weight and spectral-norm statistics of the noise law.

    ``d`` may be an int or a sequence of ints. Per dimension the verdicts
    check the mean and spread of ``R / (rho d**2)``, that at least 95% of
    draws satisfy ``||Z|| <= spectral_factor * rho d``, that the median of
    ``||Z|| / (rho d)`` lies in ``median_range``, and that each weight
    coordinate has mean ``1/d`` within 3 standard errors. Across several
    dimensions it checks that the mean of ``d max w`` is nonincreasing in d.

    The radial tolerances are 1% on the mean and 10% on the standard
    deviation, widened to 4 standard errors when ``trials`` is too small for
    those to be meaningful.
    """
    t0 = time.perf_counter()
    rng = as_stream(rng)
    dims = [int(d)] if np.ndim(d) == 0 else [int(x) for x in d]
    rho = ns.check_rho(rho)
    cfg = cfg or ns.ChainConfig()
    columns = ["d", "trial", "radius_over_rho_d2", "d_max_w", "spectral_over_rho_d"]
    rows = []
    report = ExperimentReport("concentration", {"d": dims, "rho": rho, "trials": trials, "chain": cfg.to_dict(),
                                                "spectral_factor": spectral_factor, "median_range": list(median_range)},
                              columns, rows)
    trend = []
    for k, dim in enumerate(dims):
        draws = ns.sample_noise(dim, rho, cfg, rng.child(k), size=trials)
        radius = np.array([z.radius for z in draws]) / (rho * dim * dim)
        W = np.array([z.weights for z in draws])
        dmax = dim * W.max(axis=1)
        snorm = np.array([singular_values(z.matrix)[0] for z in draws]) / (rho * dim)
        for t in range(trials):
            rows.append([dim, t, radius[t], dmax[t], snorm[t]])
        tag = f"d{dim}"
        mean_tol = max(0.01, 4.0 / (dim * math.sqrt(trials)))
        std_tol = max(0.10, 4.0 / math.sqrt(2.0 * trials))
        r_mean = float(radius.mean())
        r_std = float(radius.std(ddof=1)) * dim if trials > 1 else float("nan")
        frac = float(np.mean(snorm <= spectral_factor))
        med = float(np.median(snorm))
        se = W.std(axis=0, ddof=1) / math.sqrt(trials) if trials > 1 else np.full(dim, np.inf)
        dev = np.abs(W.mean(axis=0) - 1.0 / dim)
        worst = float(np.max(dev / np.where(se > 0, se, np.inf))) if dim > 1 else 0.0
        report.summary[tag] = {
            "radius_mean": r_mean, "radius_std_over_rho_d": r_std,
            "d_max_w_mean": float(dmax.mean()), "d_max_w_se": float(dmax.std(ddof=1) / math.sqrt(trials)) if trials > 1 else None,
            "spectral_over_rho_d_median": med, "spectral_over_rho_d_q95": float(np.quantile(snorm, 0.95)),
            "fraction_spec_within": frac, "max_coordinate_z": worst,
            "chain": None if draws[0].diagnostics is None else draws[0].diagnostics.to_dict(),
        }
        trend.append(float(dmax.mean()))
        report.verdicts += [
            Verdict(f"radial_mean_{tag}", f"mean R/(rho d^2) = 1 +- {mean_tol:.3g}", abs(r_mean - 1) <= mean_tol, r_mean, mean_tol),
            Verdict(f"radial_std_{tag}", f"std R within {std_tol:.0%} of rho d", abs(r_std - 1) <= std_tol, r_std, std_tol),
            Verdict(f"spectral_fraction_{tag}", f"at least 95% of draws have ||Z|| <= {spectral_factor} rho d", frac >= 0.95, frac, 0.95),
            Verdict(f"spectral_median_{tag}", f"median ||Z||/(rho d) in [{median_range[0]}, {median_range[1]}]",
                    median_range[0] <= med <= median_range[1], med, list(median_range)),
            Verdict(f"weight_symmetry_{tag}", "every coordinate mean of w equals 1/d within 3 standard errors", worst <= 3.0, worst, 3.0),
        ]
    if len(dims) > 1:
        ok = all(b <= a for a, b in zip(trend, trend[1:]))
        report.verdicts.append(Verdict("weight_trend", f"mean d max w nonincreasing over d = {dims}", ok, trend, "nonincreasing"))
    report.wall_clock = time.perf_counter() - t0
    return report


def _corr(a, b):
    return float(np.corrcoef(a, b)[0, 1])


def run_sampler_validation(cfg, rng, *, samples=10_000, independence_samples=50_000, symmetry_dims=(2, 3, 4)):
    """Check the MCMC weight chain and the noise factorization against oracles.

    * d = 2: two-sample KS between chain draws of ``w_1`` and exact
      inverse-CDF draws (p-value >= 0.01), and ``E max w = 5/6 +- 0.01``.
    * d = 3: chain vs rejection sampler, ``E max w`` within 3 combined
      standard errors.
    * d = 3 noise draws: ``|corr(R, max w)|`` and ``|corr(R, U_ij)|`` below 0.02.
    * every coordinate mean of ``w`` equals ``1/d`` within 3 standard errors.
    """
    t0 = time.perf_counter()
    rng = as_stream(rng)
    cfg = cfg or ns.ChainConfig()
    report = ExperimentReport("validation", {"chain": cfg.to_dict(), "samples": samples,
                                             "independence_samples": independence_samples}, ["check", "value"], [])
    v = report.verdicts

    w2, _ = ns.sample_weights_mcmc(2, cfg, rng.child(0), samples)
    exact = ns.sample_weights_exact_d2(rng.child(1), samples)
    ks = stats.ks_2samp(w2[:, 0], exact[:, 0])
    v.append(Verdict("ks_d2_chain_vs_exact", "two-sample KS p-value >= 0.01", ks.pvalue >= 0.01, float(ks.pvalue), 0.01))
    m2 = float(w2.max(axis=1).mean())
    v.append(Verdict("mean_max_d2", "E max w = 5/6 +- 0.01", abs(m2 - 5 / 6) <= 0.01, m2, 5 / 6))

    w3, diag3 = ns.sample_weights_mcmc(3, cfg, rng.child(2), samples)
    r3 = ns.sample_weights_rejection(3, rng.child(3), samples)
    a, b = w3.max(axis=1), r3.max(axis=1)
    se = math.sqrt(a.var(ddof=1) / a.size + b.var(ddof=1) / b.size)
    gap = abs(a.mean() - b.mean())
    v.append(Verdict("mean_max_d3_chain_vs_rejection", "|E_chain max w - E_rej max w| <= 3 SE", gap <= 3 * se, gap, 3 * se))

    draws = ns.sample_noise(3, 1.0, cfg, rng.child(4), size=independence_samples)
    R = np.array([z.radius for z in draws])
    mx = np.array([z.weights.max() for z in draws])
    U = np.array([z.left for z in draws]).reshape(len(draws), -1)
    c_w = _corr(R, mx)
    c_u = max(abs(_corr(R, U[:, k])) for k in range(U.shape[1]))
    v.append(Verdict("independence_radius_weights", "|corr(R, max w)| < 0.02", abs(c_w) < 0.02, c_w, 0.02))
    v.append(Verdict("independence_radius_haar", "max |corr(R, U_ij)| < 0.02", c_u < 0.02, c_u, 0.02))

    for k, dim in enumerate(symmetry_dims):
        W = w2 if dim == 2 else w3 if dim == 3 else ns.sample_weights_mcmc(dim, cfg, rng.child(10 + k), samples)[0]
        se_c = W.std(axis=0, ddof=1) / math.sqrt(W.shape[0])
        z = float(np.max(np.abs(W.mean(axis=0) - 1.0 / dim) / se_c))
        v.append(Verdict(f"weight_symmetry_d{dim}", "every coordinate mean equals 1/d within 3 SE", z <= 3.0, z, 3.0))

    report.rows = [[x.name, _jsonable(x.observed)] for x in v]
    report.summary = {"d3_chain": diag3.to_dict(), "mean_max_d3_chain": float(a.mean()), "mean_max_d3_rejection": float(b.mean())}
    report.wall_clock = time.perf_counter() - t0
    return report


def random_ball_rows(n, d, rng):
    """``n`` points uniform in the unit ball."""
    g = rng.gaussian((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * rng.uniform(size=(n, 1)) ** (1.0 / d)


def run_dp_audit(d, n, epsilon, pairs, samples, rng, cfg=None, *, raise_on_violation=True):
    """Normalization-free privacy audit of ``perturb`` under row replacement.

    For each adjacent pair ``(X, X')`` and each sampled output
    ``y = Sigma + Z`` the unnormalized log-density ratio must not exceed
    ``||Sigma - Sigma'||_* / rho``, and that bound must not exceed ``eps``.
    The outputs ``y = Sigma`` (where the bound is attained) and an
    identical-dataset pair are checked as well.

    Raises:
      AuditFailure: if any check is violated and ``raise_on_violation``.
    """
    if pairs < 1 or samples < 1:
        raise ParameterError("pairs and samples must be positive")
    t0 = time.perf_counter()
    rng = as_stream(rng)
    params = mech.PrivacyParams(epsilon, n)
    X = random_ball_rows(n, d, rng.child(0))
    cov = mech.compute_covariance(X)
    columns = ["pair", "sample", "observed", "bound"]
    rows = []
    bad = []
    max_sens = 0.0
    tight_gap = 0.0
    for k in range(pairs):
        prng = rng.child(k + 1)
        Xp = X.copy()
        Xp[int(prng.integers(n))] = random_ball_rows(1, d, prng)[0]
        cov_p = mech.compute_covariance(Xp)
        max_sens = max(max_sens, float(np.sum(singular_values(cov.matrix - cov_p.matrix))))
        noise = ns.sample_noise(d, params.rho, cfg, prng, size=samples)
        for s, z in enumerate(noise):
            y = cov.matrix + z.matrix
            obs, bound = mech.dp_log_ratio_bound(cov, cov_p, y, params.rho)
            rows.append([k, s, obs, bound])
            if obs > bound + 1e-9 or bound > epsilon + 1e-9:
                bad.append({"sigma": cov.matrix.tolist(), "sigma_prime": cov_p.matrix.tolist(), "y": y.tolist(),
                            "observed": obs, "bound": bound})
        obs, bound = mech.dp_log_ratio_bound(cov, cov_p, cov.matrix, params.rho)
        tight_gap = max(tight_gap, abs(obs - bound) / max(1.0, bound))
    same, same_bound = mech.dp_log_ratio_bound(cov, cov, cov.matrix + noise[0].matrix, params.rho)
    report = ExperimentReport("audit", {"d": d, "n": n, "epsilon": epsilon, "pairs": pairs, "samples": samples}, columns, rows)
    report.verdicts = [
        Verdict("log_ratio_within_bound", "observed <= ||Sigma - Sigma'||_*/rho <= eps for every sampled output",
                not bad, len(bad), 0),
        Verdict("adjacent_sensitivity", "||Sigma - Sigma'||_* <= 2/n over all swaps", max_sens <= 2.0 / n + 1e-12, max_sens, 2.0 / n),
        Verdict("tight_at_y_equals_sigma", "y = Sigma attains the bound (rel 1e-9)", tight_gap <= 1e-9, tight_gap, 1e-9),
        Verdict("identical_datasets", "identical inputs give ratio 0 and bound 0", same == 0.0 and same_bound == 0.0, [same, same_bound], 0.0),
    ]
    report.summary = {"violations": len(bad), "max_observed": float(max(r[2] for r in rows)),
                      "max_bound": float(max(r[3] for r in rows)), "rho": params.rho}
    report.wall_clock = time.perf_counter() - t0
    if bad and raise_on_violation:
        err = AuditFailure(f"{len(bad)} log-density ratios exceeded their bound", bad)
        err.report = report
        raise err
    return report
