"""Command-line front end.

Exit codes: 0 success, 2 usage or parse error, 3 dataset validation error,
4 a verdict failed, 1 sampler or other runtime failure.

Fixed seeds are accepted only together with ``--test-mode``; without a seed
every command draws from OS entropy. In test mode reports omit wall-clock
time so that reruns are byte-identical.
"""

import json
import sys

import click
import numpy as np

from . import harness
from . import io as pio
from . import mechanisms as mech
from .errors import AuditFailure, InputError, ParameterError, PrivcovError, SamplerError, ValidationError
from .nucsampler import ChainConfig, sample_noise
from .randsrc import RandomStream
from .spectra import nuclear_norm, singular_values

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, EXIT_VALIDATION, EXIT_VERDICT = 0, 1, 2, 3, 4


class CliExit(Exception):
    def __init__(self, code, message=None):
        super().__init__(message)
        self.code = code
        self.message = message


def chain_config(config_path=None, steps=None, burn_in=None, method=None):
    """ChainConfig from an optional JSON file, overridden by explicit flags."""
    data = {}
    if config_path is not None:
        try:
            with open(config_path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise CliExit(EXIT_USAGE, f"cannot read chain config {config_path}: {exc}")
        if not isinstance(data, dict):
            raise CliExit(EXIT_USAGE, "chain config must be a JSON object")
        data = data.get("chain", data)
    if steps is not None:
        data["steps"] = steps
    if burn_in is not None:
        data["burn_in"] = burn_in
    if method is not None:
        data["method"] = method
    return ChainConfig.from_dict(data)


def _stream(ctx):
    seed = ctx.obj["seed"]
    return RandomStream(seed)


def _emit(text, path):
    pio.write_text(text, path, sys.stdout)


def _report_out(ctx, report, fmt, output):
    text = report.to_csv() if fmt == "csv" else report.to_json(include_timing=not ctx.obj["test_mode"])
    _emit(text, output)
    for line in report.lines():
        click.echo(line, err=True)
    return EXIT_OK if report.passed else EXIT_VERDICT


def _common(f):
    f = click.option("--output", "-o", type=click.Path(dir_okay=False), default=None,
                     help="Output file (default: stdout).")(f)
    f = click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None,
                     help="JSON file with chain keys steps, burn_in, step_size, method.")(f)
    f = click.option("--chain-method", type=click.Choice(["hit-and-run", "preconditioned-Langevin"]), default=None)(f)
    f = click.option("--chain-burn-in", type=int, default=None, help="Weight-chain burn-in steps.")(f)
    f = click.option("--chain-steps", type=int, default=None, help="Weight-chain steps per draw.")(f)
    return f


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--seed", type=click.IntRange(min=0), default=None, help="Fixed seed; requires --test-mode.")
@click.option("--test-mode", is_flag=True, help="Allow fixed seeds and omit timings from reports.")
@click.pass_context
def main(ctx, seed, test_mode):
    """Differentially private covariance release with nuclear-norm noise."""
    if seed is not None and not test_mode:
        raise click.UsageError("--seed is only accepted together with --test-mode")
    ctx.ensure_object(dict)
    ctx.obj.update(seed=seed, test_mode=test_mode)


def _run(fn):
    """Map library exceptions to exit codes."""
    try:
        return fn()
    except CliExit as exc:
        if exc.message:
            click.echo(f"error: {exc.message}", err=True)
        return exc.code
    except ValidationError as exc:
        click.echo(f"validation error: {exc}", err=True)
        return EXIT_VALIDATION
    except (InputError, ParameterError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    except AuditFailure as exc:
        click.echo(f"audit failure: {exc}", err=True)
        click.echo(json.dumps(exc.triples[:1]), err=True)
        return EXIT_VERDICT
    except (SamplerError, PrivcovError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_RUNTIME


def estimate_output(X, epsilon, mechanism, cfg, rng, clip_rows=False, psd=False):
    """Library path behind ``estimate``: dataset rows to a MechanismOutput."""
    cov = mech.compute_covariance(X, clip_rows=clip_rows)
    out = mech.release(cov, mech.PrivacyParams(epsilon, cov.n), mechanism, cfg, rng)
    if psd:
        out.estimate = mech.symmetrize_psd(out.estimate)
    return out


@main.command()
@click.option("--input", "-i", "input_path", type=click.Path(dir_okay=False), required=True, help="Dataset CSV.")
@click.option("--epsilon", type=float, required=True)
@click.option("--mechanism", type=click.Choice(mech.MECHANISMS), default="perturb", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="json", show_default=True)
@click.option("--clip-rows", is_flag=True, help="Rescale rows of norm > 1 to norm 1 instead of failing.")
@click.option("--psd", is_flag=True, help="Post-process the release to the nearest symmetric PSD matrix.")
@_common
@click.pass_context
def estimate(ctx, input_path, epsilon, mechanism, fmt, clip_rows, psd, output, config_path,
             chain_method, chain_burn_in, chain_steps):
    """Release a private covariance estimate of a dataset."""
    def go():
        try:
            X = pio.read_dataset_csv(input_path)
        except OSError as exc:
            raise CliExit(EXIT_USAGE, f"cannot read {input_path}: {exc}")
        cfg = chain_config(config_path, chain_steps, chain_burn_in, chain_method)
        out = estimate_output(X, epsilon, mechanism, cfg, _stream(ctx), clip_rows, psd)
        text = pio.format_matrix_csv(out.estimate) if fmt == "csv" else pio.format_json(out.to_dict())
        _emit(text, output)
        return EXIT_OK
    ctx.exit(_run(go))


def noise_payload(d, rho, k, cfg, rng):
    """Library path behind ``sample-noise``."""
    draws = sample_noise(d, rho, cfg, rng, size=k)
    samples = []
    for z in draws:
        samples.append({
            "radius": z.radius,
            "nuclear_norm": nuclear_norm(z.matrix),
            "spectral_norm": float(singular_values(z.matrix)[0]),
            "weights": z.weights.tolist(),
            "matrix": z.matrix.tolist(),
        })
    return {"dim": d, "rho": rho, "samples": samples}


@main.command("sample-noise")
@click.option("--dim", "-d", type=int, required=True, help="Matrix dimension d.")
@click.option("--rho", type=float, default=None, help="Noise scale; alternatively give --epsilon and --n.")
@click.option("--epsilon", type=float, default=None)
@click.option("--n", type=int, default=None)
@click.option("--samples", "-k", type=int, default=1, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="json", show_default=True)
@_common
@click.pass_context
def sample_noise_cmd(ctx, dim, rho, epsilon, n, samples, fmt, output, config_path,
                     chain_method, chain_burn_in, chain_steps):
    """Draw noise matrices with density proportional to exp(-||Z||_* / rho)."""
    def go():
        nonlocal rho
        if rho is None:
            if epsilon is None or n is None:
                raise CliExit(EXIT_USAGE, "give --rho, or both --epsilon and --n")
            rho = mech.PrivacyParams(epsilon, n).rho
        if samples < 1:
            raise CliExit(EXIT_USAGE, "--samples must be positive")
        cfg = chain_config(config_path, chain_steps, chain_burn_in, chain_method)
        payload = noise_payload(dim, rho, samples, cfg, _stream(ctx))
        if fmt == "json":
            text = pio.format_json(payload)
        else:
            header = ["radius", "nuclear_norm", "spectral_norm"] + [f"z_{i}_{j}" for i in range(dim) for j in range(dim)]
            lines = [",".join(header)]
            for s in payload["samples"]:
                vals = [s["radius"], s["nuclear_norm"], s["spectral_norm"]] + list(np.ravel(s["matrix"]))
                lines.append(",".join(repr(float(v)) for v in vals))
            text = "\n".join(lines) + "\n"
        _emit(text, output)
        return EXIT_OK
    ctx.exit(_run(go))


@main.command()
@click.option("--dim", "-d", type=int, default=50, show_default=True)
@click.option("--n", type=int, default=1_000_000, show_default=True)
@click.option("--epsilon", type=float, default=1.0, show_default=True)
@click.option("--trials", type=int, default=500, show_default=True)
@click.option("--mechanism", type=click.Choice(mech.MECHANISMS), default="perturb", show_default=True)
@click.option("--profile", type=click.Choice(harness.PROFILES), default="isotropic", show_default=True)
@click.option("--tau", type=float, default=1.0, show_default=True, help="Trace of the synthetic covariance.")
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@_common
@click.pass_context
def bench(ctx, dim, n, epsilon, trials, mechanism, profile, tau, workers, fmt, output, config_path,
          chain_method, chain_burn_in, chain_steps):
    """Monte Carlo error experiment against the Schatten-norm bounds."""
    def go():
        cfg = harness.ExperimentConfig(
            d=dim, n=n, epsilon=epsilon, trials=trials, mechanism=mechanism, data_profile=profile, tau=tau,
            seed=ctx.obj["seed"], chain=chain_config(config_path, chain_steps, chain_burn_in, chain_method),
            workers=workers)
        return _report_out(ctx, harness.run_error_experiment(cfg), fmt, output)
    ctx.exit(_run(go))


@main.command()
@click.option("--samples", type=int, default=10_000, show_default=True)
@click.option("--independence-samples", type=int, default=50_000, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="json", show_default=True)
@_common
@click.pass_context
def validate(ctx, samples, independence_samples, fmt, output, config_path, chain_method, chain_burn_in, chain_steps):
    """Check the weight sampler against exact and rejection oracles."""
    def go():
        cfg = chain_config(config_path, chain_steps, chain_burn_in, chain_method)
        report = harness.run_sampler_validation(cfg, _stream(ctx), samples=samples,
                                                independence_samples=independence_samples)
        return _report_out(ctx, report, fmt, output)
    ctx.exit(_run(go))


@main.command()
@click.option("--dim", "-d", type=int, default=10, show_default=True)
@click.option("--n", type=int, default=100, show_default=True)
@click.option("--epsilon", type=float, default=1.0, show_default=True)
@click.option("--pairs", type=int, default=100, show_default=True)
@click.option("--samples", type=int, default=100, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="json", show_default=True)
@_common
@click.pass_context
def audit(ctx, dim, n, epsilon, pairs, samples, fmt, output, config_path, chain_method, chain_burn_in, chain_steps):
    """Normalization-free privacy audit over adjacent dataset pairs."""
    def go():
        cfg = chain_config(config_path, chain_steps, chain_burn_in, chain_method)
        try:
            report = harness.run_dp_audit(dim, n, epsilon, pairs, samples, _stream(ctx), cfg)
        except AuditFailure as exc:
            _report_out(ctx, exc.report, fmt, output)
            raise
        return _report_out(ctx, report, fmt, output)
    ctx.exit(_run(go))


@main.command()
@click.option("--dim", "-d", type=int, multiple=True, required=True, help="Dimension; repeat for a trend check.")
@click.option("--rho", type=float, default=1.0, show_default=True)
@click.option("--trials", type=int, default=200, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="json", show_default=True)
@_common
@click.pass_context
def concentration(ctx, dim, rho, trials, fmt, output, config_path, chain_method, chain_burn_in, chain_steps):
    """Radial, weight and spectral-norm statistics of the noise law."""
    def go():
        cfg = chain_config(config_path, chain_steps, chain_burn_in, chain_method)
        report = harness.run_concentration_experiment(list(dim), rho, trials, cfg, _stream(ctx))
        return _report_out(ctx, report, fmt, output)
    ctx.exit(_run(go))


if __name__ == "__main__":
    main()
