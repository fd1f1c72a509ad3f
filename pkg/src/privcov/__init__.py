"""Pure differentially private covariance release with nuclear-norm noise."""

from .errors import (
    AuditFailure,
    DomainError,
    InputError,
    ParameterError,
    PrivcovError,
    SamplerError,
    ValidationError,
)
from .mechanisms import (
    CovarianceMatrix,
    MechanismOutput,
    PrivacyParams,
    compute_covariance,
    dp_log_ratio_bound,
    perturb_mechanism,
    private_radius,
    project_mechanism,
    release,
    symmetrize_psd,
)
from .nucsampler import ChainConfig, SpectralNoise, sample_noise
from .randsrc import RandomStream

__all__ = [
    "AuditFailure", "ChainConfig", "CovarianceMatrix", "DomainError", "InputError", "MechanismOutput",
    "ParameterError", "PrivacyParams", "PrivcovError", "RandomStream", "SamplerError", "SpectralNoise",
    "ValidationError", "compute_covariance", "dp_log_ratio_bound", "perturb_mechanism", "private_radius",
    "project_mechanism", "release", "sample_noise", "symmetrize_psd",
]
