"""Exception hierarchy shared by all privcov modules."""


class PrivcovError(Exception):
    """Base class for errors raised by privcov."""


class InputError(PrivcovError, ValueError):
    """Malformed input data: non-finite entries, wrong shape, negative values."""


class ParameterError(PrivcovError, ValueError):
    """A numeric parameter is outside its admissible range."""


class DomainError(PrivcovError, ValueError):
    """A point lies outside the domain of a density."""


class ValidationError(PrivcovError, ValueError):
    """A dataset violates the unit-ball assumption."""


class SamplerError(PrivcovError, RuntimeError):
    """A sampler could not produce a valid draw."""


class AuditFailure(PrivcovError, AssertionError):
    """A privacy audit found a log-density ratio above its bound.

    ``triples`` holds the serialized offending (sigma, sigma_prime, y) cases.
    """

    def __init__(self, message, triples=()):
        super().__init__(message)
        self.triples = list(triples)
