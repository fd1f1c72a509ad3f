"""Seeded random streams and the scalar samplers built on them.

A :class:`RandomStream` is identified by ``(seed, stream_id)``. Streams are
derived with :class:`numpy.random.SeedSequence` spawn keys, so distinct stream
ids give independent PCG64 generators and the same pair always reproduces the
same draws.

Fixed seeds exist for testing and benchmarking. A release that must satisfy
differential privacy has to use OS entropy (``seed=None``). Floating-point
side channels of the Laplace and Gamma samplers are not addressed.
"""

import threading

import numpy as np

from .errors import ParameterError


class RandomStream:
    """Single-owner random source.

    Args:
      seed: nonnegative integer, or None to draw entropy from the OS.
      stream_id: index selecting an independent substream of ``seed``.
    """

    def __init__(self, seed=None, stream_id=0):
        if seed is not None and (int(seed) != seed or seed < 0):
            raise ParameterError(f"seed must be a nonnegative integer, got {seed!r}")
        if int(stream_id) != stream_id or stream_id < 0:
            raise ParameterError(f"stream_id must be a nonnegative integer, got {stream_id!r}")
        self.seed = None if seed is None else int(seed)
        self.stream_id = int(stream_id)
        if self.seed is None:
            self._seq = np.random.SeedSequence()
        else:
            self._seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(self._seq))
        self._lock = threading.Lock()
        self._children = 0

    def __repr__(self):
        seed = "entropy" if self.seed is None else self.seed
        return f"RandomStream(seed={seed}, stream_id={self.stream_id})"

    @property
    def seeded(self):
        return self.seed is not None

    def child(self, index):
        """Deterministic child stream number ``index`` (thread-safe, stateless)."""
        seq = np.random.SeedSequence(self._seq.entropy, spawn_key=self._seq.spawn_key + (int(index),))
        out = RandomStream.__new__(RandomStream)
        out.seed = self.seed
        out.stream_id = self.stream_id
        out._seq = seq
        out.generator = np.random.Generator(np.random.PCG64(seq))
        out._lock = threading.Lock()
        out._children = 0
        return out

    def spawn(self, n):
        """``n`` fresh child streams, continuing after previously spawned ones."""
        with self._lock:
            start = self._children
            self._children += n
        return [self.child(1_000_000 + start + k) for k in range(n)]

    def laplace(self, scale, size=None):
        return laplace(scale, self, size)

    def gamma(self, shape, scale, size=None):
        return gamma(shape, scale, self, size)

    def gaussian(self, size=None):
        return gaussian(self, size)

    def exponential(self, size=None):
        return exponential(self, size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self.generator.uniform(low, high, size)

    def integers(self, low, high=None, size=None):
        return self.generator.integers(low, high, size)

    def permutation(self, x):
        return self.generator.permutation(x)

    def kernel_seed(self):
        """A 32-bit seed for compiled kernels that keep their own generator."""
        return int(self.generator.integers(0, 2**32 - 1))


def _positive(name, value):
    value = float(value)
    if not (value > 0) or not np.isfinite(value):
        raise ParameterError(f"{name} must be a finite positive number, got {value}")
    return value


def laplace(scale, rng, size=None):
    """Draw from the density ``exp(-|x| / scale) / (2 scale)``."""
    return rng.generator.laplace(0.0, _positive("scale", scale), size)


def gamma(shape, scale, rng, size=None):
    """Draw from the density proportional to ``x**(shape-1) exp(-x/scale)``.

    numpy uses Marsaglia-Tsang squeeze rejection, which stays stable for
    shapes in the millions.
    """
    return rng.generator.gamma(_positive("shape", shape), _positive("scale", scale), size)


def gaussian(rng, size=None):
    return rng.generator.standard_normal(size)


def exponential(rng, size=None):
    return rng.generator.standard_exponential(size)


def as_stream(rng):
    """Accept a RandomStream, an int seed, or None."""
    if isinstance(rng, RandomStream):
        return rng
    return RandomStream(rng)
