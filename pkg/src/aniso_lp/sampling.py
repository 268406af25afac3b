"""Seeded generators and random test fields.

Every random stream is a PCG64 generator keyed by a 64-bit seed and an
optional tuple of non-negative integers (``numpy.random.SeedSequence`` with
``spawn_key``), so sub-experiments draw from independent, reproducible
streams. Reference outputs for seed 7 are pinned in the test suite.
"""

from __future__ import annotations

import numpy as np

from .grid import DomainError, Field, Lattice
from .lp import phi_table

MAX_SEED = 2 ** 64 - 1


def generator(seed: int, *stream: int) -> np.random.Generator:
    if not 0 <= int(seed) <= MAX_SEED:
        raise DomainError("seed must be an unsigned 64-bit integer")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.PCG64(ss))


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _from_coefficients(lattice: Lattice, c: np.ndarray) -> Field:
    return Field(lattice, np.fft.fftn(c))


def white_field(lattice: Lattice, rng: np.random.Generator) -> Field:
    """Complex Gaussian coefficients of unit variance at every frequency."""
    return _from_coefficients(lattice, _complex_normal(rng, lattice.shape))


def smooth_field(lattice: Lattice, rng: np.random.Generator, decay: float | None = None) -> Field:
    """``|c(xi)| = <xi>^-decay`` with uniform phases; ``decay`` defaults to n/2 + 2."""
    if decay is None:
        decay = lattice.ndim / 2.0 + 2.0
    phase = rng.uniform(0.0, 2.0 * np.pi, lattice.shape)
    return _from_coefficients(lattice, lattice.bracket() ** (-decay) * np.exp(1j * phase))


def power_field(lattice: Lattice, rng: np.random.Generator, exponent: float) -> Field:
    """Gaussian coefficients shaped by ``<xi>^exponent``."""
    return _from_coefficients(lattice, lattice.bracket() ** exponent * _complex_normal(rng, lattice.shape))


def shell_field(lattice: Lattice, rng: np.random.Generator, j: int, scope="full") -> Field:
    """White noise filtered by the dyadic window ``phi_j`` of ``scope``."""
    table = phi_table(lattice, scope)
    if not 0 <= j < len(table):
        raise DomainError(f"shell {j} outside 0..{len(table) - 1}")
    w = table[j]
    if not np.any(w > 0):
        raise DomainError(f"shell {j} is empty on this lattice")
    return _from_coefficients(lattice, w * _complex_normal(rng, lattice.shape))


def mixed_fields(lattice: Lattice, seed: int, count: int, stream: int = 0) -> list[Field]:
    """A deterministic batch cycling through white, smooth and rough fields.

    Field ``t`` is drawn with spectral exponent in ``{0, -(n/2+2), -1, 1, -2}``
    so batches probe both low- and high-frequency dominated content.
    """
    n = lattice.ndim
    exps = (0.0, -(n / 2.0 + 2.0), -1.0, 1.0, -2.0)
    out = []
    for t in range(count):
        rng = generator(seed, stream, t)
        out.append(power_field(lattice, rng, exps[t % len(exps)]))
    return out
