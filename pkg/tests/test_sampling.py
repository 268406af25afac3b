import numpy as np
import pytest
from hypothesis import given, strategies as st

from aniso_lp.grid import DomainError, Lattice
from aniso_lp.sampling import (MAX_SEED, generator, mixed_fields, shell_field, smooth_field)


def test_pinned_vectors_seed_7():
    # PCG64 keyed by SeedSequence(7); these values pin the stream definition
    assert generator(7).random(3).tolist() == [0.625095466604667, 0.8972138009695755,
                                               0.7756856902451935]
    assert generator(7, 1, 2).integers(0, 2 ** 32, 3).tolist() == [2567386825, 2056838993,
                                                                   1432915386]
    assert generator(7).standard_normal(2).tolist() == [0.0012301533574825742,
                                                     0.2987455375084699]


@given(st.integers(0, MAX_SEED), st.lists(st.integers(0, 1000), max_size=3))
def test_streams_deterministic(seed, stream):
    a = generator(seed, *stream).random(4)
    b = generator(seed, *stream).random(4)
    assert np.array_equal(a, b)


def test_streams_independent():
    assert not np.array_equal(generator(7, 0).random(4), generator(7, 1).random(4))


def test_seed_range():
    with pytest.raises(DomainError):
        generator(-1)
    with pytest.raises(DomainError):
        generator(MAX_SEED + 1)


def test_smooth_field_spectrum():
    lat = Lattice.square(16)
    f = smooth_field(lat, generator(7), decay=3.0)
    c = np.abs(np.fft.ifftn(f.samples))
    assert np.allclose(c, lat.bracket() ** -3.0, rtol=1e-10)


def test_shell_field_support():
    lat = Lattice.square(32)
    f = shell_field(lat, generator(7), 3)
    c = np.abs(np.fft.ifftn(f.samples))
    r = lat.freq_norm()
    assert np.all(c[(r < 4) | (r > 16)] < 1e-13)
    with pytest.raises(DomainError):
        shell_field(lat, generator(7), 50)


def test_mixed_fields_reproducible():
    lat = Lattice.square(8)
    a = mixed_fields(lat, 7, 5)
    b = mixed_fields(lat, 7, 5)
    assert all(np.array_equal(x.samples, y.samples) for x, y in zip(a, b))
