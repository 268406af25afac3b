import numpy as np
import pytest
from hypothesis import given, strategies as st

from aniso_lp.grid import (DomainError, Field, Lattice, StructureError, apply_multiplier,
                           bessel_potential, dft, dft_reference, fld_bytes, idft, mode,
                           parse_fld, read_fld, write_fld)
from aniso_lp.sampling import generator, white_field

sizes = st.sampled_from([4, 6, 8, 12, 16])


@st.composite
def lattices(draw, max_axes=3):
    n1 = draw(st.integers(0, 2))
    n2 = draw(st.integers(0 if n1 else 1, max_axes - n1))
    return Lattice(n1, n2, tuple(draw(sizes) for _ in range(n1 + n2)))


def test_lattice_validation():
    with pytest.raises(StructureError):
        Lattice(1, 1, (8, 7))
    with pytest.raises(StructureError):
        Lattice(1, 1, (2, 8))
    with pytest.raises(StructureError):
        Lattice(1, 1, (8,))
    with pytest.raises(StructureError):
        Lattice(0, 0, ())


def test_frequency_range():
    lat = Lattice(1, 0, (8,))
    assert sorted(lat.frequencies()[0].ravel().tolist()) == list(range(-4, 4))


def test_delta_transform():
    lat = Lattice.square(8)
    s = np.zeros(lat.shape)
    s[0, 0] = 1.0
    c = dft(Field(lat, s)).coefficients
    assert np.allclose(c, 1.0 / lat.total, atol=1e-15)


def test_character_lands_on_negated_frequency():
    # forward sign e^{+i xi.x}: the character e^{i k.x} sits at xi = -k
    lat = Lattice.square(8)
    c = dft(mode(lat, (2, -3)))
    assert abs(c.at((-2, 3)) - 1.0) < 1e-12
    assert c.energy() == pytest.approx(1.0, abs=1e-12)
    # and e^{-i k.x} sits at xi = +k
    assert abs(dft(mode(lat, (-2, 3))).at((2, -3)) - 1.0) < 1e-12


def test_dft_matches_direct_summation():
    lat = Lattice.square(8)
    f = white_field(lat, generator(7, 0))
    a = dft(f).coefficients
    b = dft_reference(f).coefficients
    assert np.max(np.abs(a - b)) < 1e-12
    lhs = np.mean(np.abs(f.samples) ** 2)
    assert abs(lhs - np.sum(np.abs(b) ** 2)) / lhs < 1e-12


@given(lattices(), st.integers(0, 2 ** 32))
def test_roundtrip_and_parseval(lat, seed):
    f = white_field(lat, generator(seed))
    g = idft(dft(f))
    assert np.max(np.abs(g.samples - f.samples)) <= 1e-12 * f.max_abs()
    assert dft(f).energy() == pytest.approx(f.l2() ** 2, rel=1e-12)


@given(lattices(), st.floats(-3, 3), st.floats(-3, 3))
def test_bessel_group_law(lat, s, t):
    f = white_field(lat, generator(1))
    a = bessel_potential(bessel_potential(f, s), t)
    b = bessel_potential(f, s + t)
    assert np.max(np.abs(a.samples - b.samples)) <= 1e-9 * max(a.max_abs(), 1.0)


def test_multiplier_errors():
    lat = Lattice.square(8)
    f = Field.zeros(lat)
    with pytest.raises(DomainError):
        apply_multiplier(f, np.full(lat.shape, np.inf))
    with pytest.raises(StructureError):
        apply_multiplier(f, np.ones((3, 3)))
    with pytest.raises(StructureError):
        Field(lat, np.zeros(10))
    with pytest.raises(StructureError):
        f + Field.zeros(Lattice.square(16))


def test_field_is_immutable():
    f = Field.zeros(Lattice.square(4))
    with pytest.raises(ValueError):
        f.samples[0, 0] = 1.0


def test_fld_roundtrip(tmp_path):
    lat = Lattice(1, 2, (8, 4, 6))
    f = white_field(lat, generator(3))
    write_fld(tmp_path / "a.fld", f)
    g = read_fld(tmp_path / "a.fld")
    assert g.lattice == lat
    assert np.array_equal(g.samples, f.samples)
    assert fld_bytes(g) == fld_bytes(f)


@pytest.mark.parametrize("blob", [b"nonsense", b"XYZ v1 n1=1\n", b"FLD v1 n1=1 n2=1 sizes=4,4\n\x00"])
def test_fld_malformed(blob):
    with pytest.raises(StructureError):
        parse_fld(blob)
