import numpy as np
import pytest
from hypothesis import given, strategies as st

from aniso_lp.grid import DomainError, Field, Lattice, StructureError, mode
from aniso_lp.sampling import generator, smooth_field
from aniso_lp.spaces import SpaceSpec, norm_value
from aniso_lp.trace import (boundary_data, closed_form_ratio, extend, extremal_field,
                            probe_lattice, reflect, reflection_coefficients, trace,
                            trace_loss_probe, whole_space_extension)


def test_trace_of_a_character():
    lat = Lattice.square(16)
    f = mode(lat, (3, -2))
    tr = trace(f, 2, axis=0)
    base = mode(lat.without_axis(0), (-2,)).samples
    assert np.allclose(tr.components[0].samples, base, atol=1e-12)
    assert np.allclose(tr.components[1].samples, 3j * base, atol=1e-12)
    assert np.allclose(tr.components[2].samples, -9 * base, atol=1e-11)
    assert tr.m == 2 and tr.boundary == lat.without_axis(0)


def test_trace_errors():
    with pytest.raises(StructureError):
        trace(Field.zeros(Lattice(1, 0, (8,))), 0, 0)
    with pytest.raises(StructureError):
        trace(Field.zeros(Lattice.square(8)), 0, 5)
    with pytest.raises(DomainError):
        trace(Field.zeros(Lattice.square(8)), 4, 0)


@given(st.integers(0, 2), st.integers(0, 2 ** 32), st.sampled_from([0, 1]))
def test_trace_inverts_extension(m, seed, axis):
    lat = Lattice(1, 1, (64, 32)) if axis == 0 else Lattice(1, 1, (32, 64))
    b = lat.without_axis(axis)
    rng = generator(seed)
    comps = [smooth_field(b, rng) for _ in range(m + 1)]
    e = extend(boundary_data(lat, axis, comps))
    back = trace(e, m, axis).components
    for g, h in zip(comps, back):
        assert (g - h).max_abs() <= 1e-8 * max(g.max_abs(), 1.0)


def test_reflection_coefficients():
    assert np.allclose(reflection_coefficients(1), [-3.0, 4.0])
    assert np.allclose(reflection_coefficients(2), [6.0, -32.0, 27.0])
    with pytest.raises(DomainError):
        reflection_coefficients(0)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_reflection_reproduces_polynomials(k):
    # Taylor matching to order k at the seam is exactness on polynomials of degree k
    rng = np.random.default_rng(0)
    coef = rng.standard_normal(k + 1)
    p = np.polynomial.Polynomial(coef)
    t = np.linspace(-2, 0, 9)
    assert np.allclose(reflect(p, k)(t), p(t), atol=1e-11)


def test_whole_space_extension_seam():
    lat = Lattice(1, 1, (256, 8))
    x = lat.coordinates()[0]
    f = Field(lat, np.broadcast_to(np.exp(np.sin(x)) * (x <= np.pi), lat.shape))
    e = whole_space_extension(f, 2)
    v = e.samples[:, 0]
    h = 2 * np.pi / 256
    # one-sided difference quotients across the seam at 0 agree
    left = (v[0] - v[-1]) / h
    right = (v[1] - v[0]) / h
    assert abs(left - right) < 0.05
    with pytest.raises(DomainError):
        whole_space_extension(f, 2, s1=2.0)


@pytest.mark.parametrize("direction", ["tangential", "mixed"])
def test_extremal_single_frequency_matches_closed_form(direction):
    lat, axis = probe_lattice(direction, 16, 32)
    b = lat.without_axis(axis)
    a = np.zeros(b.shape, dtype=complex)
    a[3, 2] = 1.0
    src = SpaceSpec("Haniso", 1.0, 1.0)
    f = extremal_field(lat, axis, src, a)
    g = trace(f, 0, axis).components[0]
    tgt = SpaceSpec("Haniso", 0.5, 1.0) if direction == "tangential" else SpaceSpec("Haniso", 1.0, 0.5)
    ratio = norm_value(g, tgt) / norm_value(f, src)
    assert ratio == pytest.approx(closed_form_ratio(direction, 1.0, 1.0, (3, 2), normal=32), rel=1e-10)


def test_probe_guards():
    with pytest.raises(DomainError):
        trace_loss_probe("diagonal", 1.0, 1.0)
    with pytest.raises(DomainError):
        trace_loss_probe("tangential", 0.4, 1.0)
    with pytest.raises(DomainError):
        trace_loss_probe("mixed", 1.0, 0.5)
