import numpy as np
import pytest
from hypothesis import given, strategies as st

from aniso_lp.grid import DomainError, Field, Lattice, StructureError, mode
from aniso_lp.sampling import generator, mixed_fields, smooth_field, white_field
from aniso_lp.spaces import (SpaceSpec, UnsupportedConfiguration, backend_ratios,
                             equiv_norm_probe, interp_inequality_check, lift_probe, mixed_norm,
                             norm, norm_value, prodLP_equivalence_probe)

LAT = Lattice.square(16)


def test_spec_parse_and_validation():
    s = SpaceSpec.parse("Haniso:1:1/2:4/3")
    assert (s.family, s.s1, s.s2) == ("Haniso", 1.0, 0.5)
    assert s.p == pytest.approx(4 / 3)
    assert SpaceSpec.parse("B:2").q == 2.0 and SpaceSpec("B", 1.0, 0.0, 3.0).q == 3.0
    with pytest.raises(DomainError):
        SpaceSpec("H", 1.0, 1.0)
    with pytest.raises(DomainError):
        SpaceSpec("H", 1.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        SpaceSpec("Sobolev", 1.0)
    assert SpaceSpec("H", 1.0).shifted(0.5, 1.0).family == "Haniso"


def test_multiplier_norm_of_a_mode():
    # <k>^{s1} <k2>^{s2} for the character e^{i k.x}
    f = mode(LAT, (3, 4))
    v = norm_value(f, SpaceSpec("Haniso", 1.0, 2.0))
    assert v == pytest.approx(np.sqrt(26.0) * 17.0, rel=1e-12)
    v = norm_value(f, SpaceSpec("Fprod", 1.0, 2.0))
    assert v == pytest.approx(np.sqrt(10.0) * 17.0, rel=1e-12)


def test_backend_rules():
    f = white_field(LAT, generator(7))
    with pytest.raises(UnsupportedConfiguration):
        norm(f, SpaceSpec("H", 0.0, 0.0, 3.0), "multiplier")
    with pytest.raises(DomainError):
        norm(f, SpaceSpec("H", 0.0), "fourier")
    with pytest.raises(StructureError):
        norm(Field.zeros(Lattice(0, 2, (8, 8))), SpaceSpec("Fprod", 0.0))
    r = norm(f, SpaceSpec("H", 1.0), "lp")
    assert r.blocks_used > 0 and norm(f, SpaceSpec("H", 1.0)).blocks_used == 0


def test_aniso_lp_is_lift_then_isotropic():
    from aniso_lp.grid import bessel_potential
    f = smooth_field(LAT, generator(2))
    a = norm_value(f, SpaceSpec("Haniso", 1.0, 0.7, 3.0), "lp")
    b = norm_value(bessel_potential(f, 0.7, "factor2"), SpaceSpec("H", 1.0, 0.0, 3.0), "lp")
    assert a == pytest.approx(b, rel=1e-13)


def test_l2_norm_identities():
    f = white_field(LAT, generator(7))
    assert norm_value(f, SpaceSpec("H", 0.0)) == pytest.approx(f.l2(), rel=1e-12)
    assert mixed_norm(f, 1, "Lp", "Lp") == pytest.approx(f.l2(), rel=1e-12)


@pytest.mark.parametrize("s", [-2, -1, 0, 1, 2])
def test_backend_crossval_constant(s):
    fields = mixed_fields(Lattice.square(32), 7, 16)
    r = backend_ratios(fields, SpaceSpec("H", float(s)))
    assert max(r.max(), 1 / r.min()) <= 8.0


def test_prod_lp_p2_is_exact_after_overlap_correction():
    r = prodLP_equivalence_probe(2.0, 8, 7, 16)
    assert r["max_corrected_defect"] <= 1e-10


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
def test_lift_is_isometric_for_multiplier_norms(s1, s2, a, b):
    f = white_field(LAT, generator(11))
    assert lift_probe(f, s1, s2, a, b, backend="multiplier") == pytest.approx(1.0, abs=1e-10)


def test_equivalent_norms_bounded():
    for f in mixed_fields(LAT, 7, 10):
        r = equiv_norm_probe(f, 1.0, 1.0)
        assert 0.5 <= r["r1"] <= 2.5 and 0.5 <= r["r2"] <= 2.5
    with pytest.raises(DomainError):
        equiv_norm_probe(f, 1.0, -1.0)


@given(st.integers(0, 2 ** 32), st.floats(0.05, 0.95))
def test_interpolation_log_convexity(seed, theta):
    f = white_field(LAT, generator(seed))
    a, b = SpaceSpec("Haniso", -1.0, 0.0), SpaceSpec("Haniso", 2.0, 1.0)
    d = interp_inequality_check(f, a, b, theta)
    assert d <= 1e-12 * norm_value(f, a) ** (1 - theta) * norm_value(f, b) ** theta


def test_interpolation_equality_on_one_mode():
    # a single character has norms w^s, so log-convexity holds with equality
    f = mode(LAT, (2, 5))
    a, b = SpaceSpec("Haniso", 0.0, 0.0), SpaceSpec("Haniso", 2.0, 1.0)
    assert abs(interp_inequality_check(f, a, b, 0.5)) < 1e-10
    with pytest.raises(DomainError):
        interp_inequality_check(f, b, a, 0.5)
