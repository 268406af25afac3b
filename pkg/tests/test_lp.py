import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from aniso_lp.grid import DomainError, Lattice
from aniso_lp.lp import (jmax_for, make_profile, partition, partition_defect, phi, phi_table,
                         product_blocks, product_support_leakage, radial_blocks)
from aniso_lp.sampling import generator, shell_field, white_field


def profile_oracle(t):
    # direct formula, scalar path
    def chi(u):
        return math.exp(-1.0 / u) if u > 0 else 0.0
    a, b = chi(2.0 - t), chi(t - 1.0)
    return a / (a + b)


@pytest.mark.parametrize("t", [0.0, 0.5, 1.0, 1.1, 1.25, 1.5, 1.9, 2.0, 3.0])
def test_profile_matches_formula(t):
    assert make_profile()(t) == pytest.approx(profile_oracle(t), abs=1e-15)


def test_profile_pinned_values():
    g = make_profile()
    assert g(1.5) == 0.5
    # 1 / (1 + e^{-8/3}) at t = 5/4
    assert g(1.25) == pytest.approx(1.0 / (1.0 + math.exp(-8.0 / 3.0)), rel=1e-15)


@given(st.floats(0, 100))
def test_profile_range_and_monotone(t):
    g = make_profile()
    assert 0.0 <= g(t) <= 1.0
    assert g(t + 0.01) <= g(t) + 1e-15


def test_jmax():
    assert jmax_for(0.0) == 0
    assert jmax_for(1.0) == 1
    assert jmax_for(8.0) == 4
    assert jmax_for(8.5) == 5


@pytest.mark.parametrize("size", [16, 32, 64])
@pytest.mark.parametrize("scope", ["full", "factor1", "factor2"])
def test_partition_of_unity(size, scope):
    assert partition_defect(Lattice.square(size), scope) <= 1e-12


@given(st.integers(0, 8), st.floats(0, 600))
def test_phi_support(j, r):
    part = partition(Lattice.square(64))
    lo, hi = part.support(j)
    v = part.phi(j, r)
    if r < lo or r > hi:
        assert v == 0.0
    assert -1e-15 <= v <= 1.0 + 1e-15


def test_phi_point_evaluation():
    lat = Lattice.square(32)
    part = partition(lat, "factor2")
    assert phi(part, 0, (5.0, 0.5), lat) == pytest.approx(1.0)
    assert phi(part, 2, (0.0, 3.0), lat) == pytest.approx(partition(lat).phi(2, 3.0))
    with pytest.raises(DomainError):
        part.phi(-1, 1.0)


def test_block_energies_sum():
    lat = Lattice.square(32)
    f = white_field(lat, generator(7))
    blocks = radial_blocks(f)
    # sum of phi_j^2 < 1 in overlaps, so energies sum to at most the total
    tot = sum(b.energy() for b in blocks)
    assert tot <= f.l2() ** 2 * (1 + 1e-12)
    assert max(b.leakage() for b in blocks) < 1e-20
    rows = product_blocks(f)
    assert len(rows) == len(phi_table(lat, "factor1"))


def test_shell_products_stay_in_corridor():
    lat = Lattice(1, 1, (256, 8))
    for i, i2 in [(5, 2), (4, 1), (5, 0)]:
        f = shell_field(lat, generator(1, i), i, "factor1")
        g = shell_field(lat, generator(2, i2), i2, "factor1")
        assert product_support_leakage(f, g, max(i, i2), min(i, i2)) < 1e-20
