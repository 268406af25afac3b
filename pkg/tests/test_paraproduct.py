import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from aniso_lp.grid import DomainError, Lattice, StructureError
from aniso_lp.paraproduct import (CASES, FreqRelation, MultParams, case_1a_regrouped,
                                  case_1d_regrouped, case_label, case_partition, classify,
                                  dominance_ratios, literal_cases, mult_bound_probe,
                                  predicted_exponents, product_bump, sharpness_scan)
from aniso_lp.sampling import generator, smooth_field

LAT = Lattice.square(32)
idx = st.integers(0, 12)


@given(idx, idx)
def test_relations_partition_pairs(i, i2):
    holds = [i >= i2 + 3, abs(i - i2) < 3, i <= i2 - 3]
    assert sum(holds) == 1
    assert classify(i, i2) is [FreqRelation.GG, FreqRelation.SIM, FreqRelation.LL][holds.index(True)]


def test_case_assignment_total_and_single_valued():
    leftovers = 0
    for t in itertools.product(range(9), repeat=4):
        lab = case_label(*t)
        assert lab in CASES
        hits = literal_cases(*t)
        assert len(hits) <= 1
        if hits:
            assert hits == [lab]
        else:
            leftovers += 1
            assert lab == "C1c"
    assert leftovers == 62


def test_case_examples():
    assert case_label(0, 0, 5, 0) == "C1a"
    assert case_label(6, 2, 5, 0) == "C1b"
    assert case_label(1, 5, 5, 0) == "C1d"
    assert case_label(3, 3, 2, 2) == "C2b"
    assert case_label(0, 4, 0, 5) == "C3"
    with pytest.raises(DomainError):
        classify(-1, 0)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_cases_sum_to_product(seed):
    f = smooth_field(LAT, generator(seed, 0))
    g = smooth_field(LAT, generator(seed, 1))
    parts = case_partition(f, g)
    total = sum(parts.values(), start=f * 0.0)
    assert (total - f * g).max_abs() <= 1e-10 * (f * g).max_abs()


def test_regrouped_cases_match():
    f = smooth_field(LAT, generator(5, 0), decay=1.0)
    g = smooth_field(LAT, generator(5, 1), decay=1.0)
    parts = case_partition(f, g)
    for got, key in ((case_1a_regrouped(f, g), "C1a"), (case_1d_regrouped(f, g), "C1d")):
        assert (got - parts[key]).max_abs() <= 1e-12 * max(parts[key].max_abs(), 1.0)


def test_dominance_ratios_finite():
    f = smooth_field(LAT, generator(1, 0))
    g = smooth_field(LAT, generator(1, 1))
    r = dominance_ratios(f, g, 1.0, 0.5)
    assert set(r) == {"C1a", "C1b", "C1c", "C2a", "C2b", "C2c"}
    assert all(0 <= v < 10 for v in r.values())
    with pytest.raises(StructureError):
        case_partition(f, smooth_field(Lattice.square(16), generator(1)))


def test_params_threshold_and_violations():
    p = MultParams(1.0, 1.0, 1.0, 0.5)
    assert p.threshold == pytest.approx(2.0)
    assert p.violations() == []
    assert "s1 <= n1/2" in MultParams(0.5, 1, 1, 0).violations()
    assert any("s2 >=" in v for v in MultParams(0.6, 0.2, 0.2, 0.1).violations())
    assert "s2 > min(s2', s2'')" in MultParams(2.0, 1.0, 0.5, 0.7).violations()


def test_mult_bound_is_resolution_stable():
    r = mult_bound_probe(MultParams(2.0, 1.0, 1.0, 1.0), trials=3, seed=7)
    assert r["drift"] <= 2.0 and not r["violations"]


def test_bump_spectrum_is_profile_product():
    lat = Lattice.square(64)
    f = product_bump(lat, 3, 2)
    c = np.fft.ifftn(f.samples)

    def g(t):
        chi = lambda u: math.exp(-1.0 / u) if u > 0 else 0.0
        return chi(2 - t) / (chi(2 - t) + chi(t - 1))

    def phi(j, r):
        return g(r) if j == 0 else g(r / 2 ** j) - g(r / 2 ** (j - 1))

    for k1, k2 in [(5, 3), (-9, 2), (12, -5), (3, 0), (8, 3)]:
        assert c[k1 % 64, k2 % 64] == pytest.approx(phi(3, abs(k1)) * phi(2, abs(k2)), abs=1e-14)


def test_predicted_exponents_by_hand():
    p = predicted_exponents(2, 5, 6, 2, 1.0, 1.0, 1.0, 0.5)
    assert p == {"f": 2 * 5 + 2 * 5 + 2 + 5, "g": 2 * 6 + 2 * 2 + 6 + 2,
                 "fg": 2 * 6 + 2 * 0.5 * 5 + (4 + 6) + (4 + 5)}


def test_scan_guards():
    with pytest.raises(DomainError):
        sharpness_scan(2, 5, 4, 2, 1, 1, 1, 1)
    with pytest.raises(DomainError):
        sharpness_scan(2, 5, 6, 2, 1, 1, 1, 1, lattice=Lattice.square(64))
