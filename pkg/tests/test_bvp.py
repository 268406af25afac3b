import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from aniso_lp import bvp
from aniso_lp.bvp import (BoundaryData, HalfCylinderField, NonFredholm, Term, apply_A,
                          boundary_lattice, calderon, dirichlet, elliptic_constant,
                          fredholm_diagnostic, neumann, pathological, poisson, robin,
                          robin_kernel_witness, single_mode_ratio, solve_bvp)
from aniso_lp.grid import DomainError, Field, Lattice, StructureError, mode
from aniso_lp.sampling import generator, smooth_field

# <k> = 2 needs |k|^2 = 3: the diagonal frequency on T^3
LAT3 = Lattice(0, 3, (4, 4, 4))
K3 = (1, 1, 1)
mus = st.floats(1.0, 1e4)
cplx = st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False)


def coef_at(u: HalfCylinderField, k, lat=LAT3):
    idx = tuple(x % n for x, n in zip(k, lat.sizes))
    return [(t.coef[idx], t.rate[idx], t.tpower) for t in u.terms if abs(t.coef[idx]) > 1e-13]


def test_calderon_examples():
    P = calderon(2.0)
    assert np.allclose(P @ [1, 0], [0.5, -1.0], atol=1e-15)
    assert np.allclose(P @ [1, -2.0], [1, -2.0], atol=1e-15)
    assert np.allclose(P @ [1, 2.0], [0, 0], atol=1e-15)


@given(mus, cplx, cplx)
def test_calderon_identities(m, a, b):
    P = calderon(m)
    v = np.array([a, b])
    scale = max(abs(a), abs(b), 1.0) * m
    assert np.max(np.abs(P @ P @ v - P @ v)) <= 1e-12 * scale
    assert np.linalg.matrix_rank(P) == 1
    # r_1 P = P+ and P P+ = P
    c = bvp.poisson_coefficient(m, a, b)
    assert np.max(np.abs(np.array([c, -m * c]) - P @ v)) <= 1e-12 * scale
    pv = P @ v
    assert abs(bvp.poisson_coefficient(m, pv[0], pv[1]) - c) <= 1e-12 * scale


def test_poisson_examples():
    m = 2.0
    e = mode(LAT3, K3)
    u = poisson(BoundaryData(e, e * (-m)))
    assert coef_at(u, K3) == [(pytest.approx(1.0), pytest.approx(2.0), 0)]
    assert coef_at(poisson(BoundaryData(e, e * m)), K3) == []
    u = poisson(BoundaryData(e, Field.zeros(LAT3)))
    assert coef_at(u, K3) == [(pytest.approx(0.5), pytest.approx(2.0), 0)]
    assert np.max(np.abs(apply_A(u).evaluate(np.linspace(0, 3, 7)))) <= 1e-12


def test_poisson_range_is_in_the_kernel():
    lat = boundary_lattice(32, 2)
    rng = generator(7)
    u = poisson(BoundaryData(smooth_field(lat, rng), smooth_field(lat, rng)))
    assert np.max(np.abs(apply_A(u).evaluate(np.linspace(0, 5, 11)))) <= 1e-12
    with pytest.raises(StructureError):
        BoundaryData(Field.zeros(lat), Field.zeros(boundary_lattice(16, 2)))


def test_solve_examples():
    e = mode(LAT3, K3)
    zero = HalfCylinderField(LAT3, ())
    u = solve_bvp(zero, dirichlet(), e).u
    assert coef_at(u, K3) == [(pytest.approx(1.0), pytest.approx(2.0), 0)]
    u = solve_bvp(zero, neumann(), e).u
    assert coef_at(u, K3) == [(pytest.approx(-0.5), pytest.approx(2.0), 0)]
    sol = solve_bvp(zero, pathological(), e)
    assert sol.u is None and not sol.diagnostic["fredholm"]
    assert sol.diagnostic["indicator_max"] == 0.0


def test_particular_solution_at_resonance():
    lat = boundary_lattice(16)
    m = bvp.mu(lat)
    c = np.zeros(lat.shape, dtype=complex)
    c[3] = 1.0
    for rate in (m, 0.5 * m):
        for p in (0, 2):
            f = HalfCylinderField(lat, (Term(c, rate.copy(), p),))
            v = bvp.particular_solution(f)
            t = np.linspace(0, 6, 25)
            assert np.max(np.abs(apply_A(v).evaluate(t) - f.evaluate(t))) <= 1e-12


@pytest.mark.parametrize("bc", [dirichlet(), neumann(), robin(0.5), robin(3.0)])
def test_solve_residuals(bc):
    lat = boundary_lattice(32)
    for t in range(8):
        f, g = bvp.shell_data(lat, 1 + t % 5, generator(7, t))
        sol = solve_bvp(f, bc, g)
        assert max(sol.residuals.values()) <= 1e-10


def test_fredholm_contrast():
    for size in (16, 32, 64):
        lat = boundary_lattice(size)
        for bc in (dirichlet(), neumann()):
            d = fredholm_diagnostic(bc, lat)
            assert d["fredholm"] and d["indicator_min"] >= 1.0 - 1e-15
        d = fredholm_diagnostic(pathological(), lat)
        assert not d["fredholm"] and d["indicator_max"] == 0.0


def test_robin_kernel_witness():
    lat = boundary_lattice(16)
    bc = robin_kernel_witness(lat, (2,))
    d = fredholm_diagnostic(bc, lat)
    assert d["fredholm"] and d["kernel_dim"] == 2
    assert sorted(d["zero_set"]) == [[-2], [2]]
    # the kernel mode solves the homogeneous problem
    c = np.zeros(lat.shape, dtype=complex)
    c[2] = 1.0
    u = HalfCylinderField(lat, (Term(c, bvp.mu(lat).copy(), 0),))
    a, b = u.trace_pair()
    assert np.max(np.abs(bc.apply(bvp.mu(lat), a, b))) == 0.0


def test_double_solve():
    lat = bvp.doubled_lattice(16, 8)
    f = mode(lat, (3, -2))
    v = bvp.invertible_double_solve(f)
    assert np.allclose(v.samples, f.samples / 14.0, atol=1e-14)
    one = Field(lat, np.ones(lat.shape))
    assert np.allclose(bvp.invertible_double_solve(one).samples, 1.0, atol=1e-14)
    r = smooth_field(lat, generator(7))
    assert (bvp.apply_double(bvp.invertible_double_solve(r)) - r).max_abs() <= 1e-12
    from aniso_lp.spaces import SpaceSpec, norm_value
    ratio = norm_value(bvp.invertible_double_solve(r), SpaceSpec("Haniso", 2.0, 1.0)) / norm_value(
        r, SpaceSpec("Haniso", 0.0, 1.0))
    assert ratio == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(StructureError):
        bvp.invertible_double_solve(Field.zeros(Lattice(0, 2, (8, 8))))


def test_grid_route():
    lat = bvp.doubled_lattice(64, 16)
    f = smooth_field(lat, generator(7, 0))
    g = smooth_field(lat.without_axis(0), generator(7, 1))
    sol = bvp.solve_bvp_grid(f, neumann(), g)
    assert sol.residuals["interior"] <= 1e-10 and sol.residuals["boundary"] <= 1e-10
    assert bvp.solve_bvp_grid(f, pathological(), g).u is None


def test_single_mode_ratio_closed_form():
    for s1 in (0, 1, 2):
        for s2 in (0.0, 1.0):
            assert single_mode_ratio(s1, s2) == pytest.approx(2 ** ((s1 + 1) / 2), rel=1e-12)


def test_zero_data_ratio_is_zero():
    lat = boundary_lattice(8)
    z = HalfCylinderField(lat, ())
    assert bvp.estimate_ratio(z, z, Field.zeros(lat), dirichlet(), 0, 0.0) == 0.0


def test_elliptic_constant_stable_and_refuses_non_fredholm():
    r = elliptic_constant(dirichlet(), 0, 1.0, 2, 7)
    assert r["drift"] <= 2.0
    with pytest.raises(NonFredholm):
        elliptic_constant(pathological(), 0, 1.0, 2, 7)
    with pytest.raises(DomainError):
        elliptic_constant(dirichlet(), 3, 1.0, 2, 7)


def test_half_norm_closed_form():
    # ||e^{-mu t}||^2 over t >= 0 is 1 / (2 mu)
    lat = boundary_lattice(8)
    c = np.zeros(lat.shape, dtype=complex)
    c[1] = 1.0
    u = HalfCylinderField(lat, (Term(c, np.full(lat.shape, 3.0), 0),))
    assert bvp.half_norm(u, 0, 0.0) == pytest.approx(np.sqrt(1 / 6), rel=1e-14)
    # t e^{-t}: int t^2 e^{-2t} = 2 / 8
    u = HalfCylinderField(lat, (Term(c, np.ones(lat.shape), 1),))
    assert bvp.half_norm(u, 0, 0.0) == pytest.approx(0.5, rel=1e-14)
    with pytest.raises(DomainError):
        bvp.half_norm(u, 0.5, 0.0)


def test_field_validation_and_json():
    lat = boundary_lattice(8)
    with pytest.raises(DomainError):
        HalfCylinderField(lat, (Term(np.ones(lat.shape), np.zeros(lat.shape), 0),))
    with pytest.raises(StructureError):
        HalfCylinderField(Lattice.square(8), ())
    e = mode(lat, (2,))
    u = solve_bvp(HalfCylinderField(lat, ()), dirichlet(), e).u
    doc = json.loads(u.to_json())
    assert doc["modes"] == [{"k": [2], "terms": [[pytest.approx(1.0), pytest.approx(0.0),
                                                  pytest.approx(np.sqrt(5)), 0]]}]
    assert bvp.bc_from_name("robin:1.5").name == "robin:1.5"
    with pytest.raises(DomainError):
        bvp.bc_from_name("mixed")
