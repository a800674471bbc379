"""Transform-layer tests: grids, layouts, round trips, calculus identities."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mixedflow.errors import DegreeOverflowError, GridError
from mixedflow.harmonics import (
    Grid,
    RadialField,
    build_grid,
    gradient_sq,
    harmonic_multiplicity,
    laplace_beltrami,
    mean_value,
    project_center,
    quadrature,
    total_coefficients,
)
from conftest import band_coeffs


# -- sizing and layout ----------------------------------------------------------


def test_grid_sizes_frozen(grid1, grid2, grid2_small):
    # dealiasing rule at oversample 2: enough nodes for exact quadratic products
    assert grid1.shape == (64,)
    assert grid2.shape == (34, 66)
    assert grid2_small.shape == (18, 34)


def test_coefficient_counts():
    assert total_coefficients(16, 1) == 33
    assert total_coefficients(8, 2) == 81
    assert total_coefficients(16, 2) == 289


def test_multiplicities():
    assert [harmonic_multiplicity(l, 2) for l in range(5)] == [1, 3, 5, 7, 9]
    assert [harmonic_multiplicity(l, 1) for l in range(5)] == [1, 2, 2, 2, 2]


def test_flat_layout(grid1, grid2):
    assert grid2.flat_index(0, 1) == 0
    assert grid2.flat_index(1, 1) == 1
    assert grid2.flat_index(2, 1) == 4
    assert grid2.flat_index(2, 5) == 8
    assert grid1.flat_index(0, 1) == 0
    assert grid1.flat_index(1, 2) == 2
    assert grid1.flat_index(3, 1) == 5
    with pytest.raises(IndexError):
        grid2.flat_index(2, 6)
    with pytest.raises(IndexError):
        grid2.flat_index(17, 1)


def test_grid_validation():
    with pytest.raises(GridError):
        build_grid(3, 8)
    with pytest.raises(GridError):
        build_grid(2, 2)
    with pytest.raises(GridError):
        build_grid(2, 8, oversample=0.5)


def test_degree_overflow(grid2_small):
    too_long = np.zeros(total_coefficients(9, 2))
    with pytest.raises(DegreeOverflowError):
        grid2_small.synthesize(too_long)


# -- transforms ------------------------------------------------------------------


def test_round_trip(grid1, grid2, rng):
    for grid in (grid1, grid2):
        c = band_coeffs(grid, rng)
        back = grid.analyze(grid.synthesize(c))
        assert np.max(np.abs(back - c)) < 1e-12 * max(1.0, np.max(np.abs(c)))


def test_constant_coefficient(grid1, grid2):
    # the constant basis member is |S^n|^{-1/2}
    c2 = grid2.analyze(np.ones(grid2.shape))
    assert abs(c2[0] - math.sqrt(4.0 * math.pi)) < 1e-13
    assert np.max(np.abs(c2[1:])) < 1e-13
    c1 = grid1.analyze(np.ones(grid1.shape))
    assert abs(c1[0] - math.sqrt(2.0 * math.pi)) < 1e-13


def test_fourier_convention(grid1):
    # n = 1 basis members are cos(l t)/sqrt(pi), sin(l t)/sqrt(pi)
    u = np.cos(3.0 * grid1.theta)
    c = grid1.analyze(u)
    assert abs(c[grid1.flat_index(3, 1)] - math.sqrt(math.pi)) < 1e-13
    c[grid1.flat_index(3, 1)] = 0.0
    assert np.max(np.abs(c)) < 1e-13


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_parseval(grid2_small, seed):
    rng = np.random.default_rng(seed)
    c = band_coeffs(grid2_small, rng)
    u = grid2_small.synthesize(c)
    lhs = grid2_small.integrate(u * u)
    rhs = float(np.sum(c * c))
    assert abs(lhs - rhs) <= 1e-10 * rhs


def test_quadrature_radius_scaling(grid2_small, rng):
    c = band_coeffs(grid2_small, rng)
    u = grid2_small.synthesize(c)
    assert abs(quadrature(u * u, grid2_small, R=2.0) - 4.0 * np.sum(c * c)) < 1e-9


def test_mean_value(grid2_small):
    u = 3.0 + grid2_small.synthesize(band_coeffs(grid2_small, np.random.default_rng(7), l_lo=1))
    assert abs(mean_value(u, grid2_small) - 3.0) < 1e-12


# -- calculus --------------------------------------------------------------------


def test_laplacian_eigenvalue(grid2, grid1):
    for grid, n in ((grid2, 2), (grid1, 1)):
        for l in (1, 3, 5):
            c = np.zeros(grid.size)
            c[grid.flat_index(l, 1)] = 1.0
            u = grid.synthesize(c)
            for R in (1.0, 2.0):
                lap = laplace_beltrami(u, grid, R=R)
                expect = -l * (l + n - 1) / R ** 2 * u
                assert np.max(np.abs(lap - expect)) < 1e-10 * l * (l + n - 1)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_laplacian_self_adjoint(grid2_small, seed):
    rng = np.random.default_rng(seed)
    u = grid2_small.synthesize(band_coeffs(grid2_small, rng))
    v = grid2_small.synthesize(band_coeffs(grid2_small, rng))
    a = grid2_small.integrate(laplace_beltrami(u, grid2_small, 1.0) * v)
    b = grid2_small.integrate(u * laplace_beltrami(v, grid2_small, 1.0))
    scale = max(1.0, abs(a))
    assert abs(a - b) <= 1e-10 * scale


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_integration_by_parts(grid2_small, seed):
    rng = np.random.default_rng(seed)
    u = grid2_small.synthesize(band_coeffs(grid2_small, rng))
    for R in (1.0, 1.7):
        lhs = quadrature(gradient_sq(u, grid2_small, R), grid2_small, R)
        rhs = -quadrature(u * laplace_beltrami(u, grid2_small, R), grid2_small, R)
        assert abs(lhs - rhs) <= 1e-8 * max(1.0, abs(rhs))


def test_gradient_sq_linear_field(grid2):
    # u = z . omega has |grad u|^2 = (|z|^2 - u^2) / R^2 on the radius-R sphere
    z = np.array([0.3, -1.1, 0.7])
    omega = grid2.directions()
    u = sum(z[i] * omega[i] for i in range(3))
    for R in (1.0, 2.0):
        got = gradient_sq(u, grid2, R)
        expect = (float(z @ z) - u * u) / R ** 2
        assert np.max(np.abs(got - expect)) < 1e-10


def test_gradient_sq_nonnegative(grid2_small, rng):
    u = grid2_small.synthesize(band_coeffs(grid2_small, rng))
    assert np.min(gradient_sq(u, grid2_small, 1.0)) > -1e-12


# -- center projection -----------------------------------------------------------


def test_project_center_constant(grid2):
    R = 2.0
    vals = np.full(grid2.shape, 0.25)
    c, resid = project_center(vals, grid2, R)
    # S_R-orthonormal constant member is 1/(R sqrt(4 pi)); coefficient R sqrt(4 pi) c
    assert abs(c[0] - 0.25 * R * math.sqrt(4.0 * math.pi)) < 1e-12
    assert np.max(np.abs(c[1:])) < 1e-12
    assert np.max(np.abs(resid)) < 1e-12


def test_project_center_idempotent_orthogonal(grid2, rng):
    R = 1.3
    u = grid2.synthesize(band_coeffs(grid2, rng))
    v = grid2.synthesize(band_coeffs(grid2, rng))

    def P(vals):
        c, _ = project_center(vals, grid2, R)
        coeffs = np.zeros(grid2.size)
        coeffs[:4] = c / R  # back to unit-sphere-orthonormal coefficients
        return grid2.synthesize(coeffs)

    pu = P(u)
    assert np.max(np.abs(P(pu) - pu)) < 1e-10 * max(1.0, np.max(np.abs(pu)))
    inner = quadrature(pu * (v - P(v)), grid2, R)
    norm = math.sqrt(quadrature(pu * pu, grid2, R) * quadrature(v * v, grid2, R))
    assert abs(inner) <= 1e-10 * max(1.0, norm)


def test_mode_energies(grid2_small):
    c = np.zeros(grid2_small.size)
    c[grid2_small.flat_index(3, 2)] = 0.5
    c[grid2_small.flat_index(5, 1)] = -2.0
    e = grid2_small.mode_energies(c)
    assert e[3] == 0.25 and e[5] == 4.0
    assert abs(np.sum(e) - 4.25) < 1e-15


def test_radial_field_lazy_coeffs(grid2_small):
    c = np.zeros(grid2_small.size)
    c[4] = 0.1
    f = RadialField(grid2_small, 1.0, coeffs=c)
    assert f.min_radius() > 0.8
    g = RadialField(grid2_small, 1.0, values=f.values)
    assert np.max(np.abs(g.coeffs - c)) < 1e-13
    with pytest.raises(ValueError):
        RadialField(grid2_small, 1.0)


def test_synthesize_derivs_y22(grid2):
    # Y_{2,2}^cos = N s^2 cos(2p), N = sqrt(15/16pi): check all five derivatives
    N = math.sqrt(15.0 / (16.0 * math.pi))
    c = np.zeros(grid2.size)
    c[grid2.flat_index(2, 4)] = 1.0
    d = grid2.synthesize_derivs(c)
    t = grid2.theta[:, None]
    p = grid2.phi[None, :]
    s, ct = np.sin(t), np.cos(t)
    assert np.max(np.abs(d["u"] - N * s ** 2 * np.cos(2 * p))) < 1e-12
    assert np.max(np.abs(d["ut"] - 2 * N * s * ct * np.cos(2 * p))) < 1e-11
    assert np.max(np.abs(d["up"] + 2 * N * s ** 2 * np.sin(2 * p))) < 1e-11
    assert np.max(np.abs(d["utt"] - 2 * N * np.cos(2 * t) * np.cos(2 * p))) < 1e-10
    assert np.max(np.abs(d["utp"] + 4 * N * s * ct * np.sin(2 * p))) < 1e-10
    assert np.max(np.abs(d["upp"] + 4 * N * s ** 2 * np.cos(2 * p))) < 1e-10
