"""Curvature pipeline tests, cross-checked against finite-difference oracles."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mixedflow.errors import AdmissibilityError
from mixedflow.geometry import (
    curvature_bundle,
    elementary_symmetric,
    enclosed_volume,
    surface_measure,
)
from mixedflow.harmonics import RadialField, build_grid
from conftest import band_coeffs
from oracles import (
    circle_curvature,
    graph_area,
    mesh_principal_curvatures,
    star_volume,
)


def const_field(grid, R, c):
    coeffs = np.zeros(grid.size)
    coeffs[0] = c * math.sqrt(4.0 * math.pi if grid.n == 2 else 2.0 * math.pi)
    return RadialField(grid, R, coeffs=coeffs)


# -- elementary symmetric functions ----------------------------------------------


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=6), st.integers(0, 6))
def test_elementary_symmetric_matches_combinations(kappa, l):
    l = min(l, len(kappa))
    got = elementary_symmetric(kappa, l)
    want = sum(math.prod(combo) for combo in itertools.combinations(kappa, l))
    assert abs(got - want) <= 1e-10 * max(1.0, abs(want))


# -- umbilic identity -------------------------------------------------------------


def test_umbilic_identity_spheres(grid1, grid2):
    for grid in (grid1, grid2):
        for R in (1.0, 2.0):
            for c in (-0.3 * R, 0.0, 0.5 * R):
                b = curvature_bundle(const_field(grid, R, c))
                for kap in b.kappa:
                    assert np.max(np.abs(kap - 1.0 / (R + c))) <= 1e-11


def test_offset_sphere_umbilic(grid2):
    # exact spheres shifted off-center are still umbilic pointwise
    from mixedflow.analysis import sphere_from_coords

    z = np.array([0.1, 0.05, -0.03, 0.08])
    rho = sphere_from_coords(z, grid2, 1.0)
    b = curvature_bundle(rho)
    for kap in b.kappa:
        assert np.max(np.abs(kap - 1.0 / 1.1)) <= 1e-11


def test_el_consistency(grid2, rng):
    rho = RadialField(grid2, 1.0, coeffs=band_coeffs(grid2, rng, l_lo=0, l_hi=8, scale=0.02))
    b = curvature_bundle(rho)
    k1, k2 = b.kappa
    assert np.max(np.abs(b.E[1] - (k1 + k2))) <= 1e-12 * np.max(np.abs(b.E[1]))
    e2 = ((k1 + k2) ** 2 - (k1 ** 2 + k2 ** 2)) / 2.0
    assert np.max(np.abs(b.E[2] - e2)) <= 1e-12 * max(1.0, np.max(np.abs(e2)))
    assert np.max(np.abs(b.E[0] - 1.0)) == 0.0


def test_scaling_covariance(grid2, grid1, rng):
    for grid in (grid2, grid1):
        n = grid.n
        c = band_coeffs(grid, rng, l_hi=6, scale=0.02)
        base = curvature_bundle(RadialField(grid, 1.0, coeffs=c))
        V_base = enclosed_volume(RadialField(grid, 1.0, coeffs=c))
        for s in (0.5, 2.0):
            scaled = curvature_bundle(RadialField(grid, s, coeffs=s * c))
            for kap_s, kap in zip(scaled.kappa, base.kappa):
                assert np.max(np.abs(kap_s * s - kap)) <= 1e-9 * np.max(np.abs(kap))
            for l in range(n + 1):
                assert np.max(np.abs(scaled.E[l] * s ** l - base.E[l])) \
                    <= 1e-9 * max(1.0, np.max(np.abs(base.E[l])))
            assert np.max(np.abs(scaled.mu - base.mu)) <= 1e-9 * np.max(np.abs(base.mu))
            V_s = enclosed_volume(RadialField(grid, s, coeffs=s * c))
            assert abs(V_s - s ** (n + 1) * V_base) <= 1e-9 * abs(V_base) * s ** (n + 1)


def test_rotation_equivariance(grid2, rng):
    # shifting the data by one longitude node is an exact symmetry of the grid
    c = band_coeffs(grid2, rng, l_hi=10, scale=0.02)
    vals = RadialField(grid2, 1.0, coeffs=c).values
    b = curvature_bundle(RadialField(grid2, 1.0, values=vals))
    b_shift = curvature_bundle(RadialField(grid2, 1.0, values=np.roll(vals, 1, axis=1)))
    for kap, kap_s in zip(b.kappa, b_shift.kappa):
        assert np.max(np.abs(np.roll(kap, 1, axis=1) - kap_s)) <= 1e-10


# -- against the finite-difference oracles ----------------------------------------


def test_circle_curvature_oracle(grid1):
    r_fn = lambda t: 1.0 + 0.15 * np.cos(2.0 * t) + 0.05 * np.sin(3.0 * t)
    rho = RadialField(grid1, 1.0, values=r_fn(grid1.theta) - 1.0)
    b = curvature_bundle(rho)
    oracle = circle_curvature(r_fn, grid1.theta)
    assert np.max(np.abs(b.kappa[0] - oracle)) < 1e-7


def test_surface_curvature_oracle():
    grid = build_grid(2, 8, oversample=3.0)
    r_fn_np = lambda t, p: 1.0 + 0.05 * np.sin(t) ** 3 * np.cos(t) * np.cos(3.0 * p)
    TH = grid.theta[:, None] * np.ones((1, grid.shape[1]))
    PH = np.ones((grid.shape[0], 1)) * grid.phi[None, :]
    # sin^3 cos cos(3p) is a degree-4 harmonic combination, representable at L=8
    rho = RadialField(grid, 1.0, values=r_fn_np(TH, PH) - 1.0)
    b = curvature_bundle(rho)
    k_lo = np.minimum(b.kappa[0], b.kappa[1])
    k_hi = np.maximum(b.kappa[0], b.kappa[1])
    o_lo, o_hi = mesh_principal_curvatures(r_fn_np, TH, PH, h=1e-2)
    assert np.max(np.abs(k_lo - o_lo)) < 1e-6
    assert np.max(np.abs(k_hi - o_hi)) < 1e-6


def test_area_against_metric_oracle():
    # the test surface is exactly the (4, 3) harmonic, so a band limit of 8
    # represents it with no truncation and the comparison is oracle-exact
    grid = build_grid(2, 8, oversample=3.0)
    amp = 0.05
    r_fn = lambda t, p: 1.0 + amp * np.sin(t) ** 3 * np.cos(t) * np.cos(3.0 * p)

    def grad_fn(t, p):
        st, ct = np.sin(t), np.cos(t)
        rt = amp * (3.0 * st ** 2 * ct ** 2 - st ** 4) * np.cos(3.0 * p)
        rp = -3.0 * amp * st ** 3 * ct * np.sin(3.0 * p)
        return rt, rp

    TH = grid.theta[:, None] * np.ones((1, grid.shape[1]))
    PH = np.ones((grid.shape[0], 1)) * grid.phi[None, :]
    rho = RadialField(grid, 1.0, values=r_fn(TH, PH) - 1.0)
    area_spec = surface_measure(rho)
    area_oracle = graph_area(r_fn, grad_fn)
    assert abs(area_spec - area_oracle) <= 1e-10 * area_oracle


def test_volume_against_star_oracle():
    grid = build_grid(2, 8, oversample=3.0)
    amp = 0.05
    r_fn = lambda t, p: 1.0 + amp * np.sin(t) ** 3 * np.cos(t) * np.cos(3.0 * p)
    TH = grid.theta[:, None] * np.ones((1, grid.shape[1]))
    PH = np.ones((grid.shape[0], 1)) * grid.phi[None, :]
    rho = RadialField(grid, 1.0, values=r_fn(TH, PH) - 1.0)
    # oracle quadrature lives on its own, much finer node set
    assert abs(enclosed_volume(rho) - star_volume(r_fn)) <= 1e-12 * star_volume(r_fn)


def test_sphere_volumes_exact(grid1, grid2):
    for grid, n in ((grid1, 1), (grid2, 2)):
        for R in (1.0, 2.0):
            for c in (-0.2, 0.0, 0.4):
                V = enclosed_volume(const_field(grid, R, c * R))
                area = 2.0 * math.pi if n == 1 else 4.0 * math.pi
                expect = area * (R + c * R) ** (n + 1) / (n + 1)
                assert abs(V - expect) <= 1e-12 * expect


def test_mu_on_spheres(grid2, grid1):
    # mu = (r/R)^n for concentric spheres
    for grid in (grid2, grid1):
        b = curvature_bundle(const_field(grid, 2.0, 0.5))
        assert np.max(np.abs(b.mu - (2.5 / 2.0) ** grid.n)) < 1e-13


def test_graph_factor_on_spheres(grid2):
    b = curvature_bundle(const_field(grid2, 1.0, 0.25))
    assert np.max(np.abs(b.graph_factor - 1.0)) < 1e-13


def test_inadmissible_radius(grid2):
    with pytest.raises(AdmissibilityError):
        curvature_bundle(const_field(grid2, 1.0, -1.5))
    bad = np.full(grid2.shape, np.nan)
    with pytest.raises(AdmissibilityError):
        curvature_bundle(RadialField(grid2, 1.0, values=bad))
