"""Geometry of radial graphs: curvatures, area element, enclosed volume.

A surface is described by r = R + rho over the reference sphere.  All
derivatives of rho are taken spectrally, so the curvature fields inherit the
accuracy of the band-limited representation.  For n = 2 the shape operator
is assembled from the first and second fundamental forms in (theta, phi)
coordinates; its trace and determinant give the elementary symmetric
curvature functions directly, without an eigendecomposition, and the
principal curvatures follow from the quadratic formula with the
discriminant clamped at zero against roundoff at umbilic points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AdmissibilityError
from .harmonics import RadialField


@dataclass(frozen=True)
class CurvatureBundle:
    """Pointwise curvature data of a radial graph on its grid.

    kappa holds the principal curvatures (n arrays, largest first), E the
    elementary symmetric functions E_0 = 1 through E_n, mu the area element
    relative to the reference sphere measure, and graph_factor the length
    distortion sqrt(1 + |grad rho|^2 / r^2) relating normal speed to radial
    speed.
    """

    kappa: tuple[np.ndarray, ...]
    E: tuple[np.ndarray, ...]
    mu: np.ndarray
    graph_factor: np.ndarray
    radius: np.ndarray


def elementary_symmetric(kappa, l: int) -> float:
    """Elementary symmetric function E_l of a sequence of numbers.

    Expands prod(x + kappa_i) iteratively, which is stable and avoids
    enumerating subsets.
    """
    kappa = [float(k) for k in kappa]
    n = len(kappa)
    if not 0 <= l <= n:
        raise ValueError(f"E_{l} undefined for {n} arguments")
    e = np.zeros(n + 1)
    e[0] = 1.0
    for k in kappa:
        e[1:] += k * e[:-1].copy()
    return float(e[l])


def _check_radius(r: np.ndarray) -> None:
    if not np.all(np.isfinite(r)):
        raise AdmissibilityError("radius field contains non-finite values")
    if np.min(r) <= 0.0:
        raise AdmissibilityError(f"graph leaves the admissible cone: min radius {np.min(r):.3e}")


def curvature_bundle(rho: RadialField) -> CurvatureBundle:
    """Principal curvatures and measure data of the graph r = R + rho."""
    return bundle_from_coeffs(rho.grid, rho.R, rho.coeffs)


def bundle_from_coeffs(grid, R: float, coeffs: np.ndarray) -> CurvatureBundle:
    """Same as curvature_bundle, entered at the coefficient level."""
    d = grid.synthesize_derivs(coeffs)
    r = R + d["u"]
    _check_radius(r)
    if grid.n == 1:
        rt, rtt = d["ut"], d["utt"]
        w2 = r * r + rt * rt
        den = np.sqrt(w2)
        kappa1 = (r * r + 2.0 * rt * rt - r * rtt) / (w2 * den)
        ones = np.ones_like(r)
        return CurvatureBundle(
            kappa=(kappa1,),
            E=(ones, kappa1),
            mu=den / R,
            graph_factor=den / r,
            radius=r,
        )
    st = grid.sin_theta[:, None]
    ct = grid.x[:, None]
    rt, rp = d["ut"], d["up"]
    rtt, rtp, rpp = d["utt"], d["utp"], d["upp"]
    grad2 = rt * rt + (rp / st) ** 2
    w2 = r * r + grad2
    den = np.sqrt(w2)
    g11 = r * r + rt * rt
    g12 = rt * rp
    g22 = (r * st) ** 2 + rp * rp
    # Covariant Hessian of r on the round sphere, (theta, phi) components.
    hess11 = rtt
    hess12 = rtp - (ct / st) * rp
    hess22 = rpp + st * ct * rt
    h11 = (2.0 * rt * rt + r * r - r * hess11) / den
    h12 = (2.0 * rt * rp - r * hess12) / den
    h22 = (2.0 * rp * rp + (r * st) ** 2 - r * hess22) / den
    detg = g11 * g22 - g12 * g12
    # Shape operator entries; the discriminant is assembled from them in a
    # form free of the cancellation that tr^2 - 4 det suffers at umbilics.
    w11 = (g22 * h11 - g12 * h12) / detg
    w12 = (g22 * h12 - g12 * h22) / detg
    w21 = (g11 * h12 - g12 * h11) / detg
    w22 = (g11 * h22 - g12 * h12) / detg
    trW = w11 + w22
    detW = w11 * w22 - w12 * w21
    disc = (w11 - w22) ** 2 + 4.0 * w12 * w21
    sq = np.sqrt(np.maximum(disc, 0.0))
    kappa1 = 0.5 * (trW + sq)
    kappa2 = 0.5 * (trW - sq)
    ones = np.ones_like(r)
    return CurvatureBundle(
        kappa=(kappa1, kappa2),
        E=(ones, trW, detW),
        mu=r * den / (R * R),
        graph_factor=den / r,
        radius=r,
    )


def enclosed_volume(rho: RadialField) -> float:
    """Volume of the region the graph bounds around the origin."""
    grid = rho.grid
    r = rho.R + rho.values
    _check_radius(r)
    n = grid.n
    return grid.integrate(r ** (n + 1)) / (n + 1)


def surface_measure(rho: RadialField) -> float:
    """Total surface measure of the graph."""
    bundle = curvature_bundle(rho)
    return rho.R ** rho.grid.n * rho.grid.integrate(bundle.mu)
