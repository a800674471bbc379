"""Verification instruments: conserved quantities, spectra, sphere fitting.

The sphere family is parametrized by n+2 numbers z = (z0, z1, ..., z_{n+1}):
center sum(z_p omega_p) and radius R + z0, written as a height function over
the reference sphere.  fit_sphere inverts that parametrization in the
weighted least-squares sense by Gauss-Newton, seeded from the lowest-mode
projection of the field, so convergence statements about the flow can be
made against the nearest true sphere rather than against harmonics of the
evolving surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AdmissibilityError, FitConvergenceError
from .flow import FlowConfig, FlowProblem
from .geometry import curvature_bundle, enclosed_volume
from .harmonics import (
    SPHERE_AREA,
    Grid,
    RadialField,
    harmonic_multiplicity,
    total_coefficients,
)
from .speeds import SpeedSpec, umbilic_derivative


# -- conserved quantities -----------------------------------------------------


def mixed_volume(rho: RadialField, k: int) -> float:
    """The quantity the k-constrained flow holds fixed.

    k = -1 is the enclosed volume; 0 <= k <= n-1 is the E_k-weighted surface
    integral with the conventional binomial normalization.  On a sphere of
    radius r these reduce to |S^n| r^{n-k} / (n+1).
    """
    n = rho.grid.n
    if not -1 <= k <= n - 1:
        raise ValueError(f"k must lie in [-1, {n - 1}], got {k}")
    if k == -1:
        return enclosed_volume(rho)
    bundle = curvature_bundle(rho)
    total = rho.R ** n * rho.grid.integrate(bundle.E[k] * bundle.mu)
    return total / ((n + 1) * math.comb(n, k))


def stable_decay_rate(speed: SpeedSpec, l: int) -> float:
    """Linear-theory decay rate of a degree-l perturbation (positive for l >= 2)."""
    return umbilic_derivative(speed) * (l - 1.0) * (l + speed.n) / speed.R ** 2


# -- spectrum -----------------------------------------------------------------


@dataclass(frozen=True)
class SpectrumRow:
    l: int
    lambda_analytic: float
    multiplicity: int
    lambda_numeric: float | None = None
    offdiag_max: float | None = None


@dataclass(frozen=True)
class SpectrumReport:
    rows: list[SpectrumRow]
    center_dimension: int
    lambda_max_abs: float
    zero_multiplicity_numeric: int | None = None
    symmetry_defect: float | None = None
    max_offdiagonal: float | None = None

    def csv_lines(self) -> list[str]:
        lines = ["l,lambda_analytic,lambda_numeric,multiplicity,offdiag_max"]
        for row in self.rows:
            num = "" if row.lambda_numeric is None else repr(row.lambda_numeric)
            off = "" if row.offdiag_max is None else repr(row.offdiag_max)
            lines.append(f"{row.l},{row.lambda_analytic!r},{num},{row.multiplicity},{off}")
        return lines


def analytic_spectrum(config: FlowConfig, l_max: int) -> SpectrumReport:
    """Per-degree eigenvalues of the linearized flow at the round sphere."""
    rows = []
    lam_max = 0.0
    for l in range(l_max + 1):
        lam = 0.0 if l <= 1 else -stable_decay_rate(config.speed, l)
        lam_max = max(lam_max, abs(lam))
        rows.append(SpectrumRow(l=l, lambda_analytic=lam,
                                multiplicity=harmonic_multiplicity(l, config.n)))
    return SpectrumReport(rows=rows, center_dimension=config.n + 2, lambda_max_abs=lam_max)


def numerical_jacobian(config: FlowConfig, l_max: int,
                       eps: float | None = None) -> tuple[np.ndarray, SpectrumReport]:
    """Central-difference Jacobian of the velocity map at the round sphere.

    Columns are one-coefficient perturbations of size eps (default 1e-5 R);
    the matrix is restricted to degrees <= l_max, which occupy the leading
    block of the flat layout.  The report compares its diagonal means, worst
    off-diagonal entries, and near-null dimension against the analytic rows.
    """
    if l_max > config.L_max:
        raise ValueError(f"l_max={l_max} exceeds the configured band limit {config.L_max}")
    D = total_coefficients(l_max, config.n)
    if D > 400:
        raise ValueError(f"Jacobian dimension {D} is above the supported range")
    prob = FlowProblem(config)
    h = eps if eps is not None else 1e-5 * config.R
    J = np.empty((D, D))
    e = np.zeros(prob.grid.size)
    for j in range(D):
        e[j] = h
        gp = prob.g_coeffs(e)
        e[j] = -h
        gm = prob.g_coeffs(e)
        e[j] = 0.0
        J[:, j] = (gp[:D] - gm[:D]) / (2.0 * h)

    analytic = analytic_spectrum(config, l_max)
    lam_max = analytic.lambda_max_abs
    degrees = prob.grid.degrees[:D]
    offmask = ~np.eye(D, dtype=bool)
    rows = []
    for row in analytic.rows:
        sel = degrees == row.l
        lam_num = float(np.mean(np.diag(J)[sel]))
        off = float(np.max(np.abs(J[:, sel][offmask[:, sel]])))
        rows.append(SpectrumRow(l=row.l, lambda_analytic=row.lambda_analytic,
                                multiplicity=row.multiplicity,
                                lambda_numeric=lam_num, offdiag_max=off))
    sym = float(np.max(np.abs(J - J.T)))
    eigs = np.linalg.eigvalsh(0.5 * (J + J.T))
    zero_mult = int(np.sum(np.abs(eigs) <= 1e-6 * max(lam_max, 1.0)))
    report = SpectrumReport(rows=rows, center_dimension=config.n + 2,
                            lambda_max_abs=lam_max,
                            zero_multiplicity_numeric=zero_mult,
                            symmetry_defect=sym,
                            max_offdiagonal=float(np.max(np.abs(J[offmask]))))
    return J, report


# -- sphere fitting -----------------------------------------------------------


@dataclass(frozen=True)
class SphereCoords:
    """Radius offset and center of a sphere near the reference sphere."""

    z0: float
    center: tuple[float, ...]

    def vector(self) -> np.ndarray:
        return np.array([self.z0, *self.center])

    @staticmethod
    def from_vector(z: np.ndarray) -> "SphereCoords":
        z = np.asarray(z, dtype=float)
        return SphereCoords(z0=float(z[0]), center=tuple(float(v) for v in z[1:]))


def _sphere_height(z: np.ndarray, grid: Grid, R: float):
    """Height of the sphere with coordinates z over the reference sphere."""
    omega = grid.directions()
    if z.size != grid.n + 2:
        raise ValueError(f"expected {grid.n + 2} coordinates, got {z.size}")
    s = sum(z[1 + i] * omega[i] for i in range(grid.n + 1))
    q2 = s * s + (R + z[0]) ** 2 - float(np.sum(z[1:] ** 2))
    if np.min(q2) <= 0.0:
        raise AdmissibilityError("sphere is not a graph over the reference sphere")
    q = np.sqrt(q2)
    return s - R + q, s, q, omega


def sphere_from_coords(z, grid: Grid, R: float) -> RadialField:
    """Exact sphere of radius R + z0 centered at sum z_p omega_p, as a height field."""
    if isinstance(z, SphereCoords):
        z = z.vector()
    z = np.asarray(z, dtype=float)
    values, _, _, _ = _sphere_height(z, grid, R)
    return RadialField(grid, R, values=values)


def project_center_coords(rho: RadialField) -> np.ndarray:
    """Sphere coordinates of the lowest-mode content of a field.

    Converts the orthonormal constant/degree-1 coefficients into the raw
    (z0, center) chart; exact when rho is itself an infinitesimal sphere.
    """
    grid, R = rho.grid, rho.R
    n = grid.n
    c = rho.coeffs
    area = SPHERE_AREA[n]
    z = np.empty(n + 2)
    z[0] = c[0] / math.sqrt(area)
    scale = math.sqrt(area / (n + 1.0))
    if n == 1:
        z[1] = c[1] / scale
        z[2] = c[2] / scale
    else:
        z[1] = c[2] / scale  # omega_1 carries the (1, cos) harmonic
        z[2] = c[3] / scale  # omega_2 carries the (1, sin) harmonic
        z[3] = c[1] / scale  # omega_3 carries the zonal harmonic
    return z


def fit_sphere(rho: RadialField, max_iter: int = 50,
               step_tol: float = 1e-12) -> tuple[SphereCoords, np.ndarray]:
    """Nearest sphere in the weighted least-squares sense, and the residual field.

    Gauss-Newton on the n+2 sphere coordinates, seeded from the lowest-mode
    projection; stops when the update norm drops below step_tol * R.
    """
    grid, R = rho.grid, rho.R
    if rho.sup_abs() > 0.3 * R:
        raise AdmissibilityError("field is too far from the reference sphere to fit")
    w = grid.quad_weights.ravel()
    vals = rho.values.ravel()
    z = project_center_coords(rho)
    for _ in range(max_iter):
        heights, s, q, omega = _sphere_height(z, grid, R)
        res = vals - heights.ravel()
        cols = [((R + z[0]) / q).ravel()]
        for i in range(grid.n + 1):
            cols.append((omega[i] + (s * omega[i] - z[1 + i]) / q).ravel())
        J = np.stack(cols, axis=1)
        A = J.T @ (w[:, None] * J)
        b = J.T @ (w * res)
        delta = np.linalg.solve(A, b)
        z = z + delta
        if float(np.linalg.norm(delta)) < step_tol * R:
            heights, _, _, _ = _sphere_height(z, grid, R)
            return SphereCoords.from_vector(z), rho.values - heights
    raise FitConvergenceError(f"sphere fit did not converge in {max_iter} iterations")


# -- decay rates ----------------------------------------------------------------


def fit_decay_rate(times, values, window: float = 0.5) -> float:
    """Least-squares slope of log(values) over the trailing time window.

    window is the trailing fraction of the time interval used for the fit;
    at least 10 samples must fall inside it and the values must be positive.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.shape != v.shape or t.ndim != 1:
        raise ValueError("times and values must be matching one-dimensional arrays")
    if not 0.0 < window <= 1.0:
        raise ValueError(f"window must lie in (0, 1], got {window}")
    cut = t[-1] - window * (t[-1] - t[0])
    mask = t >= cut
    if int(np.sum(mask)) < 10:
        raise ValueError(f"only {int(np.sum(mask))} samples in the fit window; need at least 10")
    if np.any(v[mask] <= 0.0):
        raise ValueError("values must be positive inside the fit window")
    slope = np.polyfit(t[mask], np.log(v[mask]), 1)[0]
    return float(slope)
