"""Volume-constrained curvature flow of radial graphs.

The evolution moves the height field rho at the rate

    G(rho) = graph_factor * (h - F(kappa)),

where F is the configured speed and h is the spatial constant that keeps
one mixed volume fixed: the ratio of the E_{k+1}-weighted surface integrals
of F and 1.  The constant-h structure makes round spheres stationary points
of every admissible flow, and the linearization at the reference sphere is
diagonal in the harmonic basis with per-degree rate

    -F'(kappa_0) (l - 1)(l + n) / R^2   (degree l >= 1; degree 0 is neutral).

Two steppers are provided: classical fourth-order Runge-Kutta, subject to a
parabolic step restriction, and a first-order scheme that treats that
diagonal implicitly and the remainder explicitly, which is what makes the
stiff high modes harmless at desk-scale resolutions.  Every velocity
evaluation re-truncates to the band limit, so quadratic interactions that
the oversampled grid resolves are projected back exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AdmissibilityError, ConstraintDegenerateError, MixedFlowError, StepRejectedError
from .geometry import bundle_from_coeffs, curvature_bundle
from .harmonics import Grid, RadialField, build_grid
from .speeds import SpeedSpec, eval_speed, make_speed, umbilic_derivative

_INTEGRATORS = ("imex", "rk4")


@dataclass(frozen=True)
class FlowConfig:
    """Everything that determines one flow problem and how it is stepped."""

    n: int = 2
    R: float = 1.0
    k: int = -1
    speed: SpeedSpec | None = None
    integrator: str = "imex"
    dt: float | None = None
    c_cfl: float = 0.5
    T: float = 1.0
    L_max: int = 16
    oversample: float = 2.0
    cadence: int = 10
    g_tol: float = 1e-10

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError(f"n must be 1 or 2, got {self.n}")
        if not -1 <= self.k <= self.n - 1:
            raise ValueError(f"k must lie in [-1, {self.n - 1}], got {self.k}")
        if self.integrator not in _INTEGRATORS:
            raise ValueError(f"integrator must be one of {_INTEGRATORS}, got {self.integrator!r}")
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.T <= 0:
            raise ValueError("T must be positive")
        if self.cadence < 1:
            raise ValueError("cadence must be a positive step count")
        if self.speed is None:
            object.__setattr__(self, "speed", make_speed("mean", n=self.n, R=self.R))
        if self.speed.n != self.n or self.speed.R != self.R:
            raise ValueError("speed was built for a different dimension or radius")


@dataclass(frozen=True)
class FlowState:
    """Flow time, height field, and the diagnostics last computed for it."""

    t: float
    rho: RadialField
    diagnostics: dict | None = None


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    h_k: float
    V: float
    sup_G: float
    sup_rho: float
    sphere_residual_sup: float
    mode_energy: np.ndarray
    center_norm: float
    kappa_min: float
    kappa_max: float
    coeffs: np.ndarray


@dataclass(frozen=True)
class FlowRun:
    status: str
    records: list[DiagnosticsRecord]
    final: FlowState
    config: FlowConfig


def cfl_timestep(config: FlowConfig) -> float:
    """Parabolic step bound for the explicit integrator."""
    fp = umbilic_derivative(config.speed)
    L = config.L_max
    return config.c_cfl * config.R ** 2 / (fp * L * (L + config.n - 1))


def default_timestep(config: FlowConfig) -> float:
    if config.dt is not None:
        return config.dt
    if config.integrator == "rk4":
        return cfl_timestep(config)
    fp = umbilic_derivative(config.speed)
    return 0.1 * config.R ** 2 / (fp * config.L_max ** 2)


class FlowProblem:
    """Precomputed engine for one configuration: grid, tables, linear rates."""

    def __init__(self, config: FlowConfig, grid: Grid | None = None):
        self.config = config
        self.grid = grid if grid is not None else build_grid(config.n, config.L_max, config.oversample)
        if self.grid.n != config.n or self.grid.L_max != config.L_max:
            raise ValueError("grid does not match the configuration")
        self.fprime = umbilic_derivative(config.speed)
        ell = self.grid.degrees.astype(float)
        diag = -self.fprime * (ell - 1.0) * (ell + config.n) / config.R ** 2
        diag[ell == 0] = 0.0
        diag.flags.writeable = False
        self.linear_diag = diag

    # -- velocity -----------------------------------------------------------

    def field(self, coeffs: np.ndarray) -> RadialField:
        return RadialField(self.grid, self.config.R, coeffs=coeffs)

    def velocity_values(self, coeffs: np.ndarray) -> tuple[np.ndarray, float]:
        """Grid values of G together with the constraint constant h."""
        bundle = bundle_from_coeffs(self.grid, self.config.R, coeffs)
        F = eval_speed(self.config.speed, bundle)
        weight = bundle.E[self.config.k + 1] * bundle.mu
        den = self.grid.integrate(weight)
        if not den > 0.0:
            raise ConstraintDegenerateError(
                f"constraint weight integral is not positive ({den:.3e})")
        h = self.grid.integrate(F * weight) / den
        G = bundle.graph_factor * (h - F)
        if not np.all(np.isfinite(G)):
            raise AdmissibilityError("velocity field contains non-finite values")
        return G, h

    def g_coeffs(self, coeffs: np.ndarray) -> np.ndarray:
        """Velocity in coefficient space, truncated to the band limit."""
        G, _ = self.velocity_values(coeffs)
        return self.grid.analyze(G)

    def global_term(self, coeffs: np.ndarray) -> float:
        return self.velocity_values(coeffs)[1]

    # -- steppers -------------------------------------------------------------

    def step_rk4(self, coeffs: np.ndarray, dt: float) -> np.ndarray:
        bound = cfl_timestep(self.config)
        if dt > bound * (1.0 + 1e-12):
            raise StepRejectedError(
                f"dt={dt:.3e} exceeds the parabolic bound {bound:.3e}", suggested_dt=bound)
        try:
            k1 = self.g_coeffs(coeffs)
            k2 = self.g_coeffs(coeffs + 0.5 * dt * k1)
            k3 = self.g_coeffs(coeffs + 0.5 * dt * k2)
            k4 = self.g_coeffs(coeffs + dt * k3)
        except (AdmissibilityError, ConstraintDegenerateError) as exc:
            raise StepRejectedError(f"stage failed: {exc}", suggested_dt=0.5 * dt) from exc
        out = coeffs + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(out)):
            raise StepRejectedError("step produced non-finite coefficients", suggested_dt=0.5 * dt)
        return out

    def step_imex(self, coeffs: np.ndarray, dt: float) -> np.ndarray:
        try:
            g = self.g_coeffs(coeffs)
        except (AdmissibilityError, ConstraintDegenerateError) as exc:
            raise StepRejectedError(f"velocity failed: {exc}", suggested_dt=0.5 * dt) from exc
        d = self.linear_diag
        out = (coeffs + dt * (g - d * coeffs)) / (1.0 - dt * d)
        if not np.all(np.isfinite(out)):
            raise StepRejectedError("step produced non-finite coefficients", suggested_dt=0.5 * dt)
        return out

    def step(self, coeffs: np.ndarray, dt: float) -> np.ndarray:
        if self.config.integrator == "rk4":
            return self.step_rk4(coeffs, dt)
        return self.step_imex(coeffs, dt)

    # -- diagnostics ------------------------------------------------------------

    def diagnostics(self, t: float, coeffs: np.ndarray) -> DiagnosticsRecord:
        # Imported here: analysis depends on this module at import time.
        from .analysis import fit_sphere, mixed_volume

        rho = self.field(coeffs)
        G, h = self.velocity_values(coeffs)
        bundle = curvature_bundle(rho)
        V = mixed_volume(rho, self.config.k)
        energies = self.grid.mode_energies(coeffs)
        try:
            _, residual = fit_sphere(rho)
            res_sup = float(np.max(np.abs(residual)))
        except MixedFlowError:
            res_sup = float("nan")
        kmin = min(float(np.min(k)) for k in bundle.kappa)
        kmax = max(float(np.max(k)) for k in bundle.kappa)
        return DiagnosticsRecord(
            t=t,
            h_k=h,
            V=V,
            sup_G=float(np.max(np.abs(G))),
            sup_rho=rho.sup_abs(),
            sphere_residual_sup=res_sup,
            mode_energy=energies,
            center_norm=float(np.sqrt(np.sum(coeffs[:self.grid.n + 2] ** 2))),
            kappa_min=kmin,
            kappa_max=kmax,
            coeffs=coeffs.copy(),
        )


def _state_diag(record: DiagnosticsRecord) -> dict:
    return {"h_k": record.h_k, "V": record.V, "kappa_min": record.kappa_min,
            "kappa_max": record.kappa_max}


def global_term(state: FlowState, config: FlowConfig) -> float:
    """Constraint constant h for the current surface."""
    return FlowProblem(config, grid=state.rho.grid).global_term(state.rho.coeffs)


def evaluate_G(state: FlowState, config: FlowConfig) -> np.ndarray:
    """Velocity field on the grid, truncated to the band limit."""
    prob = FlowProblem(config, grid=state.rho.grid)
    return prob.grid.synthesize(prob.g_coeffs(state.rho.coeffs))


def linearized_at_zero(values: np.ndarray, config: FlowConfig, grid: Grid | None = None) -> np.ndarray:
    """Action of the flow's linearization at the round sphere on a field."""
    prob = FlowProblem(config, grid=grid)
    c = prob.grid.analyze(values)
    return prob.grid.synthesize(prob.linear_diag * c)


def step_explicit(state: FlowState, dt: float, config: FlowConfig) -> FlowState:
    prob = FlowProblem(config, grid=state.rho.grid)
    coeffs = prob.step_rk4(state.rho.coeffs, dt)
    return FlowState(t=state.t + dt, rho=prob.field(coeffs))


def step_imex(state: FlowState, dt: float, config: FlowConfig) -> FlowState:
    prob = FlowProblem(config, grid=state.rho.grid)
    coeffs = prob.step_imex(state.rho.coeffs, dt)
    return FlowState(t=state.t + dt, rho=prob.field(coeffs))


def run(config: FlowConfig, rho0: RadialField | None = None,
        problem: FlowProblem | None = None) -> FlowRun:
    """Evolve from rho0 until time T or until the velocity drops below g_tol.

    Diagnostics are recorded at t = 0, every `cadence` steps, and at the
    final state, always recomputed from the current surface.
    """
    prob = problem if problem is not None else FlowProblem(config)
    if rho0 is None:
        rho0 = RadialField(prob.grid, config.R, values=np.zeros(prob.grid.shape))
    if rho0.grid is not prob.grid:
        raise ValueError("initial field lives on a different grid")
    if not rho0.admissible():
        raise AdmissibilityError("initial field is not an admissible graph")
    dt = default_timestep(config)
    n_steps = max(1, math.ceil(config.T / dt - 1e-9))
    coeffs = rho0.coeffs.copy()
    rec = prob.diagnostics(0.0, coeffs)
    records = [rec]
    status = "reached_T"
    if rec.sup_G <= config.g_tol:
        status = "converged"
        n_steps = 0
    step_no = 0
    while step_no < n_steps:
        coeffs = prob.step(coeffs, dt)
        step_no += 1
        t = step_no * dt
        if step_no % config.cadence == 0 or step_no == n_steps:
            rec = prob.diagnostics(t, coeffs)
            records.append(rec)
            if rec.sup_G <= config.g_tol:
                status = "converged"
                break
    final_rec = records[-1]
    final = FlowState(t=final_rec.t, rho=prob.field(coeffs),
                      diagnostics=_state_diag(final_rec))
    return FlowRun(status=status, records=records, final=final, config=config)
