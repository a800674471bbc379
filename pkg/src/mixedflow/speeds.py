"""Curvature speed functions and their normalization at the round sphere.

A speed is a symmetric function of the principal curvatures, evaluated here
through the elementary symmetric combinations that the geometry module
already provides.  Built-in kinds:

    mean                F = E_1, the sum of principal curvatures
    power_mean m beta   F = (E_m / C(n, m))^beta
    elementary l        F = E_l
    custom              F = phi(H_1, ..., H_n) with H_m = E_m / C(n, m)

Every speed must be strictly increasing in each curvature at the round
reference sphere; the derivative there (all curvatures equal to 1/R,
perturbed in one of them) normalizes the linear theory and is checked at
construction time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import SpeedError
from .geometry import CurvatureBundle, elementary_symmetric

_KINDS = ("mean", "power_mean", "elementary", "custom")


@dataclass(frozen=True)
class SpeedSpec:
    """Speed function bound to a dimension n and reference radius R."""

    kind: str
    n: int
    R: float
    m: int = 1
    beta: float = 1.0
    l: int = 1
    phi: Callable[..., np.ndarray] | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise SpeedError(f"unknown speed kind {self.kind!r}")
        if self.n not in (1, 2):
            raise SpeedError(f"speeds are defined for n in {{1, 2}}, got {self.n}")
        if self.R <= 0:
            raise SpeedError(f"reference radius must be positive, got {self.R}")
        if self.kind == "power_mean" and not 1 <= self.m <= self.n:
            raise SpeedError(f"power_mean needs 1 <= m <= n, got m={self.m}")
        if self.kind == "elementary" and not 1 <= self.l <= self.n:
            raise SpeedError(f"elementary needs 1 <= l <= n, got l={self.l}")
        if self.kind == "custom" and self.phi is None:
            raise SpeedError("custom speed needs a callable phi")

    def describe(self) -> str:
        if self.kind == "power_mean":
            return f"power_mean m={self.m} beta={self.beta:g}"
        if self.kind == "elementary":
            return f"elementary l={self.l}"
        return self.kind


def make_speed(kind: str, n: int, R: float = 1.0, **params) -> SpeedSpec:
    """Build a speed and verify it is admissible at the reference sphere."""
    spec = SpeedSpec(kind=kind, n=n, R=R, **params)
    fp = umbilic_derivative(spec)
    if not np.isfinite(fp) or fp <= 0.0:
        raise SpeedError(
            f"speed {spec.describe()} is not increasing at the reference sphere (F'={fp:.3e})")
    return spec


def _powers_from_E(spec: SpeedSpec, E: tuple) -> np.ndarray:
    n = spec.n
    means = [E[m] / math.comb(n, m) for m in range(1, n + 1)]
    if spec.kind == "mean":
        return np.asarray(E[1], dtype=float)
    if spec.kind == "elementary":
        return np.asarray(E[spec.l], dtype=float)
    if spec.kind == "power_mean":
        base = np.asarray(means[spec.m - 1], dtype=float)
        if spec.beta != round(spec.beta) and np.any(base <= 0.0):
            raise SpeedError(
                f"power_mean base must stay positive for beta={spec.beta:g}")
        return base ** spec.beta
    out = np.asarray(spec.phi(*means), dtype=float)
    return out


def eval_speed(spec: SpeedSpec, bundle: CurvatureBundle) -> np.ndarray:
    """Speed field on the grid from a curvature bundle."""
    return _powers_from_E(spec, bundle.E)


def eval_speed_kappa(spec: SpeedSpec, kappa) -> float:
    """Speed at one curvature tuple; used by difference checks and tests."""
    kappa = [float(k) for k in kappa]
    if len(kappa) != spec.n:
        raise SpeedError(f"expected {spec.n} curvatures, got {len(kappa)}")
    e = [1.0] + [elementary_symmetric(kappa, k) for k in range(1, spec.n + 1)]
    return float(_powers_from_E(spec, tuple(e)))


def reference_speed(spec: SpeedSpec) -> float:
    """F evaluated at the round reference sphere (all curvatures 1/R)."""
    return eval_speed_kappa(spec, [1.0 / spec.R] * spec.n)


def umbilic_derivative(spec: SpeedSpec, step: float | None = None) -> float:
    """Derivative of F in one principal curvature at the round sphere.

    Closed forms for the built-in kinds; a central difference with step
    1e-6/R for custom speeds (and available for cross-checks on any kind
    by passing an explicit step).
    """
    n, R = spec.n, spec.R
    if step is None and spec.kind != "custom":
        if spec.kind == "mean":
            return 1.0
        if spec.kind == "elementary":
            return math.comb(n - 1, spec.l - 1) * R ** (1 - spec.l)
        if spec.kind == "power_mean":
            return (spec.m * spec.beta / n) * R ** (1.0 - spec.m * spec.beta)
    h = step if step is not None else 1e-6 / R
    k0 = [1.0 / R] * n
    kp = [1.0 / R + h] + k0[1:]
    km = [1.0 / R - h] + k0[1:]
    return (eval_speed_kappa(spec, kp) - eval_speed_kappa(spec, km)) / (2.0 * h)
