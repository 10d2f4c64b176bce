"""Fixed-energy variational functionals, the constraint manifold, and period recovery.

Two equivalent routes to a periodic orbit with energy h:

  free route:        f(u) = (1/2) * int |u'|^2 * int (h - V(u)),   u in the loop space;
  constrained route: f(u) = (1/4) * int |u'|^2 * int V'(u).u,      u on
                     F = { int (V(u) + (1/2) V'(u).u) dt = h }.

A critical loop u with f(u) > 0 rescales to the physical orbit q(t) = u(t/T),
with 1/T^2 given by the ratio of the potential and kinetic factors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import loops, potentials
from .errors import (
    DegenerateLoopError,
    NegativeRateError,
    ProjectionError,
    SingularityError,
)
from .loops import FourierLoop, GridLoop
from .potentials import PotentialSpec


@dataclass(frozen=True)
class EnergyProblem:
    """A fixed-energy problem instance: potential, energy level, tolerances."""

    spec: PotentialSpec
    h: float
    dim: int
    quadrature: int = 256
    min_radius_floor: float = 1e-6

    def __post_init__(self):
        if self.dim != self.spec.dim:
            raise ValueError("problem dim must match the potential dim")
        if self.quadrature < 3:
            raise ValueError("quadrature must have at least 3 nodes")
        if self.min_radius_floor <= 0:
            raise ValueError("min_radius_floor must be positive")


@dataclass
class OrbitSolution:
    """A minimizing loop with its recovered period and physical samples."""

    loop: FourierLoop
    f_value: float
    period_T: float
    physical_samples: GridLoop
    q0: np.ndarray
    v0: np.ndarray
    residuals: object = None  # VerificationReport, filled by the verifier

    def to_dict(self) -> dict:
        d = {
            "f_value": self.f_value,
            "period_T": self.period_T,
            "q0": np.asarray(self.q0).tolist(),
            "v0": np.asarray(self.v0).tolist(),
            "radius_mean": loops.mean_radius(self.loop),
            "radius_min": loops.min_radius(self.loop),
            "radius_max": loops.sup_norm(self.loop),
            "loop": self.loop.to_dict(),
        }
        if self.residuals is not None:
            d["residuals"] = self.residuals.to_dict()
        return d


def _grid_radii(problem: EnergyProblem, loop: FourierLoop) -> np.ndarray:
    """Radii |u| on the quadrature grid, after enforcing the singularity floor."""
    if problem.quadrature < 2 * loop.max_mode + 1:
        raise ValueError(
            f"quadrature {problem.quadrature} below Nyquist for {loop.max_mode} modes"
        )
    if not loops.min_radius_above(loop, problem.min_radius_floor):
        raise SingularityError("loop violates the minimum radius floor")
    return np.linalg.norm(loops.evaluate_grid(loop, problem.quadrature), axis=1)


def f_free(problem: EnergyProblem, loop: FourierLoop) -> float:
    """(1/2) * int |u'|^2 * int (h - V(u))."""
    r = _grid_radii(problem, loop)
    pot = float(np.mean(problem.h - potentials.value_radial(problem.spec, r)))
    return 0.5 * loops.kinetic_integral(loop) * pot


def grad_f_free(problem: EnergyProblem, loop: FourierLoop) -> FourierLoop:
    """Coefficient-space gradient of f_free, returned in a loop container.

    The pairing of the returned coefficients with a direction's coefficients
    equals the directional derivative of the quadrature-discretized f_free.
    """
    m = problem.quadrature
    vals = loops.evaluate_grid(loop, m)
    r = _grid_radii(problem, loop)
    kin = loops.kinetic_integral(loop)
    pot = float(np.mean(problem.h - potentials.value_radial(problem.spec, r)))
    grad_v = np.asarray(potentials.gradient_scale(problem.spec, r))[:, None] * vals

    cos_t, sin_t = loops.trig_tables(loop.max_mode, m)
    k2w = (
        4.0 * math.pi**2 * np.arange(1, loop.max_mode + 1, dtype=float) ** 2
    )[:, None]
    g_mean = -0.5 * kin * grad_v.mean(axis=0)
    g_cos = 0.5 * pot * k2w * loop.cos_coeffs - 0.5 * kin * (cos_t.T @ grad_v) / m
    g_sin = 0.5 * pot * k2w * loop.sin_coeffs - 0.5 * kin * (sin_t.T @ grad_v) / m
    return loop.with_coeffs(mean=g_mean, cos=g_cos, sin=g_sin)


def constraint_g(problem: EnergyProblem, loop: FourierLoop) -> float:
    """int (V(u) + (1/2) V'(u).u) dt; membership in F means this equals h."""
    r = _grid_radii(problem, loop)
    return float(np.mean(potentials.constraint_density_radial(problem.spec, r)))


def grad_constraint_g(problem: EnergyProblem, loop: FourierLoop) -> FourierLoop:
    m = problem.quadrature
    vals = loops.evaluate_grid(loop, m)
    r = _grid_radii(problem, loop)
    grad_dens = (
        np.asarray(potentials.constraint_density_gradient_scale(problem.spec, r))[
            :, None
        ]
        * vals
    )
    cos_t, sin_t = loops.trig_tables(loop.max_mode, m)
    return loop.with_coeffs(
        mean=grad_dens.mean(axis=0),
        cos=(cos_t.T @ grad_dens) / m,
        sin=(sin_t.T @ grad_dens) / m,
    )


def project_to_F(problem: EnergyProblem, loop: FourierLoop) -> FourierLoop:
    """Scale the loop onto F: find lambda with g(lambda * u) = h.

    For a single homogeneous term g(lambda u) = lambda^-alpha g(u), so the
    scaling is closed-form; multi-term specs use safeguarded root finding.
    """
    g0 = constraint_g(problem, loop)
    if g0 <= 0 or problem.h <= 0:
        raise ProjectionError(
            f"projection needs positive g and h (g={g0:.3e}, h={problem.h:.3e})"
        )
    if len(problem.spec.terms) == 1:
        _, alpha = problem.spec.terms[0]
        lam = (g0 / problem.h) ** (1.0 / alpha)
    else:
        r = _grid_radii(problem, loop)
        moments = [
            (a * (0.5 * alpha - 1.0) * float(np.mean(r ** (-alpha))), alpha)
            for a, alpha in problem.spec.terms
        ]

        def gap(lam):
            return sum(c * lam ** (-alpha) for c, alpha in moments) - problem.h

        lo, hi = 1e-6, 1e6
        if gap(lo) < 0 or gap(hi) > 0:
            raise ProjectionError("g(lambda u) = h has no root in [1e-6, 1e6]")
        lam = brentq(gap, lo, hi, xtol=1e-300, rtol=8.9e-16)
    return loops.scale(loop, lam)


def f_constrained(problem: EnergyProblem, loop: FourierLoop) -> float:
    """(1/4) * int |u'|^2 * int V'(u).u; agrees with f_free on F."""
    r = _grid_radii(problem, loop)
    w = float(np.mean(potentials.vprime_dot_x_radial(problem.spec, r)))
    return 0.25 * loops.kinetic_integral(loop) * w


def grad_f_constrained(problem: EnergyProblem, loop: FourierLoop) -> FourierLoop:
    m = problem.quadrature
    vals = loops.evaluate_grid(loop, m)
    r = _grid_radii(problem, loop)
    kin = loops.kinetic_integral(loop)
    w = float(np.mean(potentials.vprime_dot_x_radial(problem.spec, r)))
    grad_w = (
        np.asarray(potentials.vprime_dot_x_gradient_scale(problem.spec, r))[:, None]
        * vals
    )
    cos_t, sin_t = loops.trig_tables(loop.max_mode, m)
    k2w = (
        4.0 * math.pi**2 * np.arange(1, loop.max_mode + 1, dtype=float) ** 2
    )[:, None]
    g_mean = 0.25 * kin * grad_w.mean(axis=0)
    g_cos = 0.25 * (w * k2w * loop.cos_coeffs + kin * (cos_t.T @ grad_w) / m)
    g_sin = 0.25 * (w * k2w * loop.sin_coeffs + kin * (sin_t.T @ grad_w) / m)
    return loop.with_coeffs(mean=g_mean, cos=g_cos, sin=g_sin)


def period_from_loop(
    problem: EnergyProblem, loop: FourierLoop, mode: str = "free"
) -> float:
    """Recover the physical period T of the rescaled orbit q(t) = u(t/T).

    free:        1/T^2 = int (h - V(u)) / ((1/2) int |u'|^2)
    constrained: 1/T^2 = int V'(u).u   /        int |u'|^2
    """
    kin = loops.kinetic_integral(loop)
    if kin <= 1e-14:
        raise DegenerateLoopError("constant loop has no period")
    r = _grid_radii(problem, loop)
    if mode == "free":
        num = float(np.mean(problem.h - potentials.value_radial(problem.spec, r)))
        denom = 0.5 * kin
    elif mode == "constrained":
        num = float(np.mean(potentials.vprime_dot_x_radial(problem.spec, r)))
        denom = kin
    else:
        raise ValueError("mode must be 'free' or 'constrained'")
    if num <= 0:
        raise NegativeRateError(f"period numerator {num:.3e} <= 0 in {mode} mode")
    return math.sqrt(denom / num)


def rescale_to_solution(
    problem: EnergyProblem,
    loop: FourierLoop,
    period: float,
    f_value: float | None = None,
) -> OrbitSolution:
    """Build the physical orbit q(t) = u(t/T) with q(0), qdot(0) from the loop."""
    if period <= 0:
        raise ValueError("period must be positive")
    if f_value is None:
        f_value = f_free(problem, loop)
    samples = loops.to_grid(loop, problem.quadrature)
    return OrbitSolution(
        loop=loop,
        f_value=f_value,
        period_T=period,
        physical_samples=samples,
        q0=loops.evaluate(loop, 0.0),
        v0=loops.derivative(loop, 0.0) / period,
    )


def critical_radius(problem: EnergyProblem) -> float | None:
    """Radius of the analytic circular orbit, if one exists.

    Minimizes 2 pi^2 (h r^2 + sum a r^(2-alpha)) over r; None when h <= 0 or
    some exponent is <= 2 (no interior minimum in the attractive family).
    """
    if problem.h <= 0 or min(alpha for _, alpha in problem.spec.terms) <= 2.0:
        return None
    if len(problem.spec.terms) == 1:
        a, alpha = problem.spec.terms[0]
        return (a * (alpha - 2.0) / (2.0 * problem.h)) ** (1.0 / alpha)

    def balance(r):
        return 2.0 * problem.h * r - sum(
            a * (alpha - 2.0) * r ** (1.0 - alpha) for a, alpha in problem.spec.terms
        )

    return brentq(balance, 1e-9, 1e9, rtol=8.9e-16)
