"""Independent validation of candidate orbits by direct numerical integration.

The integrator consumes only the potential and the initial state (q0, v0, T),
never the optimizer's loop coefficients, so it is a genuine oracle for the
equations of motion qdd = -grad V(q) at energy h.  The separate ODE-residual
check evaluates the exact Fourier second derivative of the candidate loop.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import loops, potentials
from .errors import CollisionError, SingularityError, StepFailureError
from .functionals import EnergyProblem, OrbitSolution
from .potentials import PotentialSpec

# Dormand-Prince 5(4) tableau
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_DP_ERR = _DP_B5 - _DP_B4


@dataclass(frozen=True)
class IntegratorStats:
    steps: int
    rejected_steps: int
    min_radius_seen: float


@dataclass(frozen=True)
class Trajectory:
    """Accepted integration points of one orbit segment."""

    times: np.ndarray   # (m,), increasing, times[0] = 0, times[-1] = T
    states: np.ndarray  # (m, 2n): q then qdot
    stats: IntegratorStats

    @property
    def dim(self) -> int:
        return self.states.shape[1] // 2

    def positions(self) -> np.ndarray:
        return self.states[:, : self.dim]

    def velocities(self) -> np.ndarray:
        return self.states[:, self.dim :]

    def energies(self, spec: PotentialSpec) -> np.ndarray:
        q, v = self.positions(), self.velocities()
        return 0.5 * np.sum(v * v, axis=1) + potentials.potential_value(spec, q)


@dataclass(frozen=True)
class VerifyTolerances:
    energy: float = 1e-6
    periodicity: float = 1e-4
    ode: float = 1e-4
    integrator_tol: float = 1e-10
    ode_samples: int = 400


@dataclass(frozen=True)
class VerificationReport:
    energy_residual: float
    periodicity_residual: float
    ode_residual: float
    verdict: bool
    reason: str | None = None

    def to_dict(self) -> dict:
        return {
            "energy_residual": self.energy_residual,
            "periodicity_residual": self.periodicity_residual,
            "ode_residual": self.ode_residual,
            "verdict": self.verdict,
            "reason": self.reason,
        }


def integrate_orbit(
    spec: PotentialSpec,
    q0,
    v0,
    T: float,
    tol: float = 1e-10,
    radius_floor: float = 1e-6,
    max_steps: int = 1_000_000,
) -> Trajectory:
    """Integrate qdd = -grad V(q) over [0, T] with an adaptive embedded RK 5(4) pair.

    Raises CollisionError when |q| falls below radius_floor and
    StepFailureError on step-size underflow or step-budget exhaustion.
    """
    q0 = np.asarray(q0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    n = q0.size
    if T <= 0:
        raise ValueError("T must be positive")
    if np.linalg.norm(q0) <= radius_floor:
        raise CollisionError("initial point inside the radius floor")

    def rhs(y):
        try:
            acc = -potentials.potential_gradient(spec, y[:n])
        except SingularityError as exc:
            raise CollisionError(str(exc)) from exc
        return np.concatenate([y[n:], acc])

    y = np.concatenate([q0, v0])
    t = 0.0
    k1 = rhs(y)
    # modest first step; the controller adapts within a few steps
    h = min(1e-3 * T, T)

    times = [0.0]
    states = [y.copy()]
    steps = 0
    rejected = 0
    min_radius_seen = float(np.linalg.norm(q0))
    stages = np.empty((7, 2 * n))

    endgame = 1e-14 * max(T, 1.0)
    while T - t > endgame:
        if steps + rejected >= max_steps:
            raise StepFailureError(f"step budget {max_steps} exhausted at t={t:.6g}")
        if h < endgame:
            # step collapse right above the singular set is a collision in
            # the making, not a generic controller failure
            if float(np.linalg.norm(y[:n])) < 100.0 * radius_floor:
                raise CollisionError(
                    f"step collapse at radius {np.linalg.norm(y[:n]):.3e}, t={t:.6g}"
                )
            raise StepFailureError(f"step size underflow at t={t:.6g}")
        h_step = min(h, T - t)

        stages[0] = k1
        for i in range(1, 7):
            yi = y + h_step * (stages[:i].T @ np.asarray(_DP_A[i]))
            stages[i] = rhs(yi)
        y_new = y + h_step * (stages.T @ _DP_B5)
        err_vec = h_step * (stages.T @ _DP_ERR)
        scale = tol + tol * np.maximum(np.abs(y), np.abs(y_new))
        err = math.sqrt(float(np.mean((err_vec / scale) ** 2)))

        if err <= 1.0:
            t += h_step
            y = y_new
            k1 = stages[6].copy()  # FSAL; copy, the array is reused next attempt
            steps += 1
            radius = float(np.linalg.norm(y[:n]))
            min_radius_seen = min(min_radius_seen, radius)
            times.append(t)
            states.append(y.copy())
            if radius < radius_floor:
                raise CollisionError(
                    f"trajectory radius {radius:.3e} fell below the floor at t={t:.6g}"
                )
        else:
            rejected += 1
        factor = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** (-0.2)))
        h = h_step * factor

    times = np.asarray(times)
    times[-1] = T  # land exactly on T; the residual gap is below roundoff
    return Trajectory(
        times=times,
        states=np.asarray(states),
        stats=IntegratorStats(
            steps=steps, rejected_steps=rejected, min_radius_seen=min_radius_seen
        ),
    )


def ode_residual(problem: EnergyProblem, solution: OrbitSolution, samples: int = 400) -> float:
    """max_t |u''(t/T)/T^2 + grad V(u(t/T))| from exact Fourier derivatives."""
    tau = np.arange(samples) / samples
    u = loops.evaluate(solution.loop, tau)
    acc = loops.derivative(solution.loop, tau, order=2) / solution.period_T**2
    residual = acc + potentials.potential_gradient(problem.spec, u)
    return float(np.max(np.linalg.norm(residual, axis=1)))


def verify_solution(
    problem: EnergyProblem,
    solution: OrbitSolution,
    tolerances: VerifyTolerances | None = None,
) -> VerificationReport:
    """Check energy conservation, return-to-start, and the ODE residual.

    The trajectory is re-integrated from (q0, v0) alone; failure inside the
    integrator yields a failed verdict with the reason recorded.
    """
    tol = tolerances or VerifyTolerances()
    q0 = loops.evaluate(solution.loop, 0.0)
    v0 = loops.derivative(solution.loop, 0.0) / solution.period_T

    residual_ode = ode_residual(problem, solution, tol.ode_samples)
    try:
        traj = integrate_orbit(
            problem.spec,
            q0,
            v0,
            solution.period_T,
            tol=tol.integrator_tol,
            radius_floor=problem.min_radius_floor,
        )
    except (CollisionError, StepFailureError) as exc:
        report = VerificationReport(
            energy_residual=math.inf,
            periodicity_residual=math.inf,
            ode_residual=residual_ode,
            verdict=False,
            reason=f"{type(exc).__name__}: {exc}",
        )
        solution.residuals = report
        return report

    energies = traj.energies(problem.spec)
    energy_residual = float(np.max(np.abs(energies - problem.h)))
    gap = traj.states[-1] - traj.states[0]
    periodicity_residual = float(
        np.linalg.norm(gap[: traj.dim]) + np.linalg.norm(gap[traj.dim :])
    )
    verdict = (
        energy_residual <= tol.energy
        and periodicity_residual <= tol.periodicity
        and residual_ode <= tol.ode
    )
    report = VerificationReport(
        energy_residual=energy_residual,
        periodicity_residual=periodicity_residual,
        ode_residual=residual_ode,
        verdict=bool(verdict),
    )
    solution.residuals = report
    return report


def write_trajectory_csv(traj: Trajectory, spec: PotentialSpec, path) -> None:
    """CSV columns t, q_1..q_n, v_1..v_n, energy."""
    n = traj.dim
    energies = traj.energies(spec)
    header = (
        ["t"]
        + [f"q_{i + 1}" for i in range(n)]
        + [f"v_{i + 1}" for i in range(n)]
        + ["energy"]
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for t, state, energy in zip(traj.times, traj.states, energies):
            writer.writerow(
                [repr(float(t))]
                + [repr(float(v)) for v in state]
                + [repr(float(energy))]
            )
