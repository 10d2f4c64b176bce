"""Minimization of the fixed-energy functionals and the saddle-geometry certificate.

Both minimization routes run preconditioned gradient descent with Armijo
backtracking over antisymmetric loops, stored structurally as odd Fourier
modes so every iterate satisfies u(t + 1/2) = -u(t) exactly.  The diagonal
preconditioner 1/(1 + k^2) per mode is the discrete H^1 metric; trial steps
use a safeguarded Barzilai-Borwein length, backtracking enforces monotone
decrease.  Steps that would push the loop below the singularity radius floor
are rejected inside the line search, never surfaced as a crash.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import functionals, loops, potentials
from .errors import DegenerateCertificateError, NoConvergenceError, SingularityError
from .functionals import EnergyProblem, OrbitSolution
from .loops import FourierLoop

_STEP_FLOOR = 1e-18  # line search gives up below this trial length


@dataclass(frozen=True)
class SolverOptions:
    """Knobs of the descent loop and multistart."""

    max_iters: int = 5000
    grad_tol: float = 1e-8   # on the preconditioned gradient norm
    armijo_c: float = 1e-4
    shrink: float = 0.5
    restarts: int = 8
    rng_seed: int = 0
    max_mode: int = 32       # odd modes up to this order are optimization variables

    def __post_init__(self):
        if self.max_iters < 1 or self.restarts < 1 or self.max_mode < 1:
            raise ValueError("max_iters, restarts and max_mode must be >= 1")
        if self.grad_tol <= 0 or self.armijo_c <= 0 or not 0 < self.shrink < 1:
            raise ValueError("tolerances must be positive, shrink in (0, 1)")


@dataclass
class StartRecord:
    """Outcome of one multistart run."""

    f_value: float
    converged: bool
    iterations: int
    trace: list = field(default_factory=list)  # (iteration, f, precond grad norm)
    floor_rejections: int = 0
    constraint_violation: float = 0.0  # max |g - h| over iterates (F route)

    def to_dict(self) -> dict:
        return {
            "f_value": self.f_value,
            "converged": self.converged,
            "iterations": self.iterations,
            "floor_rejections": self.floor_rejections,
            "constraint_violation": self.constraint_violation,
        }


@dataclass
class MinimizeResult:
    best: OrbitSolution
    all_starts: list
    infimum_estimate: float

    def to_dict(self) -> dict:
        return {
            "best": self.best.to_dict(),
            "starts": [s.to_dict() for s in self.all_starts],
            "infimum_estimate": self.infimum_estimate,
        }


@dataclass(frozen=True)
class SaddleCertificate:
    """Computable level bounds of the linking geometry, on a finite probe family."""

    R: float
    delta: float
    beta: float
    h: float
    m_R: float
    M_R: float
    B_R: float
    lower_S: float
    upper_Q: float
    separated: bool
    probe_count: int
    max_probe_f: float
    max_constant_f: float

    def to_dict(self) -> dict:
        return {
            "R": self.R,
            "delta": self.delta,
            "beta": self.beta,
            "h": self.h,
            "m_R": self.m_R,
            "M_R": self.M_R,
            "B_R": self.B_R,
            "lower_S": self.lower_S,
            "upper_Q": self.upper_Q,
            "separated": self.separated,
            "probe_count": self.probe_count,
            "max_probe_f": self.max_probe_f,
            "max_constant_f": self.max_constant_f,
        }


def _grid_quantities_hi(problem: EnergyProblem, loop: FourierLoop):
    """Kinetic integral and grid radii of a loop in long-double precision."""
    cos_t, sin_t = loops.trig_tables(loop.max_mode, problem.quadrature, extended=True)
    vals = (
        loop.mean.astype(np.longdouble)
        + cos_t @ loop.cos_coeffs.astype(np.longdouble)
        + sin_t @ loop.sin_coeffs.astype(np.longdouble)
    )
    r = np.sqrt(np.sum(vals * vals, axis=1))
    pi_hi = np.arccos(np.longdouble(-1.0))
    k2 = np.arange(1, loop.max_mode + 1, dtype=np.longdouble) ** 2
    kin = (
        2.0
        * pi_hi**2
        * np.sum(
            k2[:, None]
            * (
                loop.cos_coeffs.astype(np.longdouble) ** 2
                + loop.sin_coeffs.astype(np.longdouble) ** 2
            )
        )
    )
    return kin, r


def _f_free_hi(problem: EnergyProblem, loop: FourierLoop):
    kin, r = _grid_quantities_hi(problem, loop)
    pot = np.mean(problem.h - potentials.value_radial(problem.spec, r))
    return 0.5 * kin * pot


def _f_constrained_hi(problem: EnergyProblem, loop: FourierLoop):
    kin, r = _grid_quantities_hi(problem, loop)
    w = np.mean(potentials.vprime_dot_x_radial(problem.spec, r))
    return 0.25 * kin * w


class _OddModeSpace:
    """Flat-vector view of the antisymmetric subspace (odd cos/sin coefficients)."""

    def __init__(self, dim: int, max_mode: int):
        self.dim = dim
        self.max_mode = max_mode
        self.modes = np.arange(1, max_mode + 1, 2)
        n_blocks = self.modes.size * dim
        precond_block = np.repeat(1.0 / (1.0 + self.modes.astype(float) ** 2), dim)
        self.precond = np.concatenate([precond_block, precond_block])
        self.size = 2 * n_blocks

    def pack(self, loop: FourierLoop) -> np.ndarray:
        idx = self.modes - 1
        return np.concatenate(
            [loop.cos_coeffs[idx].ravel(), loop.sin_coeffs[idx].ravel()]
        )

    def unpack(self, x: np.ndarray) -> FourierLoop:
        half = self.size // 2
        cos = np.zeros((self.max_mode, self.dim))
        sin = np.zeros((self.max_mode, self.dim))
        cos[self.modes - 1] = x[:half].reshape(-1, self.dim)
        sin[self.modes - 1] = x[half:].reshape(-1, self.dim)
        return FourierLoop(
            dim=self.dim,
            max_mode=self.max_mode,
            mean=np.zeros(self.dim),
            cos_coeffs=cos,
            sin_coeffs=sin,
        )


def _descend(x0, f_of, grad_of, retract, options: SolverOptions, precond, f_hi_of=None):
    """Monotone preconditioned descent from one start.

    f_of / grad_of work on flat vectors; retract maps a trial point back onto
    the feasible set (identity for the free route).  f_hi_of is the same
    objective evaluated in long-double precision: once the decrease per step
    falls below ulp(float64) the sufficient-decrease test switches to it, so
    backtacking keeps certifying true descent down to the gradient tolerance.
    """
    record = StartRecord(f_value=math.inf, converged=False, iterations=0)
    try:
        x = retract(np.array(x0, dtype=float))
        fx = f_of(x)
    except SingularityError:
        return x0, record
    prev_dx = prev_dg = None
    g = grad_of(x)
    t_accepted = None
    fx_hi = None  # long-double bookkeeping value, set when glide engages

    for it in range(options.max_iters):
        pg = precond * g
        grad_norm = math.sqrt(float(np.dot(g, pg)))
        record.trace.append((it, fx, grad_norm))
        if grad_norm <= options.grad_tol:
            record.f_value, record.converged, record.iterations = fx, True, it
            return x, record

        d = -pg
        slope = float(np.dot(g, d))  # = -<g, Pg> < 0

        accepted = False
        if fx_hi is None:
            # Barzilai-Borwein trial length, safeguarded; fall back to growing
            # the previously accepted step.
            if prev_dx is not None and float(np.dot(prev_dx, prev_dg)) > 0:
                t = float(np.dot(prev_dx, prev_dg) / np.dot(prev_dg, prev_dg))
                t = min(max(t, 1e-10), 1e4)
            elif t_accepted is not None:
                t = 2.0 * t_accepted
            else:
                t = 0.1 * (1.0 + float(np.linalg.norm(x))) / (
                    float(np.linalg.norm(d)) + 1e-300
                )
            while t > _STEP_FLOOR:
                try:
                    x_new = retract(x + t * d)
                    f_new = f_of(x_new)
                except SingularityError:
                    record.floor_rejections += 1
                    t *= options.shrink
                    continue
                # difference form: ties at ulp(f) are rejected, not passed
                if f_new - fx <= options.armijo_c * t * slope:
                    accepted = True
                    break
                t *= options.shrink
            if not accepted and grad_norm <= 1e-3 and f_hi_of is not None:
                fx_hi = f_hi_of(x)  # decrease fell below ulp(float64): engage

        g_new = None
        if not accepted and fx_hi is not None:
            # Near the optimum the quadratic model is reliable: take the Cauchy
            # step of the local model and certify decrease in long double.
            # When even that resolution is exhausted, a step may be accepted on
            # a strict decrease of the (still accurate) gradient norm provided
            # f does not increase beyond long-double noise.
            probe = 1e-5 * (1.0 + float(np.linalg.norm(x)))
            eps = probe / (float(np.linalg.norm(d)) + 1e-300)
            curvature = float(np.dot(grad_of(x + eps * d) - g, d)) / eps
            t = -slope / curvature if curvature > 0 else (t_accepted or 1.0)
            noise = 4.0 * np.finfo(np.longdouble).eps * (1.0 + abs(fx))
            while t > _STEP_FLOOR:
                try:
                    x_new = retract(x + t * d)
                    f_of(x_new)  # enforces the radius floor
                except SingularityError:
                    record.floor_rejections += 1
                    t *= options.shrink
                    continue
                if np.array_equal(x_new, x):
                    break  # below coefficient resolution: no progress left
                f_new_hi = f_hi_of(x_new)
                decrease = f_new_hi - fx_hi
                if decrease <= np.longdouble(options.armijo_c * t * slope):
                    accepted = True
                elif decrease <= noise:
                    g_try = grad_of(x_new)
                    if math.sqrt(float(np.dot(g_try, precond * g_try))) < grad_norm:
                        accepted = True
                        g_new = g_try
                if accepted:
                    fx_hi = min(f_new_hi, fx_hi)
                    f_new = float(fx_hi)
                    break
                t *= options.shrink

        if not accepted:
            break  # no feasible descent step above the floor

        if g_new is None:
            g_new = grad_of(x_new)
        prev_dx, prev_dg = x_new - x, g_new - g
        x, fx, g, t_accepted = x_new, f_new, g_new, t

    record.f_value, record.iterations = fx, len(record.trace)
    return x, record


def _random_start(
    rng: np.random.Generator, dim: int, max_mode: int, radius: float
) -> FourierLoop:
    """Random odd-harmonic loop: a mode-1 circle of given radius plus mode-3 noise."""
    basis = np.linalg.qr(rng.normal(size=(dim, dim)))[0][:, :2]
    phase = rng.uniform(0.0, 2.0 * math.pi)
    d1, d2 = basis[:, 0], basis[:, 1]
    cos = np.zeros((max_mode, dim))
    sin = np.zeros((max_mode, dim))
    cos[0] = radius * (math.cos(phase) * d1 + math.sin(phase) * d2)
    sin[0] = radius * (-math.sin(phase) * d1 + math.cos(phase) * d2)
    if max_mode >= 3:
        cos[2] = 0.05 * radius * rng.normal(size=dim)
        sin[2] = 0.05 * radius * rng.normal(size=dim)
    return FourierLoop(
        dim=dim, max_mode=max_mode, mean=np.zeros(dim), cos_coeffs=cos, sin_coeffs=sin
    )


class _ConstraintTracker:
    """Records the worst |g - h| over the projected iterates of one start."""

    def __init__(self):
        self.max_violation = 0.0

    def reset(self):
        self.max_violation = 0.0

    def observe(self, violation: float):
        self.max_violation = max(self.max_violation, violation)


def _run_starts(problem: EnergyProblem, options: SolverOptions, make_objective):
    """Shared multistart driver.

    make_objective(space) -> (f_of, grad_of, retract, tracker, f_hi_of);
    tracker may be None when there is no constraint to monitor.
    """
    space = _OddModeSpace(problem.dim, options.max_mode)
    f_of, grad_of, retract, tracker, f_hi_of = make_objective(space)

    r_star = functionals.critical_radius(problem)
    base_radius = r_star if r_star is not None else 1.0
    seeds = np.random.SeedSequence(options.rng_seed).spawn(options.restarts)

    records: list[StartRecord] = []
    best_x, best_f = None, math.inf
    for seed in seeds:
        rng = np.random.default_rng(seed)
        radius = base_radius * math.exp(rng.uniform(math.log(0.25), math.log(4.0)))
        x0 = space.pack(_random_start(rng, problem.dim, options.max_mode, radius))
        if tracker is not None:
            tracker.reset()
        x, record = _descend(
            x0, f_of, grad_of, retract, options, space.precond, f_hi_of=f_hi_of
        )
        if tracker is not None:
            record.constraint_violation = tracker.max_violation
        # a minimizer collapsing to a constant is not a solution
        if record.converged and loops.kinetic_integral(space.unpack(x)) < 1e-4:
            record.converged = False
        records.append(record)
        if record.converged and record.f_value < best_f:
            best_x, best_f = x, record.f_value

    if best_x is None:
        raise NoConvergenceError(
            f"no start converged in {options.max_iters} iterations"
        )
    infimum = min(r.f_value for r in records)
    return space.unpack(best_x), best_f, records, infimum


def minimize_free(problem: EnergyProblem, options: SolverOptions) -> MinimizeResult:
    """Minimize the free functional over antisymmetric loops (free route)."""

    def make_objective(space):
        def f_of(x):
            return functionals.f_free(problem, space.unpack(x))

        def grad_of(x):
            return space.pack(functionals.grad_f_free(problem, space.unpack(x)))

        def f_hi_of(x):
            return _f_free_hi(problem, space.unpack(x))

        return f_of, grad_of, (lambda x: x), None, f_hi_of

    best_loop, best_f, records, infimum = _run_starts(problem, options, make_objective)
    period = functionals.period_from_loop(problem, best_loop, mode="free")
    best = functionals.rescale_to_solution(problem, best_loop, period, f_value=best_f)
    return MinimizeResult(best=best, all_starts=records, infimum_estimate=infimum)


def minimize_on_F(problem: EnergyProblem, options: SolverOptions) -> MinimizeResult:
    """Minimize the constrained functional on F (projection-by-scaling route)."""

    def make_objective(space):
        tracker = _ConstraintTracker()

        def f_of(x):
            return functionals.f_constrained(problem, space.unpack(x))

        def grad_of(x):
            loop = space.unpack(x)
            g = space.pack(functionals.grad_f_constrained(problem, loop))
            w = space.pack(functionals.grad_constraint_g(problem, loop))
            pw = space.precond * w
            wpw = float(np.dot(w, pw))
            if wpw > 1e-300:
                g = g - (float(np.dot(g, pw)) / wpw) * w
            return g

        def retract(x):
            projected = functionals.project_to_F(problem, space.unpack(x))
            tracker.observe(abs(functionals.constraint_g(problem, projected) - problem.h))
            return space.pack(projected)

        def f_hi_of(x):
            return _f_constrained_hi(problem, space.unpack(x))

        return f_of, grad_of, retract, tracker, f_hi_of

    best_loop, best_f, records, infimum = _run_starts(problem, options, make_objective)
    period = functionals.period_from_loop(problem, best_loop, mode="constrained")
    best = functionals.rescale_to_solution(problem, best_loop, period, f_value=best_f)
    return MinimizeResult(best=best, all_starts=records, infimum_estimate=infimum)


def _unit_kinetic_loop(
    rng: np.random.Generator, dim: int, max_mode: int
) -> FourierLoop:
    """Random zero-mean loop normalized to unit kinetic integral."""
    cos = rng.normal(size=(max_mode, dim))
    sin = rng.normal(size=(max_mode, dim))
    loop = FourierLoop(
        dim=dim, max_mode=max_mode, mean=np.zeros(dim), cos_coeffs=cos, sin_coeffs=sin
    )
    return loops.scale(loop, 1.0 / math.sqrt(loops.kinetic_integral(loop)))


def saddle_certificate(
    problem: EnergyProblem,
    R: float,
    beta: float,
    probe_count: int = 200,
    constant_count: int = 50,
    probe_modes: int = 8,
    rng_seed: int = 0,
) -> SaddleCertificate:
    """Level bounds separating the sphere S from the cylinder boundary dQ.

    Probes u1 + s*e sample the curved part of dQ (|u1|^2 + s^2 = R^2, e of unit
    kinetic integral and zero mean); constants sample the flat cap.  The
    certificate holds on the probe family, not uniformly.
    """
    if R <= 0 or beta <= 2.0 or problem.h <= 0:
        raise ValueError("certificate needs R > 0, beta > 2 and h > 0")

    rng = np.random.default_rng(rng_seed)
    m_R = math.inf
    max_probe_f = -math.inf
    for _ in range(probe_count):
        e = _unit_kinetic_loop(rng, problem.dim, probe_modes)
        theta = rng.uniform(0.05, 1.0) * 0.5 * math.pi  # keep s > 0
        s = R * math.sin(theta)
        u1_len = R * math.cos(theta)
        direction = rng.normal(size=problem.dim)
        direction /= np.linalg.norm(direction)
        probe = loops.scale(e, s).with_coeffs(mean=u1_len * direction)
        radius = loops.min_radius(probe)
        m_R = min(m_R, radius)
        if radius <= problem.min_radius_floor:
            raise DegenerateCertificateError(
                f"probe loop reached radius {radius:.3e}, below the floor"
            )
        max_probe_f = max(max_probe_f, functionals.f_free(problem, probe))

    M_R = R * (1.0 + 12.0 ** (-0.5))
    shell = np.geomspace(m_R, M_R, 4097)
    B_R = float(np.max(np.abs(potentials.value_radial(problem.spec, shell))))

    upper_Q = 0.5 * problem.h * R**2 + 0.5 * R**2 * B_R
    delta_max = (12.0 ** (-beta / 2.0) * R**2 * (problem.h + B_R)) ** (
        1.0 / (2.0 - beta)
    )
    delta = min(0.5 * R, 0.5 * delta_max)
    lower_S = 0.5 * 12.0 ** (beta / 2.0) * delta ** (2.0 - beta)

    max_constant_f = -math.inf
    for _ in range(constant_count):
        direction = rng.normal(size=problem.dim)
        direction /= np.linalg.norm(direction)
        radius = rng.uniform(0.02, 1.0) * R
        const = FourierLoop.zeros(problem.dim, 1).with_coeffs(mean=radius * direction)
        value = functionals.f_free(problem, const)
        max_constant_f = max(max_constant_f, value)

    bound = upper_Q * (1.0 + 1e-12) + 1e-12
    if max_probe_f > bound or max_constant_f > bound:
        raise AssertionError("direct evaluation exceeded the dQ level bound")

    return SaddleCertificate(
        R=R,
        delta=delta,
        beta=beta,
        h=problem.h,
        m_R=m_R,
        M_R=M_R,
        B_R=B_R,
        lower_S=lower_S,
        upper_Q=upper_Q,
        separated=lower_S > upper_Q,
        probe_count=probe_count,
        max_probe_f=max_probe_f,
        max_constant_f=max_constant_f,
    )
