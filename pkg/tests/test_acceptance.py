"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines.  Tolerances are pinned here and nowhere else.
"""

import math
import time

import numpy as np
import pytest

from orbitmin import functionals, loops, optimize, potentials, verify
from orbitmin.cli import main
from orbitmin.functionals import EnergyProblem
from orbitmin.optimize import SolverOptions, minimize_free, minimize_on_F
from orbitmin.potentials import AuditConfig, PotentialSpec

from conftest import make_random_loop

F_STAR = 3.0 * math.pi**2
T_STAR = 2.0 * math.pi / math.sqrt(3.0)
SEED = 20240817


def cubic_problem(h=0.5, **kw):
    return EnergyProblem(
        spec=PotentialSpec.homogeneous(a=1.0, alpha=3.0, dim=2), h=h, dim=2, **kw
    )


def report(criterion, ok, detail):
    print(f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def free_run():
    problem = cubic_problem()
    start = time.perf_counter()
    result = minimize_free(problem, SolverOptions(rng_seed=SEED))
    return problem, result, time.perf_counter() - start


@pytest.fixture(scope="module")
def constrained_run():
    problem = cubic_problem()
    return problem, minimize_on_F(problem, SolverOptions(rng_seed=SEED))


def test_criterion_1_circular_orbit_reproduction(free_run):
    problem, result, elapsed = free_run
    # oracle: circular orbit of V = -r^-3 at h = 1/2.  The constraint
    # a(alpha/2 - 1) r^-alpha = h gives r = 1; centripetal balance gives
    # speed sqrt(alpha r^-alpha) = sqrt(3); T = 2 pi r / speed.
    r_oracle = ((3.0 / 2.0 - 1.0) / 0.5) ** (1.0 / 3.0)
    t_oracle = 2.0 * math.pi * r_oracle / math.sqrt(3.0 * r_oracle**-3.0)
    assert r_oracle == 1.0 and abs(t_oracle - T_STAR) < 1e-15

    good = [
        s
        for s in result.all_starts
        if s.converged and abs(s.f_value - F_STAR) <= 1e-4 * F_STAR
    ]
    radius = loops.mean_radius(result.best.loop)
    ok = (
        len(good) >= 6
        and abs(result.best.f_value - F_STAR) <= 1e-4 * F_STAR
        and abs(radius - 1.0) <= 1e-3
        and abs(result.best.period_T - T_STAR) <= 1e-3
        and elapsed <= 30.0
    )
    report(
        1,
        ok,
        f"{len(good)}/8 starts at f*={result.best.f_value:.8f} "
        f"(3pi^2={F_STAR:.8f}), radius {radius:.6f}, T {result.best.period_T:.6f} "
        f"in {elapsed:.2f}s",
    )


def test_criterion_2_route_agreement(free_run, constrained_run):
    problem, free_result, _ = free_run
    _, con_result = constrained_run
    df = abs(free_result.best.f_value - con_result.best.f_value)
    dr = abs(
        loops.mean_radius(free_result.best.loop)
        - loops.mean_radius(con_result.best.loop)
    )
    dT = abs(free_result.best.period_T - con_result.best.period_T)
    # the two period formulas on the F-projected minimizer
    on_f = functionals.project_to_F(problem, con_result.best.loop)
    t_free = functionals.period_from_loop(problem, on_f, "free")
    t_con = functionals.period_from_loop(problem, on_f, "constrained")
    formula_gap = abs(t_free - t_con) / t_con
    ok = df <= 1e-3 and dr <= 1e-3 and dT <= 1e-3 and formula_gap <= 1e-9
    report(
        2,
        ok,
        f"route gaps: f {df:.2e}, radius {dr:.2e}, T {dT:.2e}; "
        f"period formulas rel gap {formula_gap:.2e}",
    )


def test_criterion_3_verification_gate(free_run):
    problem, result, _ = free_run
    rep = verify.verify_solution(
        problem, result.best, verify.VerifyTolerances(ode_samples=400)
    )
    ok = (
        rep.verdict
        and rep.energy_residual <= 1e-6
        and rep.periodicity_residual <= 1e-4
        and rep.ode_residual <= 1e-4
    )
    report(
        3,
        ok,
        f"energy {rep.energy_residual:.2e} <= 1e-6, "
        f"periodicity {rep.periodicity_residual:.2e} <= 1e-4, "
        f"ode {rep.ode_residual:.2e} <= 1e-4",
    )


def test_criterion_4_second_exponent_sweep():
    quartic = EnergyProblem(
        spec=PotentialSpec.homogeneous(a=1.0, alpha=4.0, dim=2), h=1.0, dim=2
    )
    res4 = minimize_free(quartic, SolverOptions(rng_seed=SEED))
    f4 = res4.best.f_value
    r4 = loops.mean_radius(res4.best.loop)

    res34 = minimize_free(cubic_problem(h=4.0), SolverOptions(rng_seed=SEED))
    r34 = loops.mean_radius(res34.best.loop)
    ok = (
        abs(f4 - 4.0 * math.pi**2) <= 1e-3
        and abs(r4 - 1.0) <= 1e-3
        and abs(r34 - 0.5) <= 1e-3
    )
    report(
        4,
        ok,
        f"alpha=4: f*={f4:.8f} (4pi^2={4 * math.pi**2:.8f}), radius {r4:.6f}; "
        f"alpha=3,h=4: radius {r34:.6f}",
    )


def test_criterion_5_gradient_correctness():
    problem = cubic_problem()
    rng = np.random.default_rng(SEED)
    eps = 1e-5
    worst = 0.0
    for _ in range(10):
        base = loops.project_antisymmetric(
            make_random_loop(rng, max_mode=12, scale=0.25)
        )
        circle_part = np.zeros((12, 2))
        circle_sin = np.zeros((12, 2))
        circle_part[0] = [1.1, 0.0]
        circle_sin[0] = [0.0, 1.1]
        loop = base.with_coeffs(
            cos=base.cos_coeffs + circle_part, sin=base.sin_coeffs + circle_sin
        )
        grad = functionals.grad_f_free(problem, loop)
        for _ in range(2):
            direction = make_random_loop(rng, max_mode=12)
            dd = (
                float(np.sum(grad.mean * direction.mean))
                + float(np.sum(grad.cos_coeffs * direction.cos_coeffs))
                + float(np.sum(grad.sin_coeffs * direction.sin_coeffs))
            )
            plus = loop.with_coeffs(
                mean=loop.mean + eps * direction.mean,
                cos=loop.cos_coeffs + eps * direction.cos_coeffs,
                sin=loop.sin_coeffs + eps * direction.sin_coeffs,
            )
            minus = loop.with_coeffs(
                mean=loop.mean - eps * direction.mean,
                cos=loop.cos_coeffs - eps * direction.cos_coeffs,
                sin=loop.sin_coeffs - eps * direction.sin_coeffs,
            )
            fd = (
                functionals.f_free(problem, plus) - functionals.f_free(problem, minus)
            ) / (2.0 * eps)
            worst = max(worst, abs(dd - fd) / max(1.0, abs(fd)))
    ok = worst <= 1e-5
    report(5, ok, f"max relative gradient error {worst:.2e} over 20 directions")


def test_criterion_6_inequality_suite():
    rng = np.random.default_rng(SEED)
    worst_margin = math.inf
    equality_violations = 0
    for _ in range(1000):
        loop = loops.project_zero_mean(
            make_random_loop(rng, dim=int(rng.integers(1, 4)),
                             max_mode=int(rng.integers(1, 10)))
        )
        rep = loops.inequality_report(loop)
        if not (rep.wirtinger_ok and rep.sobolev_ok and rep.poincare_ok):
            worst_margin = -1.0
            break
        worst_margin = min(worst_margin, min(rep.ratios.values()) - 1.0)
        if rep.ratios["wirtinger"] - 1.0 <= 1e-10:
            k2 = np.arange(1, loop.max_mode + 1) ** 2
            energy = k2[:, None] * (loop.cos_coeffs**2 + loop.sin_coeffs**2)
            if energy.sum() > 0 and energy[1:].sum() > 1e-8 * energy.sum():
                equality_violations += 1
    ok = worst_margin >= -1e-10 and equality_violations == 0
    report(
        6,
        ok,
        f"1000 loops: worst ratio slack {worst_margin:.2e}, "
        f"{equality_violations} equality-isolation violations",
    )


def test_criterion_7_saddle_certificate():
    problem = cubic_problem()
    start = time.perf_counter()
    cert = optimize.saddle_certificate(
        problem, R=1.0, beta=3.0, probe_count=200, constant_count=50, rng_seed=SEED
    )
    elapsed = time.perf_counter() - start
    ok = (
        cert.separated
        and cert.M_R == 1.0 + 12.0 ** (-0.5)
        and cert.max_probe_f < cert.lower_S * (1.0 - 1e-6)
        and cert.max_constant_f < cert.lower_S * (1.0 - 1e-6)
        and elapsed <= 10.0
    )
    report(
        7,
        ok,
        f"separated={cert.separated}, M_R exact, probes max {cert.max_probe_f:.3e} "
        f"< lower_S {cert.lower_S:.3e}, in {elapsed:.2f}s",
    )


def test_criterion_8_assumption_audit():
    spec = PotentialSpec.homogeneous(a=1.0, alpha=3.0, dim=2)
    rep = potentials.audit_assumptions(
        spec, AuditConfig(h=0.5, alpha_target=3.0, beta_target=3.0, mu2=0.0)
    )
    ok = (
        all(rep.holds(name) for name in ("A2", "A3", "A4'", "A5'", "P1"))
        and not rep.holds("A5")
        and rep.energy_threshold == 0.0
        and set(rep.applicable_theorems) == {"1.7", "1.8"}
    )
    report(
        8,
        ok,
        "A2/A3/A4'/A5'/P1 hold, A5 fails, threshold 0, theorems {1.7, 1.8}",
    )


def test_criterion_9_singularity_barrier():
    # floor at 0.49 sits just under the r = 0.5 minimizer of alpha=3, h=4;
    # starts sampled below it are rejected at birth, descent steps that dive
    # under it are rejected in the line search, and nothing crashes
    problem = cubic_problem(h=4.0, min_radius_floor=0.49)
    result = minimize_free(problem, SolverOptions(rng_seed=SEED))
    f_star = 2.0 * math.pi**2 * (4.0 * 0.25 + 2.0)
    finite = all(
        math.isfinite(f) for s in result.all_starts for _, f, _ in s.trace
    )
    monotone = True
    for s in result.all_starts:
        fs = np.array([f for _, f, _ in s.trace])
        if fs.size > 1 and np.any(
            np.diff(fs) > 8.0 * np.finfo(float).eps * (1.0 + np.abs(fs[:-1]))
        ):
            monotone = False
    barrier_hit = any(
        (not s.trace) or s.floor_rejections > 0 for s in result.all_starts
    )
    ok = (
        finite
        and monotone
        and barrier_hit
        and abs(result.best.f_value - f_star) <= 1e-4 * f_star
    )
    report(
        9,
        ok,
        f"no crash, traces finite+monotone, barrier engaged "
        f"(rejected starts/steps), f*={result.best.f_value:.6f}",
    )


def test_criterion_10_determinism(tmp_path):
    config = """\
dim: 2
h: 0.5
route: free
modes: 16
output_dir: {out}
potential:
  terms:
    - a: 1.0
      alpha: 3.0
solver:
  rng_seed: 13
  restarts: 3
"""
    runs = []
    for tag in ("a", "b"):
        cfg = tmp_path / f"{tag}.yaml"
        out = tmp_path / f"out_{tag}"
        cfg.write_text(config.format(out=out))
        assert main(["solve", str(cfg)]) == 0
        runs.append((out / "solution.json").read_bytes())
    ok = runs[0] == runs[1]
    report(10, ok, "identical config+seed give byte-identical solution.json")
