"""Batch front end: audit -> solve -> verify -> emit, plus the certificate calculator.

Exit codes are the machine contract: 0 success, 1 negative verdict,
2 no optimizer convergence, 3 configuration or usage error.  All JSON
artifacts carry the package version; CSV artifacts are plot-ready.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys

import numpy as np

from . import __version__, functionals, loops, optimize, potentials, verify
from .config import RunConfig, load_config
from .errors import (
    ConfigError,
    DegenerateCertificateError,
    NoConvergenceError,
    OrbitminError,
)
from .functionals import EnergyProblem, OrbitSolution
from .loops import FourierLoop
from .potentials import PotentialSpec

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_NO_CONVERGENCE = 2
EXIT_CONFIG = 3


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _write_json(payload: dict, path: str) -> None:
    payload = dict(payload)
    payload["version"] = __version__
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_orbit_csv(solution: OrbitSolution, spec: PotentialSpec, path: str) -> None:
    """Physical samples q(t) = u(t/T): columns t, q, qdot, energy."""
    m = solution.physical_samples.num_nodes
    tau = np.arange(m) / m
    q = solution.physical_samples.nodes
    v = loops.derivative(solution.loop, tau) / solution.period_T
    energy = 0.5 * np.sum(v * v, axis=1) + potentials.potential_value(spec, q)
    n = solution.physical_samples.dim
    header = (
        ["t"]
        + [f"q_{i + 1}" for i in range(n)]
        + [f"v_{i + 1}" for i in range(n)]
        + ["energy"]
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for j in range(m):
            row = [tau[j] * solution.period_T, *q[j], *v[j], energy[j]]
            writer.writerow([repr(float(value)) for value in row])


def _write_trace_csv(results: dict, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["route", "start", "iteration", "f", "grad_norm"])
        for route, result in results.items():
            for idx, record in enumerate(result.all_starts):
                for iteration, fval, gnorm in record.trace:
                    writer.writerow([route, idx, iteration, repr(fval), repr(gnorm)])


def _gate_energy_threshold(cfg: RunConfig) -> str | None:
    alphas = [alpha for _, alpha in cfg.problem.spec.terms]
    alpha_t = (
        cfg.audit.alpha_target if cfg.audit.alpha_target is not None else max(alphas)
    )
    threshold = cfg.audit.mu2 / alpha_t
    if not cfg.problem.h > threshold:
        return (
            f"energy h = {cfg.problem.h} violates the threshold h > mu2/alpha "
            f"= {threshold} (mu2 = {cfg.audit.mu2}, alpha = {alpha_t})"
        )
    return None


def cmd_solve(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        return _fail(str(exc), EXIT_CONFIG)

    message = _gate_energy_threshold(cfg)
    if message is not None:
        return _fail(message, EXIT_CONFIG)

    routes = ["free", "constrained"] if cfg.route == "both" else [cfg.route]
    results = {}
    try:
        for route in routes:
            if route == "free":
                results[route] = optimize.minimize_free(cfg.problem, cfg.solver)
            else:
                results[route] = optimize.minimize_on_F(cfg.problem, cfg.solver)
    except NoConvergenceError as exc:
        return _fail(str(exc), EXIT_NO_CONVERGENCE)
    except OrbitminError as exc:
        return _fail(str(exc), EXIT_FAIL)

    os.makedirs(cfg.output_dir, exist_ok=True)
    reports = {}
    for route, result in results.items():
        reports[route] = verify.verify_solution(cfg.problem, result.best, cfg.verify)

    _write_json(
        {
            "problem": {
                "potential": cfg.problem.spec.to_dict(),
                "h": cfg.problem.h,
                "dim": cfg.problem.dim,
                "quadrature": cfg.problem.quadrature,
                "min_radius_floor": cfg.problem.min_radius_floor,
            },
            "routes": {route: result.to_dict() for route, result in results.items()},
        },
        os.path.join(cfg.output_dir, "solution.json"),
    )
    primary = results[routes[0]].best
    _write_orbit_csv(
        primary, cfg.problem.spec, os.path.join(cfg.output_dir, "orbit.csv")
    )
    _write_trace_csv(results, os.path.join(cfg.output_dir, "trace.csv"))
    _write_json(
        {"routes": {route: report.to_dict() for route, report in reports.items()}},
        os.path.join(cfg.output_dir, "verification.json"),
    )

    for route, result in results.items():
        report = reports[route]
        print(
            f"{route}: f = {result.best.f_value:.9g}, T = {result.best.period_T:.9g}, "
            f"verified = {report.verdict}"
        )
    return EXIT_OK if all(r.verdict for r in reports.values()) else EXIT_FAIL


def cmd_audit(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        return _fail(str(exc), EXIT_CONFIG)
    report = potentials.audit_assumptions(cfg.problem.spec, cfg.audit)
    os.makedirs(cfg.output_dir, exist_ok=True)
    _write_json(report.to_dict(), os.path.join(cfg.output_dir, "audit.json"))
    for name, verdict in report.verdicts.items():
        print(f"{name}: {'holds' if verdict.holds_on_samples else 'FAILS'} "
              f"(worst margin {verdict.worst_margin:.3g})")
    print(f"energy threshold mu2/alpha = {report.energy_threshold}")
    print(f"applicable theorems: {list(report.applicable_theorems) or 'none'}")
    return EXIT_OK if report.applicable_theorems else EXIT_FAIL


def cmd_certificate(args) -> int:
    if args.config is not None:
        try:
            cfg = load_config(args.config)
        except ConfigError as exc:
            return _fail(str(exc), EXIT_CONFIG)
        problem, out_dir = cfg.problem, cfg.output_dir
        if args.h is not None:
            problem = dataclasses.replace(problem, h=args.h)
    else:
        try:
            spec = PotentialSpec(terms=((args.a, args.alpha),), dim=args.dim)
            problem = EnergyProblem(spec=spec, h=args.h, dim=args.dim)
        except ValueError as exc:
            return _fail(str(exc), EXIT_CONFIG)
        out_dir = args.out

    if args.beta <= 2.0 or args.R <= 0 or problem.h <= 0:
        return _fail(
            f"certificate needs beta > 2, R > 0, h > 0 "
            f"(got beta={args.beta}, R={args.R}, h={problem.h})",
            EXIT_CONFIG,
        )
    try:
        cert = optimize.saddle_certificate(
            problem,
            R=args.R,
            beta=args.beta,
            probe_count=args.probes,
            rng_seed=args.seed,
        )
    except DegenerateCertificateError as exc:
        return _fail(str(exc), EXIT_FAIL)
    os.makedirs(out_dir, exist_ok=True)
    _write_json(cert.to_dict(), os.path.join(out_dir, "certificate.json"))
    print(
        f"lower_S = {cert.lower_S:.6g}, upper_Q = {cert.upper_Q:.6g}, "
        f"separated = {cert.separated}"
    )
    return EXIT_OK if cert.separated else EXIT_FAIL


def cmd_verify(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        return _fail(str(exc), EXIT_CONFIG)
    try:
        with open(args.orbit) as fh:
            payload = json.load(fh)
    except FileNotFoundError:
        return _fail(f"orbit file not found: {args.orbit}", EXIT_CONFIG)
    except json.JSONDecodeError as exc:
        return _fail(f"orbit file is not valid JSON: {exc}", EXIT_CONFIG)

    try:
        routes = payload.get("routes", {"orbit": payload})
        route = args.route or next(iter(routes))
        entry = routes[route]
        best = entry.get("best", entry)
        loop = FourierLoop.from_dict(best["loop"])
        period = float(best["period_T"])
        f_value = float(best["f_value"])
    except (KeyError, TypeError, ValueError) as exc:
        return _fail(f"orbit file missing fields: {exc}", EXIT_CONFIG)

    solution = functionals.rescale_to_solution(cfg.problem, loop, period, f_value)
    report = verify.verify_solution(cfg.problem, solution, cfg.verify)
    os.makedirs(cfg.output_dir, exist_ok=True)
    _write_json(
        {"route": route, "report": report.to_dict()},
        os.path.join(cfg.output_dir, "verification.json"),
    )
    try:
        traj = verify.integrate_orbit(
            cfg.problem.spec,
            solution.q0,
            solution.v0,
            period,
            tol=cfg.verify.integrator_tol,
            radius_floor=cfg.problem.min_radius_floor,
        )
        verify.write_trajectory_csv(
            traj, cfg.problem.spec, os.path.join(cfg.output_dir, "trajectory.csv")
        )
    except OrbitminError:
        pass  # verdict already records the failure
    print(
        f"verdict = {report.verdict} (energy {report.energy_residual:.3g}, "
        f"periodicity {report.periodicity_residual:.3g}, ode {report.ode_residual:.3g})"
    )
    return EXIT_OK if report.verdict else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orbitmin",
        description=(
            "Variational solver for fixed-energy periodic orbits of singular "
            "Hamiltonian systems: solve minimizes the fixed-energy loop "
            "functionals, audit checks the hypothesis families, certificate "
            "computes the saddle-geometry level bounds, verify re-integrates "
            "a solution.  Config defaults: dim 2, route free, modes 32, "
            "quadrature max(256, 8*modes), min_radius_floor 1e-6; solver "
            "defaults: restarts 8, max_iters 5000, grad_tol 1e-8, rng_seed 0; "
            "audit defaults: mu2 0, alpha_target max(alpha), beta_target "
            "min(alpha), r_small 1, L0 1, rho0 0.1; verify defaults: energy "
            "1e-6, periodicity 1e-4, ode 1e-4, integrator_tol 1e-10, 400 "
            "samples.  The OUTPUT environment variable overrides output_dir."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve a config and emit artifacts")
    p_solve.add_argument("config", help="path to the YAML run configuration")
    p_solve.set_defaults(func=cmd_solve)

    p_audit = sub.add_parser("audit", help="audit the hypothesis families")
    p_audit.add_argument("config", help="path to the YAML run configuration")
    p_audit.set_defaults(func=cmd_audit)

    p_cert = sub.add_parser("certificate", help="saddle-geometry level bounds")
    p_cert.add_argument("--h", type=float, default=None, help="energy level")
    p_cert.add_argument("--R", type=float, required=True, help="cylinder radius")
    p_cert.add_argument("--beta", type=float, required=True, help="exponent > 2")
    p_cert.add_argument("--probes", type=int, default=200, help="probe loop count")
    p_cert.add_argument("--seed", type=int, default=0, help="probe sampling seed")
    p_cert.add_argument("--config", default=None, help="optional run config")
    p_cert.add_argument("--a", type=float, default=1.0, help="potential coefficient")
    p_cert.add_argument("--alpha", type=float, default=3.0, help="potential exponent")
    p_cert.add_argument("--dim", type=int, default=2, help="ambient dimension")
    p_cert.add_argument("--out", default="out", help="output directory")
    p_cert.set_defaults(func=cmd_certificate)

    p_verify = sub.add_parser("verify", help="re-integrate and check a solution")
    p_verify.add_argument("--orbit", required=True, help="solution.json to verify")
    p_verify.add_argument("--config", required=True, help="run configuration")
    p_verify.add_argument("--route", default=None, help="route entry to verify")
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "certificate" and args.config is None and args.h is None:
        return _fail("certificate needs --h (or --config)", EXIT_CONFIG)
    try:
        return args.func(args)
    except OrbitminError as exc:
        return _fail(str(exc), EXIT_FAIL)


if __name__ == "__main__":
    sys.exit(main())
