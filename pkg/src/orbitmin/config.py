"""Run configuration: YAML key-value file, strictly validated.

Unknown keys are rejected and type errors name the offending field, so a
config either parses into a fully-typed RunConfig or fails with exit-worthy
diagnostics.  The only environment override is OUTPUT (output directory).
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import yaml

from .errors import ConfigError
from .functionals import EnergyProblem
from .optimize import SolverOptions
from .potentials import AuditConfig, PotentialSpec
from .verify import VerifyTolerances

ROUTES = ("free", "constrained", "both")


@dataclass(frozen=True)
class RunConfig:
    problem: EnergyProblem
    route: str
    solver: SolverOptions
    audit: AuditConfig
    verify: VerifyTolerances
    output_dir: str


def _type_name(value) -> str:
    return type(value).__name__


def _expect(mapping: dict, path: str, allowed: set) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        name = sorted(unknown)[0]
        where = f"{path}.{name}" if path else name
        raise ConfigError(f"unknown key '{where}'")


def _number(mapping: dict, path: str, key: str, default=None):
    if key not in mapping:
        if default is None:
            raise ConfigError(f"missing required field '{path}{key}'")
        return default
    value = mapping[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(
            f"field '{path}{key}': expected number, got {_type_name(value)} {value!r}"
        )
    return value


def _integer(mapping: dict, path: str, key: str, default=None) -> int:
    value = _number(mapping, path, key, default)
    if int(value) != value:
        raise ConfigError(f"field '{path}{key}': expected integer, got {value!r}")
    return int(value)


def load_config(path: str) -> RunConfig:
    """Parse and validate a solver configuration file."""
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> RunConfig:
    _expect(
        raw,
        "",
        {
            "dim",
            "h",
            "route",
            "modes",
            "quadrature",
            "min_radius_floor",
            "potential",
            "solver",
            "audit",
            "verify",
            "output_dir",
        },
    )

    dim = _integer(raw, "", "dim", 2)
    h = float(_number(raw, "", "h"))

    route = raw.get("route", "free")
    if route not in ROUTES:
        raise ConfigError(f"field 'route': must be one of {ROUTES}, got {route!r}")

    potential = raw.get("potential")
    if not isinstance(potential, dict):
        raise ConfigError("missing or invalid 'potential' section")
    _expect(potential, "potential", {"terms"})
    terms_raw = potential.get("terms")
    if not isinstance(terms_raw, list) or not terms_raw:
        raise ConfigError("field 'potential.terms': expected a nonempty list")
    terms = []
    for i, term in enumerate(terms_raw):
        where = f"potential.terms[{i}]"
        if not isinstance(term, dict):
            raise ConfigError(f"field '{where}': expected a mapping with a, alpha")
        _expect(term, where, {"a", "alpha"})
        terms.append(
            (float(_number(term, where + ".", "a")), float(_number(term, where + ".", "alpha")))
        )
    try:
        spec = PotentialSpec(terms=tuple(terms), dim=dim)
    except ValueError as exc:
        raise ConfigError(f"field 'potential.terms': {exc}") from exc

    modes = _integer(raw, "", "modes", 32)
    quadrature = _integer(raw, "", "quadrature", max(256, 8 * modes))
    floor = float(_number(raw, "", "min_radius_floor", 1e-6))
    try:
        problem = EnergyProblem(
            spec=spec, h=h, dim=dim, quadrature=quadrature, min_radius_floor=floor
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if quadrature < 2 * modes + 1:
        raise ConfigError(
            f"field 'quadrature': {quadrature} is below Nyquist (2*modes+1 = {2 * modes + 1})"
        )

    solver_raw = raw.get("solver", {})
    if not isinstance(solver_raw, dict):
        raise ConfigError("'solver' section must be a mapping")
    _expect(
        solver_raw,
        "solver",
        {"rng_seed", "restarts", "max_iters", "grad_tol", "armijo_c", "shrink"},
    )
    try:
        solver = SolverOptions(
            max_iters=_integer(solver_raw, "solver.", "max_iters", 5000),
            grad_tol=float(_number(solver_raw, "solver.", "grad_tol", 1e-8)),
            armijo_c=float(_number(solver_raw, "solver.", "armijo_c", 1e-4)),
            shrink=float(_number(solver_raw, "solver.", "shrink", 0.5)),
            restarts=_integer(solver_raw, "solver.", "restarts", 8),
            rng_seed=_integer(solver_raw, "solver.", "rng_seed", 0),
            max_mode=modes,
        )
    except ValueError as exc:
        raise ConfigError(f"solver options: {exc}") from exc

    audit_raw = raw.get("audit", {})
    if not isinstance(audit_raw, dict):
        raise ConfigError("'audit' section must be a mapping")
    _expect(
        audit_raw,
        "audit",
        {"mu2", "alpha_target", "beta_target", "r_small", "L0", "rho0", "rng_seed"},
    )
    alphas = [alpha for _, alpha in spec.terms]
    try:
        audit = AuditConfig(
            h=h,
            alpha_target=float(
                _number(audit_raw, "audit.", "alpha_target", max(alphas))
            ),
            beta_target=float(_number(audit_raw, "audit.", "beta_target", min(alphas))),
            mu2=float(_number(audit_raw, "audit.", "mu2", 0.0)),
            r_small=float(_number(audit_raw, "audit.", "r_small", 1.0)),
            L0=float(_number(audit_raw, "audit.", "L0", 1.0)),
            rho0=float(_number(audit_raw, "audit.", "rho0", 0.1)),
            rng_seed=_integer(audit_raw, "audit.", "rng_seed", 0),
        )
    except ValueError as exc:
        raise ConfigError(f"audit options: {exc}") from exc

    verify_raw = raw.get("verify", {})
    if not isinstance(verify_raw, dict):
        raise ConfigError("'verify' section must be a mapping")
    _expect(
        verify_raw,
        "verify",
        {"energy", "periodicity", "ode", "integrator_tol", "ode_samples"},
    )
    verify_tol = VerifyTolerances(
        energy=float(_number(verify_raw, "verify.", "energy", 1e-6)),
        periodicity=float(_number(verify_raw, "verify.", "periodicity", 1e-4)),
        ode=float(_number(verify_raw, "verify.", "ode", 1e-4)),
        integrator_tol=float(_number(verify_raw, "verify.", "integrator_tol", 1e-10)),
        ode_samples=_integer(verify_raw, "verify.", "ode_samples", 400),
    )

    output_dir = raw.get("output_dir", "out")
    if not isinstance(output_dir, str):
        raise ConfigError("field 'output_dir': expected string")
    output_dir = os.environ.get("OUTPUT", output_dir)

    return RunConfig(
        problem=problem,
        route=route,
        solver=solver,
        audit=audit,
        verify=verify_tol,
        output_dir=output_dir,
    )
