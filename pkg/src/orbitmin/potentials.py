"""Attractive singular potentials V(x) = -sum_i a_i |x|^(-alpha_i) and hypothesis audits.

All built-in potentials are radial, so pointwise quantities reduce to scalar
functions of r = |x|.  The audit evaluates the standard hypothesis families on
sampled shells and reports worst margins; it proves nothing off the samples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SingularityError

# Below this radius the potential is considered to have hit the singular set.
RADIUS_GUARD = 1e-300


@dataclass(frozen=True)
class PotentialSpec:
    """V(x) = -sum_i a_i |x|^(-alpha_i) on R^dim minus the origin."""

    terms: tuple  # ((a, alpha), ...); a > 0, alpha > 0
    dim: int

    def __post_init__(self):
        terms = tuple((float(a), float(alpha)) for a, alpha in self.terms)
        if not terms:
            raise ValueError("potential needs at least one term")
        for a, alpha in terms:
            if a <= 0:
                raise ValueError(f"term coefficient must be positive, got {a}")
            if alpha <= 0:
                raise ValueError(f"term exponent must be positive, got {alpha}")
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")
        object.__setattr__(self, "terms", terms)

    @property
    def kind(self) -> str:
        return "homogeneous" if len(self.terms) == 1 else "sum_of_homogeneous"

    @classmethod
    def homogeneous(cls, a: float = 1.0, alpha: float = 3.0, dim: int = 2):
        return cls(terms=((a, alpha),), dim=dim)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "terms": [{"a": a, "alpha": alpha} for a, alpha in self.terms],
            "dim": self.dim,
        }


def _radii(x: np.ndarray) -> np.ndarray:
    r = np.linalg.norm(np.asarray(x, dtype=float), axis=-1)
    if np.any(r < RADIUS_GUARD):
        raise SingularityError("point at (or numerically on) the singular set")
    return r


def _as_float(r):
    """Promote to float64 unless already a float type (long double is kept)."""
    arr = np.asarray(r)
    if arr.dtype == np.longdouble or arr.dtype == np.float64:
        return arr
    return arr.astype(float)


# ---- radial scalar fields ------------------------------------------------


def value_radial(spec: PotentialSpec, r):
    """V on the shell |x| = r."""
    r = _as_float(r)
    return sum(-a * r ** (-alpha) for a, alpha in spec.terms)


def vprime_dot_x_radial(spec: PotentialSpec, r):
    """V'(x).x on the shell |x| = r (equals -alpha V per homogeneous term)."""
    r = _as_float(r)
    return sum(a * alpha * r ** (-alpha) for a, alpha in spec.terms)


def hessian_quadratic_radial(spec: PotentialSpec, r):
    """(V''(x) x, x) on the shell |x| = r."""
    r = _as_float(r)
    return sum(-a * alpha * (alpha + 1.0) * r ** (-alpha) for a, alpha in spec.terms)


def gradient_norm_radial(spec: PotentialSpec, r):
    """|grad V| on the shell |x| = r."""
    r = _as_float(r)
    return sum(a * alpha * r ** (-alpha - 1.0) for a, alpha in spec.terms)


def gradient_scale(spec: PotentialSpec, r):
    """s(r) with grad V(x) = s(|x|) x."""
    r = _as_float(r)
    return sum(a * alpha * r ** (-alpha - 2.0) for a, alpha in spec.terms)


def vprime_dot_x_gradient_scale(spec: PotentialSpec, r):
    """c(r) with grad(V'(x).x) = c(|x|) x."""
    r = _as_float(r)
    return sum(-a * alpha**2 * r ** (-alpha - 2.0) for a, alpha in spec.terms)


def constraint_density_radial(spec: PotentialSpec, r):
    """V + (1/2) V'(x).x on the shell |x| = r."""
    r = _as_float(r)
    return sum(a * (0.5 * alpha - 1.0) * r ** (-alpha) for a, alpha in spec.terms)


def constraint_density_gradient_scale(spec: PotentialSpec, r):
    """c(r) with grad(V + (1/2) V'(x).x) = c(|x|) x."""
    r = _as_float(r)
    return sum(
        a * alpha * (1.0 - 0.5 * alpha) * r ** (-alpha - 2.0) for a, alpha in spec.terms
    )


# ---- pointwise API -------------------------------------------------------


def potential_value(spec: PotentialSpec, x):
    """V at a point (or array of points); raises SingularityError at the origin."""
    return value_radial(spec, _radii(x))


def potential_gradient(spec: PotentialSpec, x):
    x = np.asarray(x, dtype=float)
    r = _radii(x)
    return np.asarray(gradient_scale(spec, r))[..., None] * x


def vprime_dot_x(spec: PotentialSpec, x):
    return vprime_dot_x_radial(spec, _radii(x))


def radial_euler_quantities(spec: PotentialSpec, r: float) -> dict:
    """{V, VdotU, Vpp} at |x| = r: value, V'(x).x, and (V''(x)x, x)."""
    if r <= 0:
        raise ValueError("radius must be positive")
    return {
        "V": float(value_radial(spec, r)),
        "VdotU": float(vprime_dot_x_radial(spec, r)),
        "Vpp": float(hessian_quadratic_radial(spec, r)),
    }


# ---- assumption audit ----------------------------------------------------


def _default_radii() -> np.ndarray:
    r = np.geomspace(1e-3, 1e3, 61)
    r.setflags(write=False)
    return r


@dataclass(frozen=True)
class AuditConfig:
    """Sampling plan and constants for the hypothesis audit."""

    h: float
    radii: np.ndarray = field(default_factory=_default_radii)
    alpha_target: float | None = None  # default: max exponent of the spec
    beta_target: float | None = None   # default: min exponent of the spec
    mu2: float = 0.0
    r_small: float = 1.0       # shell bound for (A4)
    L0: float = 1.0            # (B2)/(B3) use radii e^{+-L0}
    rho0: float = 0.1          # (B3') shell bound
    grad_tol_infinity: float = 1e-6  # |grad V| threshold for the limit checks
    directions_per_shell: int = 4
    rng_seed: int = 0

    def __post_init__(self):
        radii = np.array(self.radii, dtype=float)
        if radii.ndim != 1 or radii.size < 2:
            raise ValueError("radii must be a 1-D array with at least two entries")
        if np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
            raise ValueError("radii must be strictly positive and increasing")
        if self.mu2 < 0:
            raise ValueError("mu2 must be nonnegative")
        radii.setflags(write=False)
        object.__setattr__(self, "radii", radii)


@dataclass(frozen=True)
class HypothesisVerdict:
    holds_on_samples: bool
    worst_margin: float
    worst_radius: float

    def to_dict(self) -> dict:
        return {
            "holds_on_samples": self.holds_on_samples,
            "worst_margin": self.worst_margin,
            "worst_radius": self.worst_radius,
        }


@dataclass(frozen=True)
class AuditReport:
    verdicts: dict  # hypothesis name -> HypothesisVerdict
    energy_threshold: float  # mu2 / alpha_target
    applicable_theorems: tuple  # subset of ("1.7", "1.8")

    def holds(self, name: str) -> bool:
        return self.verdicts[name].holds_on_samples

    def to_dict(self) -> dict:
        return {
            "verdicts": {k: v.to_dict() for k, v in self.verdicts.items()},
            "energy_threshold": self.energy_threshold,
            "applicable_theorems": list(self.applicable_theorems),
        }


def _sign_verdict(
    margins: np.ndarray, radii: np.ndarray, strict: bool, tol: np.ndarray | float = 0.0
) -> HypothesisVerdict:
    """Verdict for 'margin >= 0 at every sample' (or > 0 when strict)."""
    i = int(np.argmin(margins))
    worst = float(margins[i])
    tol_i = float(np.asarray(tol)[i]) if np.ndim(tol) else float(tol)
    holds = worst > 0.0 if strict else worst >= -tol_i
    return HypothesisVerdict(
        holds_on_samples=bool(holds), worst_margin=worst, worst_radius=float(radii[i])
    )


def _limit_verdict(spec: PotentialSpec, cfg: AuditConfig) -> HypothesisVerdict:
    """|grad V| -> 0 at infinity: threshold at the largest radii plus a decay fit."""
    tail = cfg.radii[-5:]
    g = np.asarray(gradient_norm_radial(spec, tail))
    slope = float(np.polyfit(np.log(tail), np.log(np.maximum(g, 1e-300)), 1)[0])
    ok = g[-1] <= cfg.grad_tol_infinity and slope < 0.0
    return HypothesisVerdict(
        holds_on_samples=bool(ok),
        worst_margin=float(cfg.grad_tol_infinity - g[-1]),
        worst_radius=float(tail[-1]),
    )


def audit_assumptions(spec: PotentialSpec, cfg: AuditConfig) -> AuditReport:
    """Evaluate the hypothesis families on sampled shells.

    Every verdict is "on samples": a reported pass is evidence, not a proof.
    Margins are signed so that nonnegative means the sampled inequality holds.
    """
    rs = cfg.radii
    alphas = [alpha for _, alpha in spec.terms]
    alpha_t = cfg.alpha_target if cfg.alpha_target is not None else max(alphas)
    beta_t = cfg.beta_target if cfg.beta_target is not None else min(alphas)

    v = np.asarray(value_radial(spec, rs))
    w = np.asarray(vprime_dot_x_radial(spec, rs))  # V'(x).x
    hq = np.asarray(hessian_quadratic_radial(spec, rs))

    # float-noise allowance for inequalities that hold with equality
    tol = 1e-9 * (1.0 + np.abs(w) + np.abs(alpha_t * v))

    verdicts: dict[str, HypothesisVerdict] = {}

    # (A1): 3 V'.x + (V''x, x) != 0, checked as a relative nondegeneracy
    combo = 3.0 * w + hq
    rel = np.abs(combo) / (np.abs(3.0 * w) + np.abs(hq) + 1e-300)
    i = int(np.argmin(rel))
    verdicts["A1"] = HypothesisVerdict(
        holds_on_samples=bool(rel[i] > 1e-8),
        worst_margin=float(rel[i]),
        worst_radius=float(rs[i]),
    )

    # (A2): V'.x > 0 (strict)
    verdicts["A2"] = _sign_verdict(w, rs, strict=True)

    # (A3): exists alpha > 2 with V'.x <= -alpha V + mu2; alpha_target is the
    # witness, so a target at or below 2 cannot satisfy the hypothesis
    if alpha_t <= 2.0:
        verdicts["A3"] = HypothesisVerdict(False, alpha_t - 2.0, math.nan)
    else:
        verdicts["A3"] = _sign_verdict((-alpha_t * v + cfg.mu2) - w, rs, False, tol)

    # (A4): exists beta > 2 with V'.x >= -beta V on 0 < |x| < r_small;
    # (A4)': the same on all radii.  beta_target is the witness.
    if beta_t <= 2.0:
        verdicts["A4"] = HypothesisVerdict(False, beta_t - 2.0, math.nan)
        verdicts["A4'"] = HypothesisVerdict(False, beta_t - 2.0, math.nan)
    else:
        near = rs < cfg.r_small
        if np.any(near):
            verdicts["A4"] = _sign_verdict(
                (w + beta_t * v)[near], rs[near], False, tol[near]
            )
        else:
            verdicts["A4"] = HypothesisVerdict(False, -math.inf, math.nan)
        verdicts["A4'"] = _sign_verdict(w + beta_t * v, rs, False, tol)

    # (A5): V + (1/2) V'.x <= 0
    verdicts["A5"] = _sign_verdict(-(v + 0.5 * w), rs, False, tol)

    # (A5)': V(-x) = V(x), sampled over random directions per shell
    rng = np.random.default_rng(cfg.rng_seed)
    dirs = rng.normal(size=(cfg.directions_per_shell, spec.dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    pts = rs[:, None, None] * dirs[None, :, :]
    diff = np.abs(potential_value(spec, pts) - potential_value(spec, -pts))
    rel_diff = (diff / (1.0 + np.abs(v)[:, None])).max(axis=1)
    j = int(np.argmax(rel_diff))
    verdicts["A5'"] = HypothesisVerdict(
        holds_on_samples=bool(rel_diff[j] <= 1e-12),
        worst_margin=float(-rel_diff[j]),
        worst_radius=float(rs[j]),
    )

    # (P1) and (B2'): V' -> 0 at infinity
    verdicts["P1"] = _limit_verdict(spec, cfg)
    verdicts["B2'"] = verdicts["P1"]

    # (B1): V <= 0
    verdicts["B1"] = _sign_verdict(-v, rs, False, tol)

    # (B2)/(B3)/(B3'): constraint density against h on outer/inner shells
    dens = v + 0.5 * w
    outer = rs >= math.exp(cfg.L0)
    inner = rs <= math.exp(-cfg.L0)
    small = rs <= cfg.rho0
    for name, mask, margin in (
        ("B2", outer, cfg.h - dens),
        ("B3", inner, dens - cfg.h),
        ("B3'", small, dens - cfg.h),
    ):
        if np.any(mask):
            verdicts[name] = _sign_verdict(margin[mask], rs[mask], False, tol[mask])
        else:
            verdicts[name] = HypothesisVerdict(False, -math.inf, math.nan)

    # Strong force: beta >= 2 plus -V(x) |x|^2 bounded away from 0 near the origin
    # (Gordon's function U = ln|x|, |U'|^2 = |x|^-2)
    if beta_t < 2.0:
        verdicts["strong_force"] = HypothesisVerdict(
            holds_on_samples=False, worst_margin=beta_t - 2.0, worst_radius=math.nan
        )
    else:
        near_zero = rs <= 1.0
        sf = (-v * rs**2)[near_zero]
        verdicts["strong_force"] = _sign_verdict(sf, rs[near_zero], strict=True)

    threshold = cfg.mu2 / alpha_t
    applicable = []
    if (
        all(verdicts[k].holds_on_samples for k in ("A1", "A2", "A3", "A4'", "A5'"))
        and cfg.h > threshold
    ):
        applicable.append("1.7")
    if (
        all(verdicts[k].holds_on_samples for k in ("P1", "A3", "A4"))
        and cfg.h > threshold
    ):
        applicable.append("1.8")

    return AuditReport(
        verdicts=verdicts,
        energy_threshold=threshold,
        applicable_theorems=tuple(applicable),
    )
