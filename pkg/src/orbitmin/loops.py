"""Periodic loops as finite trigonometric series.

A loop u: R/Z -> R^n is stored as mean + sum_k (a_k cos 2*pi*k*t + b_k sin 2*pi*k*t).
Energy-type integrals reduce to Parseval sums; everything else uses trapezoidal
quadrature on uniform nodes, which is spectrally exact for trigonometric
polynomials of degree below the node count.

Loops are immutable values and every operation here is a pure function.
"""
from __future__ import annotations

import csv
import functools
import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _readonly(arr, shape) -> np.ndarray:
    out = np.array(arr, dtype=float).reshape(shape)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class FourierLoop:
    """Closed loop in R^n with trigonometric modes 1..max_mode plus a mean."""

    dim: int
    max_mode: int
    mean: np.ndarray        # (dim,)
    cos_coeffs: np.ndarray  # (max_mode, dim); row k-1 multiplies cos(2 pi k t)
    sin_coeffs: np.ndarray  # (max_mode, dim)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")
        if self.max_mode < 1:
            raise ValueError("max_mode must be a positive integer")
        object.__setattr__(self, "mean", _readonly(self.mean, (self.dim,)))
        object.__setattr__(
            self, "cos_coeffs", _readonly(self.cos_coeffs, (self.max_mode, self.dim))
        )
        object.__setattr__(
            self, "sin_coeffs", _readonly(self.sin_coeffs, (self.max_mode, self.dim))
        )

    @classmethod
    def zeros(cls, dim: int, max_mode: int) -> "FourierLoop":
        return cls(
            dim=dim,
            max_mode=max_mode,
            mean=np.zeros(dim),
            cos_coeffs=np.zeros((max_mode, dim)),
            sin_coeffs=np.zeros((max_mode, dim)),
        )

    def with_coeffs(self, mean=None, cos=None, sin=None) -> "FourierLoop":
        """Copy with selected coefficient blocks replaced."""
        return FourierLoop(
            dim=self.dim,
            max_mode=self.max_mode,
            mean=self.mean if mean is None else mean,
            cos_coeffs=self.cos_coeffs if cos is None else cos,
            sin_coeffs=self.sin_coeffs if sin is None else sin,
        )

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "max_mode": self.max_mode,
            "mean": self.mean.tolist(),
            "cos": self.cos_coeffs.tolist(),
            "sin": self.sin_coeffs.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FourierLoop":
        return cls(
            dim=int(d["dim"]),
            max_mode=int(d["max_mode"]),
            mean=np.asarray(d["mean"], dtype=float),
            cos_coeffs=np.asarray(d["cos"], dtype=float),
            sin_coeffs=np.asarray(d["sin"], dtype=float),
        )


@dataclass(frozen=True)
class GridLoop:
    """Uniform samples u(j/M) of a closed loop."""

    dim: int
    nodes: np.ndarray  # (M, dim)

    def __post_init__(self):
        arr = np.array(self.nodes, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != self.dim:
            raise ValueError("nodes must have shape (M, dim)")
        arr.setflags(write=False)
        object.__setattr__(self, "nodes", arr)

    @property
    def num_nodes(self) -> int:
        return self.nodes.shape[0]


@dataclass(frozen=True)
class InequalityReport:
    """Result of the Wirtinger / Sobolev / Poincare checks on one loop."""

    kinetic: float
    l2: float
    sup_norm: float
    wirtinger_ok: bool
    sobolev_ok: bool
    poincare_ok: bool
    ratios: dict  # keys: wirtinger, sobolev, poincare


@functools.lru_cache(maxsize=64)
def trig_tables(max_mode: int, num_nodes: int, extended: bool = False):
    """cos/sin tables on the uniform grid, shape (num_nodes, max_mode), cached.

    With extended=True the tables are built in long-double precision, for
    consumers that must resolve objective differences below ulp(float64).
    """
    if extended:
        two_pi = 2.0 * np.arccos(np.longdouble(-1.0))
        t = np.arange(num_nodes, dtype=np.longdouble) / np.longdouble(num_nodes)
    else:
        two_pi = TWO_PI
        t = np.arange(num_nodes) / num_nodes
    k = np.arange(1, max_mode + 1)
    ang = two_pi * np.outer(t, k)
    cos_t = np.cos(ang)
    sin_t = np.sin(ang)
    cos_t.setflags(write=False)
    sin_t.setflags(write=False)
    return cos_t, sin_t


def evaluate(loop: FourierLoop, t) -> np.ndarray:
    """Evaluate u(t); t may be a scalar or an array, result has shape t.shape + (dim,)."""
    t_arr = np.asarray(t, dtype=float)
    k = np.arange(1, loop.max_mode + 1)
    ang = TWO_PI * np.multiply.outer(t_arr, k)
    return loop.mean + np.cos(ang) @ loop.cos_coeffs + np.sin(ang) @ loop.sin_coeffs


def derivative(loop: FourierLoop, t, order: int = 1) -> np.ndarray:
    """Analytic derivative d^order u / dt^order at t (order 1 or 2)."""
    t_arr = np.asarray(t, dtype=float)
    k = np.arange(1, loop.max_mode + 1)
    ang = TWO_PI * np.multiply.outer(t_arr, k)
    w = (TWO_PI * k)[:, None]
    if order == 1:
        return np.cos(ang) @ (w * loop.sin_coeffs) - np.sin(ang) @ (w * loop.cos_coeffs)
    if order == 2:
        return -np.cos(ang) @ (w**2 * loop.cos_coeffs) - np.sin(ang) @ (
            w**2 * loop.sin_coeffs
        )
    raise ValueError("order must be 1 or 2")


def evaluate_grid(loop: FourierLoop, num_nodes: int) -> np.ndarray:
    """u on the uniform grid j/num_nodes, shape (num_nodes, dim)."""
    cos_t, sin_t = trig_tables(loop.max_mode, num_nodes)
    return loop.mean + cos_t @ loop.cos_coeffs + sin_t @ loop.sin_coeffs


def derivative_grid(loop: FourierLoop, num_nodes: int) -> np.ndarray:
    cos_t, sin_t = trig_tables(loop.max_mode, num_nodes)
    w = (TWO_PI * np.arange(1, loop.max_mode + 1))[:, None]
    return cos_t @ (w * loop.sin_coeffs) - sin_t @ (w * loop.cos_coeffs)


def to_grid(loop: FourierLoop, num_nodes: int) -> GridLoop:
    return GridLoop(dim=loop.dim, nodes=evaluate_grid(loop, num_nodes))


def from_grid(grid: GridLoop, max_mode: int | None = None) -> FourierLoop:
    """Recover coefficients from uniform samples; exact when M >= 2*max_mode + 1."""
    m = grid.num_nodes
    if max_mode is None:
        max_mode = (m - 1) // 2
    if m < 2 * max_mode + 1:
        raise ValueError(f"need at least {2 * max_mode + 1} nodes for {max_mode} modes")
    spectrum = np.fft.rfft(grid.nodes, axis=0)
    mean = spectrum[0].real / m
    cos_c = 2.0 * spectrum[1 : max_mode + 1].real / m
    sin_c = -2.0 * spectrum[1 : max_mode + 1].imag / m
    return FourierLoop(
        dim=grid.dim, max_mode=max_mode, mean=mean, cos_coeffs=cos_c, sin_coeffs=sin_c
    )


def kinetic_integral(loop: FourierLoop) -> float:
    """Integral of |u'|^2 over one period, exact via Parseval."""
    k2 = np.arange(1, loop.max_mode + 1, dtype=float) ** 2
    return float(
        2.0
        * math.pi**2
        * np.sum(k2[:, None] * (loop.cos_coeffs**2 + loop.sin_coeffs**2))
    )


def l2_integral(loop: FourierLoop) -> float:
    """Integral of |u|^2 over one period, exact via Parseval."""
    return float(
        np.dot(loop.mean, loop.mean)
        + 0.5 * np.sum(loop.cos_coeffs**2 + loop.sin_coeffs**2)
    )


def h1_norm(loop: FourierLoop) -> float:
    """(integral |u'|^2)^(1/2) + |u(0)|."""
    return math.sqrt(kinetic_integral(loop)) + float(
        np.linalg.norm(evaluate(loop, 0.0))
    )


def scale(loop: FourierLoop, factor: float) -> FourierLoop:
    return loop.with_coeffs(
        mean=factor * loop.mean,
        cos=factor * loop.cos_coeffs,
        sin=factor * loop.sin_coeffs,
    )


def project_antisymmetric(loop: FourierLoop) -> FourierLoop:
    """L^2 projection onto loops with u(t + 1/2) = -u(t): keep odd modes only."""
    keep = (np.arange(1, loop.max_mode + 1) % 2 == 1)[:, None]
    return loop.with_coeffs(
        mean=np.zeros(loop.dim),
        cos=np.where(keep, loop.cos_coeffs, 0.0),
        sin=np.where(keep, loop.sin_coeffs, 0.0),
    )


def project_zero_mean(loop: FourierLoop) -> FourierLoop:
    return loop.with_coeffs(mean=np.zeros(loop.dim))


def refined_nodes(max_mode: int) -> int:
    """Scan grid size: at least 8x the Nyquist node count 2K+1."""
    return max(256, 8 * (2 * max_mode + 1))


def _golden_section(fun, lo: float, hi: float, iters: int = 80) -> float:
    """Argmin of a unimodal scalar function on [lo, hi]."""
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = fun(x1), fun(x2)
    for _ in range(iters):
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = fun(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = fun(x2)
    return x1 if f1 <= f2 else x2


def min_radius(loop: FourierLoop) -> float:
    """min_t |u(t)|: refined grid scan plus golden-section polish."""
    m = refined_nodes(loop.max_mode)
    r = np.linalg.norm(evaluate_grid(loop, m), axis=1)
    i = int(np.argmin(r))

    def sq(t):
        p = evaluate(loop, t)
        return float(np.dot(p, p))

    t_star = _golden_section(sq, (i - 1) / m, (i + 1) / m)
    return min(float(r[i]), math.sqrt(sq(t_star)))


def speed_bound(loop: FourierLoop) -> float:
    """Upper bound on max_t |u'(t)| from the coefficient magnitudes."""
    k = np.arange(1, loop.max_mode + 1, dtype=float)
    amp = np.sqrt(
        np.sum(loop.cos_coeffs**2, axis=1) + np.sum(loop.sin_coeffs**2, axis=1)
    )
    return float(TWO_PI * np.dot(k, amp))


def min_radius_above(loop: FourierLoop, floor: float) -> bool:
    """Whether min_t |u(t)| > floor, with a cheap certified fast path.

    The grid minimum minus a Lipschitz slack max|u'| / (2M) bounds the true
    minimum from below; the polished scan only runs when that bound is not
    conclusive.
    """
    m = refined_nodes(loop.max_mode)
    grid_min = float(np.min(np.linalg.norm(evaluate_grid(loop, m), axis=1)))
    if grid_min - 0.5 * speed_bound(loop) / m > floor:
        return True
    return min_radius(loop) > floor


def sup_norm(loop: FourierLoop) -> float:
    """max_t |u(t)|: refined grid scan plus golden-section polish."""
    m = refined_nodes(loop.max_mode)
    r = np.linalg.norm(evaluate_grid(loop, m), axis=1)
    i = int(np.argmax(r))

    def neg_sq(t):
        p = evaluate(loop, t)
        return -float(np.dot(p, p))

    t_star = _golden_section(neg_sq, (i - 1) / m, (i + 1) / m)
    return max(float(r[i]), math.sqrt(-neg_sq(t_star)))


def mean_radius(loop: FourierLoop) -> float:
    """Average of |u(t)| over the refined grid."""
    m = refined_nodes(loop.max_mode)
    return float(np.mean(np.linalg.norm(evaluate_grid(loop, m), axis=1)))


def inequality_report(loop: FourierLoop, rel_tol: float = 1e-10) -> InequalityReport:
    """Check Wirtinger (4 pi^2), Sobolev (12) and Poincare (pi^2) at unit period.

    Wirtinger and Sobolev are evaluated on the zero-mean part of the loop;
    Poincare on u - u(0), which vanishes at the period endpoints.
    """
    kin = kinetic_integral(loop)
    l2 = l2_integral(loop)
    sup = sup_norm(loop)

    centered = project_zero_mean(loop)
    l2_centered = l2_integral(centered)
    sup_centered = sup_norm(centered)

    u0 = evaluate(loop, 0.0)
    # integral |u - u(0)|^2 expanded through Parseval pieces
    l2_anchored = l2 - 2.0 * float(np.dot(u0, loop.mean)) + float(np.dot(u0, u0))

    def ratio(num, den):
        return num / den if den > 1e-300 else math.inf

    ratios = {
        "wirtinger": ratio(kin, 4.0 * math.pi**2 * l2_centered),
        "sobolev": ratio(kin, 12.0 * sup_centered**2),
        "poincare": ratio(kin, math.pi**2 * l2_anchored),
    }
    return InequalityReport(
        kinetic=kin,
        l2=l2,
        sup_norm=sup,
        wirtinger_ok=ratios["wirtinger"] >= 1.0 - rel_tol,
        sobolev_ok=ratios["sobolev"] >= 1.0 - rel_tol,
        poincare_ok=ratios["poincare"] >= 1.0 - rel_tol,
        ratios=ratios,
    )


def write_grid_csv(grid: GridLoop, path) -> None:
    """CSV rows t, u_1, ..., u_n on the uniform grid."""
    m = grid.num_nodes
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"u_{i + 1}" for i in range(grid.dim)])
        for j in range(m):
            writer.writerow([repr(j / m)] + [repr(float(v)) for v in grid.nodes[j]])


def read_grid_csv(path) -> GridLoop:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    data = np.array([[float(v) for v in row[1:]] for row in rows[1:]])
    return GridLoop(dim=data.shape[1], nodes=data)
