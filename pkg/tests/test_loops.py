"""Loop representation: evaluation, Parseval integrals, projections, inequalities."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orbitmin import loops
from orbitmin.loops import FourierLoop, GridLoop

from conftest import make_circle, make_random_loop

TWO_PI = 2.0 * math.pi


def test_evaluate_unit_circle_origin_values(circle):
    assert np.allclose(loops.evaluate(circle, 0.0), [1.0, 0.0], atol=1e-15)
    assert np.allclose(loops.evaluate(circle, 0.25), [0.0, 1.0], atol=1e-15)


def test_evaluate_zero_loop_is_origin():
    zero = FourierLoop.zeros(3, 4)
    for t in (0.0, 0.3, 0.77):
        assert np.all(loops.evaluate(zero, t) == 0.0)


@given(st.floats(min_value=-3.0, max_value=3.0, allow_nan=False))
@settings(max_examples=200, deadline=None)
def test_evaluate_periodicity(t):
    loop = make_random_loop(np.random.default_rng(7), dim=3, max_mode=6)
    u0 = loops.evaluate(loop, t)
    u1 = loops.evaluate(loop, t + 1.0)
    assert np.allclose(u0, u1, atol=1e-12 * (1.0 + np.abs(u0).max()))


def test_evaluate_vectorized_matches_scalar(rng):
    loop = make_random_loop(rng)
    ts = rng.uniform(0, 1, size=17)
    batch = loops.evaluate(loop, ts)
    for i, t in enumerate(ts):
        assert np.allclose(batch[i], loops.evaluate(loop, float(t)), atol=1e-14)


def test_kinetic_integral_circle(circle):
    assert loops.kinetic_integral(circle) == pytest.approx(4.0 * math.pi**2, rel=1e-15)


def test_kinetic_integral_constant_loop_zero():
    const = FourierLoop.zeros(2, 4).with_coeffs(mean=np.array([3.0, -1.0]))
    assert loops.kinetic_integral(const) == 0.0


@pytest.mark.parametrize("radius", [0.5, 2.0, 7.25])
def test_kinetic_integral_radius_scaling(radius):
    loop = make_circle(radius=radius)
    assert loops.kinetic_integral(loop) == pytest.approx(
        4.0 * math.pi**2 * radius**2, rel=1e-14
    )


def test_kinetic_scaling_exact_power_of_two(rng):
    loop = make_random_loop(rng)
    assert loops.kinetic_integral(loops.scale(loop, 2.0)) == 4.0 * loops.kinetic_integral(
        loop
    )


def test_kinetic_matches_trapezoid_quadrature(rng):
    # Parseval vs trapezoid on >= 2K+1 nodes; exact for trig polynomials
    for _ in range(25):
        max_mode = int(rng.integers(1, 17))
        dim = int(rng.integers(1, 5))
        loop = make_random_loop(rng, dim=dim, max_mode=max_mode)
        m = 2 * max_mode + 1
        du = loops.derivative_grid(loop, m)
        quad = float(np.mean(np.sum(du * du, axis=1)))
        kin = loops.kinetic_integral(loop)
        assert quad == pytest.approx(kin, rel=1e-12, abs=1e-13)


def test_h1_norm_values(circle):
    assert loops.h1_norm(circle) == pytest.approx(2.0 * math.pi + 1.0, rel=1e-14)
    const = FourierLoop.zeros(2, 2).with_coeffs(mean=np.array([0.6, 0.8]))
    assert loops.h1_norm(const) == pytest.approx(1.0, rel=1e-14)
    assert loops.h1_norm(FourierLoop.zeros(2, 2)) == 0.0


def test_project_antisymmetric_kills_even_modes():
    cos = np.zeros((4, 2))
    cos[1, 0] = 1.0  # pure k=2
    loop = FourierLoop(2, 4, np.zeros(2), cos, np.zeros((4, 2)))
    proj = loops.project_antisymmetric(loop)
    assert loops.kinetic_integral(proj) == 0.0


def test_project_antisymmetric_fixes_odd_and_is_linear(circle):
    assert np.allclose(
        loops.project_antisymmetric(circle).cos_coeffs, circle.cos_coeffs
    )
    cos = np.array(circle.cos_coeffs)
    cos[1, 1] = 0.7  # add a k=2 component
    mixed = circle.with_coeffs(cos=cos, mean=np.array([0.2, -0.1]))
    proj = loops.project_antisymmetric(mixed)
    assert np.allclose(proj.cos_coeffs, circle.cos_coeffs)
    assert np.all(proj.mean == 0.0)


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=100, deadline=None)
def test_project_antisymmetric_idempotent(seed):
    loop = make_random_loop(np.random.default_rng(seed), max_mode=9)
    once = loops.project_antisymmetric(loop)
    twice = loops.project_antisymmetric(once)
    assert np.array_equal(once.mean, twice.mean)
    assert np.array_equal(once.cos_coeffs, twice.cos_coeffs)
    assert np.array_equal(once.sin_coeffs, twice.sin_coeffs)


def test_antisymmetry_pointwise(rng):
    for _ in range(10):
        loop = loops.project_antisymmetric(make_random_loop(rng, max_mode=11))
        sup = loops.sup_norm(loop)
        ts = rng.uniform(0, 1, size=64)
        gap = loops.evaluate(loop, ts + 0.5) + loops.evaluate(loop, ts)
        assert np.abs(gap).max() <= 1e-12 * (1.0 + sup)


def test_project_zero_mean(circle):
    const = FourierLoop.zeros(2, 2).with_coeffs(mean=np.array([1.0, 2.0]))
    assert loops.kinetic_integral(loops.project_zero_mean(const)) == 0.0
    assert np.all(loops.project_zero_mean(const).mean == 0.0)

    shifted = circle.with_coeffs(mean=np.array([0.3, 0.4]))
    centered = loops.project_zero_mean(shifted)
    assert np.allclose(centered.cos_coeffs, circle.cos_coeffs)
    assert np.all(centered.mean == 0.0)


def test_grid_round_trip_identity(rng):
    for _ in range(10):
        max_mode = int(rng.integers(1, 13))
        loop = make_random_loop(rng, dim=3, max_mode=max_mode)
        m = int(rng.integers(2 * max_mode + 1, 4 * max_mode + 8))
        back = loops.from_grid(loops.to_grid(loop, m), max_mode)
        assert np.allclose(back.mean, loop.mean, atol=1e-13)
        assert np.allclose(back.cos_coeffs, loop.cos_coeffs, atol=1e-13)
        assert np.allclose(back.sin_coeffs, loop.sin_coeffs, atol=1e-13)


def test_from_grid_needs_nyquist():
    grid = GridLoop(dim=1, nodes=np.zeros((8, 1)))
    with pytest.raises(ValueError):
        loops.from_grid(grid, max_mode=4)


def test_min_radius_circle_and_constant():
    assert loops.min_radius(make_circle(radius=0.75)) == pytest.approx(0.75, rel=1e-10)
    const = FourierLoop.zeros(2, 2).with_coeffs(mean=np.array([3.0, 4.0]))
    assert loops.min_radius(const) == pytest.approx(5.0, rel=1e-14)


def test_min_radius_shifted_circle_dense_scan_oracle(circle):
    # |(cos t + 1/2, sin t)| = sqrt(5/4 + cos t), minimized at t = pi
    shifted = circle.with_coeffs(mean=np.array([0.5, 0.0]))
    ts = np.linspace(0.0, 1.0, 200_001)
    oracle = float(np.linalg.norm(loops.evaluate(shifted, ts), axis=1).min())
    got = loops.min_radius(shifted)
    assert got == pytest.approx(0.5, abs=1e-10)
    assert got <= oracle + 1e-12


def test_min_radius_below_every_grid_node(rng):
    for _ in range(5):
        loop = make_random_loop(rng, max_mode=10)
        m = loops.refined_nodes(loop.max_mode)
        node_min = np.linalg.norm(loops.evaluate_grid(loop, m), axis=1).min()
        assert loops.min_radius(loop) <= node_min + 1e-15


def test_speed_bound_dominates_samples(rng):
    for _ in range(5):
        loop = make_random_loop(rng, max_mode=9)
        speeds = np.linalg.norm(loops.derivative_grid(loop, 512), axis=1)
        assert loops.speed_bound(loop) >= speeds.max() - 1e-12


def test_inequality_report_circle(circle):
    rep = loops.inequality_report(circle)
    assert rep.ratios["wirtinger"] == pytest.approx(1.0, abs=1e-12)
    assert rep.ratios["sobolev"] == pytest.approx(4.0 * math.pi**2 / 12.0, rel=1e-10)
    assert rep.ratios["poincare"] == pytest.approx(2.0, rel=1e-10)
    assert rep.wirtinger_ok and rep.sobolev_ok and rep.poincare_ok
    assert rep.kinetic == pytest.approx(4.0 * math.pi**2, rel=1e-14)
    assert rep.l2 == pytest.approx(1.0, rel=1e-14)
    assert rep.sup_norm == pytest.approx(1.0, rel=1e-10)


def test_inequality_report_pure_second_harmonic():
    cos = np.zeros((4, 2))
    sin = np.zeros((4, 2))
    cos[1, 0] = 1.0
    sin[1, 1] = 1.0
    loop = FourierLoop(2, 4, np.zeros(2), cos, sin)
    rep = loops.inequality_report(loop)
    assert rep.ratios["wirtinger"] == pytest.approx(4.0, rel=1e-12)


def test_inequalities_hold_on_random_zero_mean_loops(rng):
    for _ in range(200):
        loop = loops.project_zero_mean(
            make_random_loop(rng, max_mode=int(rng.integers(1, 12)))
        )
        rep = loops.inequality_report(loop)
        assert rep.wirtinger_ok, rep.ratios
        assert rep.sobolev_ok, rep.ratios
        assert rep.poincare_ok, rep.ratios


def test_wirtinger_equality_isolates_first_harmonic(rng):
    # ratio == 1 within 1e-10 forces higher-mode energy below 1e-8 of total
    for _ in range(50):
        loop = loops.project_zero_mean(make_random_loop(rng, max_mode=6))
        rep = loops.inequality_report(loop)
        if rep.ratios["wirtinger"] - 1.0 <= 1e-10:
            k2 = np.arange(1, loop.max_mode + 1) ** 2
            energy = k2[:, None] * (loop.cos_coeffs**2 + loop.sin_coeffs**2)
            higher = energy[1:].sum()
            assert higher <= 1e-8 * energy.sum()


def test_constant_loop_inequalities_degenerate():
    const = FourierLoop.zeros(2, 2).with_coeffs(mean=np.array([1.0, 0.0]))
    rep = loops.inequality_report(const)
    assert rep.wirtinger_ok and rep.sobolev_ok and rep.poincare_ok
    assert math.isinf(rep.ratios["wirtinger"])


def test_grid_csv_round_trip(tmp_path, rng):
    grid = loops.to_grid(make_random_loop(rng, dim=3), 32)
    path = tmp_path / "grid.csv"
    loops.write_grid_csv(grid, path)
    back = loops.read_grid_csv(path)
    assert back.dim == grid.dim
    assert np.array_equal(back.nodes, grid.nodes)


def test_fourier_json_round_trip(rng):
    loop = make_random_loop(rng, dim=3, max_mode=5)
    back = FourierLoop.from_dict(loop.to_dict())
    assert np.array_equal(back.mean, loop.mean)
    assert np.array_equal(back.cos_coeffs, loop.cos_coeffs)
    assert np.array_equal(back.sin_coeffs, loop.sin_coeffs)


def test_derivative_orders_match_finite_differences(rng):
    loop = make_random_loop(rng, max_mode=6)
    eps = 1e-6
    for t in rng.uniform(0, 1, size=5):
        fd1 = (loops.evaluate(loop, t + eps) - loops.evaluate(loop, t - eps)) / (2 * eps)
        assert np.allclose(loops.derivative(loop, t, 1), fd1, rtol=1e-7, atol=1e-7)
        fd2 = (
            loops.evaluate(loop, t + eps)
            - 2.0 * loops.evaluate(loop, t)
            + loops.evaluate(loop, t - eps)
        ) / eps**2
        assert np.allclose(loops.derivative(loop, t, 2), fd2, rtol=1e-3, atol=1e-3)


def test_loop_validation_errors():
    with pytest.raises(ValueError):
        FourierLoop.zeros(0, 4)
    with pytest.raises(ValueError):
        FourierLoop.zeros(2, 0)
    with pytest.raises(ValueError):
        FourierLoop(2, 3, np.zeros(2), np.zeros((4, 2)), np.zeros((3, 2)))
