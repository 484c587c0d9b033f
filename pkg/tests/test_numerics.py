import math

import numpy as np
import pytest

from slicevol.numerics import (
    Grid,
    Homogeneous,
    QuadratureError,
    QuadratureResult,
    TimeRule,
    Torus,
    central_difference,
    gauss_legendre_nodes,
    integrate_time,
    integrate_torus,
)


def test_domain_validation():
    with pytest.raises(ValueError):
        Torus((1.0, -1.0))
    with pytest.raises(ValueError):
        Homogeneous(0.0)
    with pytest.raises(ValueError):
        Grid((0,))


def test_grid_nodes_cell_centered():
    grid = Grid((4,))
    torus = Torus((2.0,))
    (xs,) = grid.nodes(torus)
    assert np.allclose(xs, [0.25, 0.75, 1.25, 1.75])
    assert np.all((xs >= 0) & (xs < 2.0))
    assert Grid((3, 5)).count == 15


# --- spatial rule --------------------------------------------------------


def test_torus_constant():
    res = integrate_torus(lambda xs: np.ones_like(xs[0]), Grid((8,)), Torus((1.0,)))
    assert res.value == pytest.approx(1.0, abs=1e-15)


def test_torus_sin_squared():
    f = lambda xs: np.sin(2 * np.pi * xs[0]) ** 2  # noqa: E731
    res = integrate_torus(f, Grid((16,)), Torus((1.0,)))
    assert res.value == pytest.approx(0.5, abs=1e-12)


def test_torus_mean_of_sine_vanishes():
    f = lambda xs: 1.0 + 0.3 * np.sin(2 * np.pi * xs[0])  # noqa: E731
    res = integrate_torus(f, Grid((32,)), Torus((1.0,)))
    assert res.value == pytest.approx(1.0, abs=1e-12)


def test_torus_spectral_convergence():
    f = lambda xs: np.exp(np.sin(2 * np.pi * xs[0])) * np.cos(2 * np.pi * xs[1])  # noqa: E731
    torus = Torus((1.0, 1.0))
    v32 = integrate_torus(f, Grid((32, 32)), torus).value
    v64 = integrate_torus(f, Grid((64, 64)), torus).value
    assert abs(v64 - v32) < 1e-10 * (1.0 + abs(v64))


def test_torus_error_estimate_bounds_true_error():
    # phase offset avoids accidental symmetry cancellation on the subgrid
    f = lambda xs: np.exp(np.sin(2 * np.pi * xs[0] + 0.4))  # noqa: E731
    torus = Torus((1.0,))
    exact = integrate_torus(f, Grid((256,)), torus).value
    res = integrate_torus(f, Grid((8,)), torus)
    assert abs(res.value - exact) <= 10.0 * res.error_estimate


def test_torus_error_estimate_on_catalog_style_field():
    f = lambda xs: 1.0 + 0.3 * np.sin(2 * np.pi * xs[0])  # noqa: E731
    res = integrate_torus(f, Grid((32,)), Torus((1.0,)))
    assert abs(res.value - 1.0) <= 10.0 * res.error_estimate


def test_torus_odd_count_uses_half_resolution_comparison():
    f = lambda xs: np.exp(np.sin(2 * np.pi * xs[0]))  # noqa: E731
    res = integrate_torus(f, Grid((9,)), Torus((1.0,)))
    assert res.error_estimate >= 0


def test_torus_non_finite_sample_names_node():
    def f(xs):
        return np.where(np.isclose(xs[0], 0.75), np.inf, 1.0)

    with pytest.raises(QuadratureError) as exc:
        integrate_torus(f, Grid((2,)), Torus((1.0,)))
    assert "0.75" in str(exc.value)


def test_torus_indicator_restriction():
    f = lambda xs: np.ones_like(xs[0])  # noqa: E731
    res = integrate_torus(
        f, Grid((8,)), Torus((1.0,)), indicator=lambda xs: xs[0] < 0.5
    )
    assert res.value == pytest.approx(0.5, abs=1e-15)


# --- time rule -----------------------------------------------------------


def test_time_polynomial_exact():
    res = integrate_time(lambda t: t**2, 0.0, 1.0, TimeRule(1))
    assert res.value == pytest.approx(1.0 / 3.0, abs=1e-15)


def test_time_degree_nine_exact_per_panel():
    res = integrate_time(lambda t: t**9, 0.0, 2.0, TimeRule(3))
    assert res.value == pytest.approx(2.0**10 / 10.0, rel=1e-14)


def test_time_quadratic_on_interval():
    res = integrate_time(lambda t: (1.0 - t) ** 2, 0.0, 0.9, TimeRule(20))
    assert res.value == pytest.approx((1.0 - 0.001) / 3.0, abs=1e-14)


def test_time_constant():
    res = integrate_time(lambda t: 1.0, 2.0, 5.0, TimeRule(20))
    assert res.value == pytest.approx(3.0, abs=1e-14)


def test_time_error_estimate_bounds_true_error():
    exact = math.e - 1.0
    res = integrate_time(math.exp, 0.0, 1.0, TimeRule(2))
    assert abs(res.value - exact) <= 10.0 * res.error_estimate


def test_time_interval_validation():
    with pytest.raises(ValueError):
        integrate_time(lambda t: 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        integrate_time(lambda t: 1.0, 0.0, math.inf)


def test_time_non_finite_sample_names_time():
    with pytest.raises(QuadratureError) as exc:
        integrate_time(lambda t: math.inf if t > 0.5 else 1.0, 0.0, 1.0, TimeRule(1))
    assert "t=" in str(exc.value)


def test_gauss_legendre_nodes_interior():
    nodes, weights = gauss_legendre_nodes(0.0, 1.0, 4)
    assert nodes.shape == (20,)
    assert np.all((nodes > 0) & (nodes < 1))
    assert math.fsum(weights.tolist()) == pytest.approx(1.0, abs=1e-15)


# --- central differences -------------------------------------------------


def test_central_difference_sine():
    assert central_difference(math.sin, 0.0, 1e-5) == pytest.approx(1.0, abs=1e-9)


def test_central_difference_constant_exact():
    assert central_difference(lambda s: 4.25, 17.3) == 0.0


def test_central_difference_cubic():
    assert central_difference(lambda s: s**3, 1.0, 1e-4) == pytest.approx(3.0, abs=1e-7)


def test_quadrature_result_validation():
    with pytest.raises(QuadratureError):
        QuadratureResult(math.nan, 0.0)
    with pytest.raises(QuadratureError):
        QuadratureResult(1.0, -1.0)
