import math

import numpy as np
import pytest

from conftest import CATALOG_CASES, expanding_lorentzian
from slicevol.catalog import make
from slicevol.geometry import GeometryError
from slicevol.numerics import Grid
from slicevol.volume import (
    ALL,
    Box,
    VolumeSweep,
    curve_length,
    cylinder_volume,
    max_curve_length,
    slice_volume,
    slice_volume_rate,
    snap_box,
    volume_element_monotonicity,
    volume_sweep,
)


def test_slice_volume_flrw():
    spec, _ = make("flrw-crunch")
    assert slice_volume(spec, 0.0) == pytest.approx(1.0, abs=1e-12)
    # sqrt(det g) = (1-t)^2 -> 0.25 at t = 0.5
    assert slice_volume(spec, 0.5) == pytest.approx(0.25, abs=1e-12)


def test_slice_volume_box_half_torus():
    spec, _ = make("minkowski-strip", n=2)
    E = Box(((0.0, 0.5), (0.0, 1.0)))
    assert slice_volume(spec, 0.0, E) == pytest.approx(0.5, abs=1e-15)


def test_slice_volume_homogeneous_domain():
    spec, _ = make("flrw-crunch", sigma_volume=3.0)
    assert slice_volume(spec, 0.5) == pytest.approx(3.0 * 0.25, abs=1e-12)
    with pytest.raises(GeometryError):
        slice_volume(spec, 0.5, Box(((0.0, 0.5),) * 3))


def test_slice_volume_rate_examples():
    flrw, _ = make("flrw-crunch")
    assert slice_volume_rate(flrw, 0.0) == pytest.approx(-2.0, abs=1e-12)
    mink, _ = make("minkowski-strip", n=2)
    assert slice_volume_rate(mink, 0.3) == 0.0
    cusp, _ = make("riemannian-cusp", n=2)
    assert slice_volume_rate(cusp, 0.0) == pytest.approx(-2.0, abs=1e-12)


def test_cylinder_volume_flrw():
    spec, _ = make("flrw-crunch")
    q = cylinder_volume(spec, 0.0, 0.9)
    assert q.value == pytest.approx((1.0 - 0.001) / 3.0, abs=1e-12)
    assert q.error_estimate < 1e-10


def test_cylinder_volume_minkowski():
    spec, _ = make("minkowski-strip", n=2)
    q = cylinder_volume(spec, 0.0, 3.0)
    assert q.value == pytest.approx(3.0, abs=1e-12)


def test_cylinder_volume_riemannian_cusp():
    spec, _ = make("riemannian-cusp", n=2)
    q = cylinder_volume(spec, 0.0, 5.0)
    assert q.value == pytest.approx((1.0 - math.exp(-10.0)) / 2.0, abs=1e-12)
    assert q.value == pytest.approx(0.49997730003511875, abs=1e-12)


def test_cylinder_validation():
    spec, _ = make("flrw-crunch")
    with pytest.raises(ValueError):
        cylinder_volume(spec, 0.5, 0.5)
    with pytest.raises(ValueError):
        cylinder_volume(spec, 0.0, math.inf)
    with pytest.raises(GeometryError):
        cylinder_volume(spec, 0.0, 1.5)


def test_curve_length_unit_lapse():
    spec, _ = make("minkowski-strip", n=2)
    assert curve_length(spec, (0.1, 0.2), 0.0, 3.0) == pytest.approx(3.0, abs=1e-14)


def test_curve_length_shrinking_lapse():
    # psi = log(1 - t): length over [0, T] is (1 - (1-T)^2)/2 -> 1/2 as T -> 1
    spec, _ = make("conformal-homogeneous", n=2, psi="log(1-t)", t_plus=1.0)
    delta = 1e-6
    got = curve_length(spec, (0.0, 0.0), 0.0, 1.0 - delta)
    assert got == pytest.approx((1.0 - delta**2) / 2.0, abs=1e-12)
    assert curve_length(spec, (0.0, 0.0), 0.0, 1.0) == pytest.approx(0.5, abs=1e-12)


def test_curve_length_constant_lapse():
    spec, _ = make("conformal-homogeneous", n=2, psi="0.75")
    assert curve_length(spec, (0.0, 0.0), 1.0, 2.5) == pytest.approx(
        1.5 * math.exp(0.75), rel=1e-14
    )


def test_max_curve_length_unit_lapse():
    spec, _ = make("minkowski-strip", n=2)
    assert max_curve_length(spec, 0.0, 3.0) == pytest.approx(3.0, abs=1e-14)


def test_max_curve_length_homogeneous_equals_pointwise():
    spec, _ = make("conformal-homogeneous", n=2, psi="-t", sigma_volume=2.0)
    assert max_curve_length(spec, 0.0, 2.0) == curve_length(spec, (0.0, 0.0), 0.0, 2.0)


def test_max_curve_length_dominates_nodes():
    # spatially varying lapse: the max over the grid dominates every node
    from slicevol.geometry import LORENTZIAN, MetricSpec, ScalarField2
    from slicevol.numerics import Torus

    psi = ScalarField2.from_expr("0.1*sin(2*pi*x1)*t", 1)
    one = ScalarField2.constant(1.0)
    spec = MetricSpec(
        n=1,
        signature=LORENTZIAN,
        psi=psi,
        sigma=((one,),),
        domain=Torus((1.0,)),
        window=(-math.inf, math.inf),
    )
    grid = Grid((16,))
    top = max_curve_length(spec, 0.0, 2.0, grid)
    for x in grid.axis_nodes(0, 1.0):
        assert top >= curve_length(spec, (float(x),), 0.0, 2.0) - 1e-12


def test_volume_element_monotonicity():
    flrw, _ = make("flrw-crunch")
    assert volume_element_monotonicity(flrw, 0.0, 0.5) == pytest.approx(-0.75, abs=1e-12)
    mink, _ = make("minkowski-strip", n=2)
    assert volume_element_monotonicity(mink, 0.0, 1.0) == 0.0
    grower = expanding_lorentzian(n=2)
    assert volume_element_monotonicity(grower, 0.0, 0.5) > 0.1


def test_volume_sweep_flrw():
    spec, _ = make("flrw-crunch")
    sweep = volume_sweep(spec, (0.0, 0.5, 0.9))
    assert np.allclose(sweep.volumes, (1.0, 0.25, 0.01), atol=1e-12)
    assert np.allclose(sweep.rates, (-2.0, -1.0, -0.2), atol=1e-12)


def test_volume_sweep_static():
    spec, _ = make("minkowski-strip", n=2)
    sweep = volume_sweep(spec, (0.0, 1.0, 2.0))
    assert sweep.volumes == (1.0, 1.0, 1.0)
    assert sweep.rates == (0.0, 0.0, 0.0)


def test_volume_sweep_validation():
    spec, _ = make("flrw-crunch")
    with pytest.raises(ValueError):
        volume_sweep(spec, (0.5, 0.5))
    with pytest.raises(ValueError):
        VolumeSweep((0.0,), (1.0, 2.0), (0.0,))
    with pytest.raises(ValueError):
        VolumeSweep((0.0,), (-1.0,), (0.0,))


@pytest.mark.parametrize("name,params,trange", CATALOG_CASES)
def test_evolution_identity(name, params, trange):
    # d|M|/dt must match a centered difference of |M| (independent oracle)
    spec, _ = make(name, params)
    grid = Grid.uniform(spec.n, 8)
    step = 1e-4
    for t in np.linspace(trange[0] + 0.05, trange[1] - 0.05, 10):
        rate = slice_volume_rate(spec, float(t), ALL, grid)
        diff = (
            slice_volume(spec, float(t) + step, ALL, grid)
            - slice_volume(spec, float(t) - step, ALL, grid)
        ) / (2.0 * step)
        assert abs(rate - diff) / (1.0 + abs(rate)) < 1e-6


def test_cylinder_additivity():
    spec, _ = make("perturbed-flrw", eps=0.2)
    grid = Grid.uniform(3, 8)
    for s in (0.2, 0.5, 0.77):
        whole = cylinder_volume(spec, 0.0, 0.9, ALL, grid).value
        left = cylinder_volume(spec, 0.0, s, ALL, grid).value
        right = cylinder_volume(spec, s, 0.9, ALL, grid).value
        assert whole == pytest.approx(left + right, rel=1e-10)


def test_subset_monotonicity():
    spec, _ = make("perturbed-flrw", eps=0.25)
    grid = Grid.uniform(3, 8)
    inner = Box(((0.125, 0.5), (0.25, 0.75), (0.0, 1.0)))
    outer = Box(((0.0, 0.75), (0.125, 0.875), (0.0, 1.0)))
    assert slice_volume(spec, 0.3, inner, grid) <= slice_volume(spec, 0.3, outer, grid) + 1e-12


def test_box_snapping():
    grid = Grid((8, 8))
    from slicevol.numerics import Torus

    torus = Torus((1.0, 1.0))
    snapped, moved = snap_box(Box(((0.1, 0.52), (0.0, 1.0))), grid, torus)
    assert moved
    assert snapped.intervals[0] == (0.125, 0.5)
    assert snapped.intervals[1] == (0.0, 1.0)
    _, unmoved = snap_box(Box(((0.25, 0.5), (0.0, 1.0))), grid, torus)
    assert not unmoved


def test_proof_chain_reproduction():
    # eps0 * |Q(t1, T)| <= |M(t1)| - |M(T)| for H >= eps0 > 0
    for name, params in (("flrw-crunch", {}), ("perturbed-flrw", {"eps": 0.2})):
        spec, _ = make(name, params)
        grid = Grid.uniform(spec.n, 8)
        from slicevol.geometry import mean_curvature_extrema

        eps0 = min(
            mean_curvature_extrema(spec, float(t), grid)[0] for t in np.linspace(0.0, 0.9, 12)
        )
        assert eps0 > 0
        for T in (0.5, 0.9):
            q = cylinder_volume(spec, 0.0, T, ALL, grid)
            drop = slice_volume(spec, 0.0, ALL, grid) - slice_volume(spec, T, ALL, grid)
            assert eps0 * q.value <= drop + 1e-9 + q.error_estimate


def test_fubini_consistency():
    # |Q| <= gamma1 |M(t1)| whenever the volume element never grows
    cases = [("flrw-crunch", {}, 0.9999), ("perturbed-flrw", {"eps": 0.2}, 0.9), ("riemannian-cusp", {"n": 2}, 6.0)]
    for name, params, T in cases:
        spec, _ = make(name, params)
        grid = Grid.uniform(spec.n, 8)
        assert volume_element_monotonicity(spec, 0.0, T, grid) <= 1e-12
        q = cylinder_volume(spec, 0.0, T, ALL, grid)
        gamma1 = max_curve_length(spec, 0.0, T, grid)
        bound = gamma1 * slice_volume(spec, 0.0, ALL, grid)
        assert q.value <= bound + 1e-9 + q.error_estimate
