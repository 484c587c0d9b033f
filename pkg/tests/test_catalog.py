import numpy as np
import pytest

from conftest import CATALOG_CASES
from slicevol.catalog import CatalogError, ReferenceUnavailable, describe, make, names, reference
from slicevol.geometry import slice_geometry
from slicevol.numerics import Grid, TimeRule
from slicevol.volume import ALL, cylinder_volume, slice_volume


def test_names_and_describe():
    assert set(names()) == {
        "flrw-crunch",
        "minkowski-strip",
        "conformal-homogeneous",
        "perturbed-flrw",
        "riemannian-cusp",
        "riemannian-expanding",
    }
    assert "q>0" in describe("flrw-crunch")
    with pytest.raises(CatalogError):
        describe("kasner")


def test_make_flrw_reference_values():
    spec, entry = make("flrw-crunch", n=3, q=2.0 / 3.0, t_plus=1.0, lengths=1.0)
    assert reference(entry, "H", 0.0) == pytest.approx(2.0, abs=1e-12)
    assert reference(entry, "slice_volume", 0.0) == pytest.approx(1.0, abs=1e-15)
    assert reference(entry, "slice_volume", 0.5) == pytest.approx(0.25, abs=1e-15)
    # |N+| from t1=0: V (T+ - t1)^{nq+1} / (nq+1) = 1/3
    assert reference(entry, "cylinder_volume", 0.0, 1.0) == pytest.approx(1.0 / 3.0, rel=1e-15)


def test_make_riemannian_cusp_equality_witness():
    spec, entry = make("riemannian-cusp", n=2, lengths=1.0)
    assert reference(entry, "H", 3.3) == -2.0
    # integral of e^{-2t} over [0, inf) = 1/2 = (1/eps0)|M(0)|
    assert reference(entry, "cylinder_volume", 0.0, 50.0) == pytest.approx(0.5, rel=1e-12)
    assert reference(entry, "slice_volume", 0.0) / 2.0 == pytest.approx(0.5)


def test_reference_unavailable_for_perturbed():
    _, entry = make("perturbed-flrw", eps=0.1)
    with pytest.raises(ReferenceUnavailable):
        reference(entry, "cylinder_volume", 0.0, 0.9)
    with pytest.raises(ReferenceUnavailable):
        reference(entry, "H", 0.0)
    assert entry.available("slice_volume")
    with pytest.raises(CatalogError):
        reference(entry, "volume_of_everything", 0.0)


@pytest.mark.parametrize("name,params,trange", CATALOG_CASES)
def test_oracle_agreement(name, params, trange):
    # numerical pipeline vs stored closed forms at m=32, 20 panels
    spec, entry = make(name, params)
    grid = Grid.uniform(spec.n, 32)
    rule = TimeRule(20)
    t_mid = 0.5 * (trange[0] + trange[1])
    if entry.available("H"):
        got = slice_geometry(spec, t_mid, (0.3,) * spec.n).H
        assert got == pytest.approx(reference(entry, "H", t_mid), rel=1e-8)
    if entry.available("slice_volume"):
        got = slice_volume(spec, t_mid, ALL, grid)
        assert got == pytest.approx(reference(entry, "slice_volume", t_mid), rel=1e-8)
    if entry.available("cylinder_volume"):
        got = cylinder_volume(spec, trange[0], trange[1], ALL, grid, rule).value
        assert got == pytest.approx(
            reference(entry, "cylinder_volume", trange[0], trange[1]), rel=1e-8
        )


def test_perturbed_eps_zero_matches_flrw_bitwise():
    base, _ = make("flrw-crunch")
    flat, _ = make("perturbed-flrw", eps=0.0)
    rng = np.random.default_rng(11)
    for _ in range(20):
        t = float(rng.uniform(0.0, 0.9))
        x = tuple(np.asarray(v) for v in rng.uniform(0.0, 1.0, 3))
        for i in range(3):
            for j in range(3):
                a = float(np.asarray(base.sigma[i][j].value(t, x)))
                b = float(np.asarray(flat.sigma[i][j].value(t, x)))
                assert abs(a - b) <= 1e-15 * (1.0 + abs(a))
                da = float(np.asarray(base.sigma[i][j].dt(t, x)))
                db = float(np.asarray(flat.sigma[i][j].dt(t, x)))
                assert abs(da - db) <= 1e-15 * (1.0 + abs(da))


def test_perturbed_volume_element_varies_in_space():
    # det sigma = (T+-t)^{2qn} (1 + eps sin)^2: the spatial quadrature path
    # is genuinely exercised for eps > 0
    spec, _ = make("perturbed-flrw", eps=0.1)
    from slicevol.geometry import volume_density

    xs = (np.linspace(0.0, 1.0, 16, endpoint=False), np.zeros(16), np.zeros(16))
    dens = np.asarray(volume_density(spec, 0.0, xs))
    assert np.max(dens) - np.min(dens) > 0.05
    expected = 1.0 + 0.1 * np.sin(2.0 * np.pi * xs[0])
    assert np.allclose(dens, expected, rtol=1e-12)


def test_parameter_validation():
    with pytest.raises(CatalogError):
        make("unknown-entry")
    with pytest.raises(CatalogError):
        make("flrw-crunch", q=0.0)
    with pytest.raises(CatalogError):
        make("flrw-crunch", n=0)
    with pytest.raises(CatalogError):
        make("perturbed-flrw", eps=1.0)
    with pytest.raises(CatalogError):
        make("perturbed-flrw", sigma_volume=1.0)
    with pytest.raises(CatalogError):
        make("flrw-crunch", lengths=(1.0, 1.0))  # needs n entries
    with pytest.raises(CatalogError):
        make("flrw-crunch", lengths=1.0, sigma_volume=1.0)
    with pytest.raises(CatalogError):
        make("flrw-crunch", colour="red")
    with pytest.raises(CatalogError):
        make("conformal-homogeneous", psi="x1*t")
    with pytest.raises(CatalogError):
        make("flrw-crunch", n=2.5)


def test_conformal_homogeneous_H_formula_uses_symbolic_derivative():
    spec, entry = make("conformal-homogeneous", n=2, psi="-t^2")
    # H = -e^{-psi} n psi' = e^{t^2} * 2 * 2t
    t = 0.6
    assert reference(entry, "H", t) == pytest.approx(
        np.exp(t * t) * 2 * 2 * t, rel=1e-12
    )
    assert slice_geometry(spec, t, (0.1, 0.1)).H == pytest.approx(
        reference(entry, "H", t), rel=1e-10
    )
