import dataclasses
import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from slicevol.geometry import LORENTZIAN, MetricSpec, ScalarField2
from slicevol.numerics import Torus

settings.register_profile(
    "deterministic",
    derandomize=True,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
    deadline=None,
)
settings.load_profile("deterministic")


def shift_conformal(M: MetricSpec, c: float) -> MetricSpec:
    """Replace psi by psi + c, keeping derivatives (shift is constant)."""
    f = M.psi
    shifted = ScalarField2(
        value=lambda t, x, _g=f.value: np.asarray(_g(t, x), dtype=float) + c,
        dt=f.dt,
        dx=f.dx,
    )
    return dataclasses.replace(M, psi=shifted)


def strip_derivatives(M: MetricSpec) -> MetricSpec:
    """Drop all analytic derivatives so consumers fall back to differences."""

    def bare(f):
        return ScalarField2(value=f.value)

    return dataclasses.replace(
        M,
        psi=bare(M.psi),
        sigma=tuple(tuple(bare(f) for f in row) for row in M.sigma),
    )


def expanding_lorentzian(n: int = 2, length: float = 1.0) -> MetricSpec:
    """sigma = e^{2t} delta: H = -n, volume element grows."""

    def value(t, x):
        return np.exp(2.0 * np.asarray(t, dtype=float))

    def dt(t, x):
        return 2.0 * np.exp(2.0 * np.asarray(t, dtype=float))

    zero = lambda t, x: 0.0  # noqa: E731
    diag = ScalarField2(value=value, dt=dt, dx=tuple(zero for _ in range(n)))
    off = ScalarField2(value=zero, dt=zero, dx=tuple(zero for _ in range(n)))
    psi = ScalarField2(value=zero, dt=zero, dx=tuple(zero for _ in range(n)))
    sigma = tuple(tuple(diag if i == j else off for j in range(n)) for i in range(n))
    return MetricSpec(
        n=n,
        signature=LORENTZIAN,
        psi=psi,
        sigma=sigma,
        domain=Torus((length,) * n),
        window=(-math.inf, math.inf),
    )


CATALOG_CASES = [
    # (name, params, interior time range for sampling)
    ("flrw-crunch", {}, (0.0, 0.8)),
    ("minkowski-strip", {"n": 2}, (0.0, 2.0)),
    ("conformal-homogeneous", {"n": 2, "psi": "-t"}, (0.0, 1.0)),
    ("perturbed-flrw", {"eps": 0.1}, (0.0, 0.8)),
    ("riemannian-cusp", {"n": 2}, (0.0, 2.0)),
    ("riemannian-expanding", {"n": 2}, (0.0, 2.0)),
]


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20250809)
