"""Slice volumes, cylinder volumes, curve lengths, and their identities.

The volume of a slice is |M(t)| = integral of sqrt(det g) over the spatial
domain (or a box subset of it); its evolution satisfies

    d/dt |M(t)| = -/+ integral of e^psi H          (Lorentzian / Riemannian)

and the spacetime volume of the slab between t1 and T is the nested
integral of e^psi sqrt(det g).  Curve lengths along the coordinate lines
(tau, x) realize the lapse integral e^psi dtau.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .geometry import (
    GeometryError,
    MetricSpec,
    curvature_values,
    lapse_values,
    representative_point,
    volume_density,
)
from .numerics import (
    Grid,
    Homogeneous,
    QuadratureResult,
    TimeRule,
    Torus,
    gauss_legendre_nodes,
    integrate_torus,
    _rounding_floor,
)

__all__ = [
    "AllSpace",
    "Box",
    "ALL",
    "SpatialSubset",
    "VolumeSweep",
    "snap_box",
    "slice_volume",
    "slice_volume_rate",
    "cylinder_volume",
    "curve_length",
    "max_curve_length",
    "volume_element_monotonicity",
    "volume_sweep",
]


@dataclass(frozen=True)
class AllSpace:
    """The whole spatial domain."""


@dataclass(frozen=True)
class Box:
    """Per-axis half-open coordinate intervals [a_i, b_i) inside the torus."""

    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        ivs = tuple((float(a), float(b)) for a, b in self.intervals)
        object.__setattr__(self, "intervals", ivs)
        for k, (a, b) in enumerate(ivs):
            if not b > a:
                raise ValueError(f"box axis {k + 1} has non-positive length")


ALL = AllSpace()
SpatialSubset = Union[AllSpace, Box]


@dataclass(frozen=True)
class VolumeSweep:
    """Tabulated |M(t)| and d|M|/dt at sorted sample times."""

    times: tuple[float, ...]
    volumes: tuple[float, ...]
    rates: tuple[float, ...]

    def __post_init__(self):
        if not (len(self.times) == len(self.volumes) == len(self.rates)):
            raise ValueError("sweep arrays must have equal length")
        if any(v <= 0 for v in self.volumes):
            raise ValueError("slice volumes must be positive")


def snap_box(box: Box, grid: Grid, domain: Torus) -> tuple[Box, bool]:
    """Snap box edges to grid cell boundaries k*L/m.

    Keeps the node-indicator restriction exact: every cell is either fully
    inside or fully outside.  Returns the snapped box and whether anything
    moved.
    """
    if len(box.intervals) != domain.n:
        raise ValueError("box/domain dimension mismatch")
    snapped = []
    moved = False
    for (a, b), L, m in zip(box.intervals, domain.lengths, grid.counts):
        step = L / m
        a2 = round(a / step) * step
        b2 = round(b / step) * step
        if not 0.0 <= a2 < b2 <= L:
            raise ValueError(
                f"box [{a}, {b}) snaps to [{a2}, {b2}), not a valid sub-interval of [0, {L})"
            )
        moved = moved or (a2 != a) or (b2 != b)
        snapped.append((a2, b2))
    return Box(tuple(snapped)), moved


def _indicator(box: Box):
    def inside(xs):
        keep = np.ones(np.broadcast_shapes(*(np.shape(x) for x in xs)), dtype=bool)
        for x, (a, b) in zip(xs, box.intervals):
            keep &= (x >= a) & (x < b)
        return keep

    return inside


def _subset_indicator(M: MetricSpec, E: SpatialSubset, grid: Grid):
    if isinstance(E, AllSpace):
        return None
    if isinstance(M.domain, Homogeneous):
        raise GeometryError("box subsets require a torus domain")
    snapped, _ = snap_box(E, grid, M.domain)
    return _indicator(snapped)


def _spatial_integral(M: MetricSpec, f, t: float, E: SpatialSubset, grid: Grid) -> QuadratureResult:
    """Integrate f(t, xs) (array-valued) over the domain or subset E."""
    if isinstance(M.domain, Homogeneous):
        if not isinstance(E, AllSpace):
            raise GeometryError("box subsets require a torus domain")
        val = float(np.asarray(f(t, representative_point(M)), dtype=float))
        value = val * M.domain.sigma_volume
        return QuadratureResult(value, _rounding_floor(value))
    return integrate_torus(
        lambda xs: f(t, xs), grid, M.domain, indicator=_subset_indicator(M, E, grid)
    )


def slice_volume(M: MetricSpec, t: float, E: SpatialSubset = ALL, grid: Grid | None = None) -> float:
    """|M(t)| restricted to E: integral of sqrt(det g(t, x)) over E."""
    M.require_time(t)
    grid = _default_grid(M, grid)
    return _spatial_integral(M, lambda s, xs: volume_density(M, s, xs), float(t), E, grid).value


def slice_volume_rate(M: MetricSpec, t: float, E: SpatialSubset = ALL, grid: Grid | None = None) -> float:
    """d|M(t)|/dt over E: -(Lorentzian) or +(Riemannian) integral of e^psi H."""
    M.require_time(t)
    grid = _default_grid(M, grid)
    sign = -1.0 if M.lorentzian else 1.0

    def integrand(s, xs):
        H, sqrt_det = curvature_values(M, s, xs)
        return lapse_values(M, s, xs) * H * sqrt_det

    return sign * _spatial_integral(M, integrand, float(t), E, grid).value


def _default_grid(M: MetricSpec, grid: Grid | None) -> Grid:
    if grid is not None:
        return grid
    return Grid.uniform(M.n, 32)


def cylinder_volume(
    M: MetricSpec,
    t1: float,
    T: float,
    E: SpatialSubset = ALL,
    grid: Grid | None = None,
    time_rule: TimeRule | int = TimeRule(),
) -> QuadratureResult:
    """Volume of the slab t1 <= t <= T over E: nested integral of e^psi sqrt(det g).

    The error estimate combines the half-panel time-rule comparison with the
    integrated spatial estimates.
    """
    if isinstance(time_rule, int):
        time_rule = TimeRule(time_rule)
    t1, T = float(t1), float(T)
    if not t1 < T:
        raise ValueError("cylinder requires t1 < T")
    if not math.isfinite(T):
        raise ValueError("cylinder endpoint T must be finite; verify along a ladder instead")
    lo, hi = M.window
    # Gauss-Legendre nodes are interior, so T may equal a finite window
    # endpoint even when the fields degenerate there.
    if not (lo < t1 and T <= hi):
        raise GeometryError(f"cylinder [{t1}, {T}] outside time window ({lo}, {hi})")
    grid = _default_grid(M, grid)

    def integrand(s, xs):
        return lapse_values(M, s, xs) * volume_density(M, s, xs)

    def run(panels: int) -> tuple[float, float]:
        nodes, weights = gauss_legendre_nodes(t1, T, panels)
        vals, errs = [], []
        for s, w in zip(nodes, weights):
            inner = _spatial_integral(M, integrand, float(s), E, grid)
            vals.append(w * inner.value)
            errs.append(abs(w) * inner.error_estimate)
        return math.fsum(vals), math.fsum(errs)

    value, space_err = run(time_rule.panels)
    coarse, _ = run(max(1, time_rule.panels // 2)) if time_rule.panels > 1 else (value, 0.0)
    estimate = abs(value - coarse) + space_err + _rounding_floor(value)
    return QuadratureResult(value, estimate)


def curve_length(
    M: MetricSpec, x, t1: float, t: float, time_rule: TimeRule | int = TimeRule()
) -> float:
    """Length of the coordinate curve s -> (s, x) between t1 and t."""
    if isinstance(time_rule, int):
        time_rule = TimeRule(time_rule)
    t1, t = float(t1), float(t)
    if not t1 < t:
        raise ValueError("curve requires t1 < t")
    xs = tuple(np.asarray(xi, dtype=float) for xi in np.atleast_1d(np.asarray(x, dtype=float)))
    nodes, weights = gauss_legendre_nodes(t1, t, time_rule.panels)
    terms = [w * float(np.asarray(lapse_values(M, float(s), xs))) for s, w in zip(nodes, weights)]
    return math.fsum(terms)


def max_curve_length(
    M: MetricSpec,
    t1: float,
    T: float,
    grid: Grid | None = None,
    time_rule: TimeRule | int = TimeRule(),
) -> float:
    """Largest coordinate-curve length from M(t1) to M(T) over grid nodes.

    This is the curve-length bound entering the zero-mean-curvature volume
    estimate; coordinate curves are exactly the curves the estimate uses,
    so the value is a lower bound for the general-curve constant.
    """
    if isinstance(time_rule, int):
        time_rule = TimeRule(time_rule)
    t1, T = float(t1), float(T)
    if not t1 < T:
        raise ValueError("requires t1 < T")
    if isinstance(M.domain, Homogeneous):
        return curve_length(M, [0.0] * M.n, t1, T, time_rule)
    grid = _default_grid(M, grid)
    xs = grid.nodes(M.domain)
    nodes, weights = gauss_legendre_nodes(t1, T, time_rule.panels)
    total = np.zeros(xs[0].shape)
    for s, w in zip(nodes, weights):
        total = total + w * np.broadcast_to(
            np.asarray(lapse_values(M, float(s), xs), dtype=float), xs[0].shape
        )
    return float(np.max(total))


def volume_element_monotonicity(
    M: MetricSpec, t1: float, t: float, grid: Grid | None = None
) -> float:
    """Worst pointwise growth of sqrt(det g) from t1 to t (> t1).

    Non-positive (up to tolerance) exactly when the volume element is
    pointwise non-increasing, the hypothesis of the curve-length bound.
    """
    t1, t = float(t1), float(t)
    if not t > t1:
        raise ValueError("requires t > t1")
    M.require_time(t1)
    M.require_time(t)
    if isinstance(M.domain, Homogeneous):
        xs = representative_point(M)
    else:
        xs = _default_grid(M, grid).nodes(M.domain)
    early = np.asarray(volume_density(M, t1, xs), dtype=float)
    late = np.asarray(volume_density(M, t, xs), dtype=float)
    return float(np.max(late - early))


def volume_sweep(
    M: MetricSpec, times, E: SpatialSubset = ALL, grid: Grid | None = None
) -> VolumeSweep:
    """Tabulate |M(t)| and d|M|/dt at the given sorted times."""
    ts = [float(t) for t in times]
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ValueError("sweep times must be strictly increasing")
    vols = [slice_volume(M, t, E, grid) for t in ts]
    rates = [slice_volume_rate(M, t, E, grid) for t in ts]
    return VolumeSweep(tuple(ts), tuple(vols), tuple(rates))
