"""Slice geometry of conformally foliated metrics.

A metric is given in a single chart as

    ds^2 = e^{2 psi(t,x)} ( -dt^2 + sigma_ij(t,x) dx^i dx^j )   (Lorentzian)
    ds^2 = e^{2 psi(t,x)} ( +dt^2 + sigma_ij(t,x) dx^i dx^j )   (Riemannian)

The level sets M(t) = {t = const} carry the induced metric
g_ij = e^{2 psi} sigma_ij.  With the past-directed unit normal
nu = -e^{-psi} (1, 0, ..., 0) in the Lorentzian case (outward normal
nu = +e^{-psi} (1, 0, ..., 0) in the Riemannian case), the second
fundamental form of the slices is

    h_ij = -(1/2) e^{-psi} d/dt g_ij     (Lorentzian)
    h_ij = +(1/2) e^{-psi} d/dt g_ij     (Riemannian)

and the mean curvature is H = g^{ij} h_ij.  ``slice_geometry`` computes
h_ij from this evolution formula; ``second_fundamental_form_ambient``
recomputes it independently from the ambient Christoffel symbols of the
full (n+1)-metric, which is the guard against sign conventions going wrong.

All derived objects are immutable and every operation here is pure.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import expr as expr_mod
from .numerics import (
    Grid,
    Homogeneous,
    SpatialDomain,
    Torus,
    central_difference,
    default_fd_step,
)

__all__ = [
    "LORENTZIAN",
    "RIEMANNIAN",
    "GeometryError",
    "ScalarField2",
    "MetricSpec",
    "SliceGeometry",
    "NormalVector",
    "slice_geometry",
    "second_fundamental_form_ambient",
    "normal_vector",
    "ambient_metric",
    "mean_curvature_extrema",
    "time_reversal",
    "reparameterize_by_mean_curvature",
    "curvature_values",
    "volume_density",
    "lapse_values",
    "representative_point",
    "check_spatially_constant",
    "validate_positive_definite",
]

LORENTZIAN = "lorentzian"
RIEMANNIAN = "riemannian"


class GeometryError(ValueError):
    """Invalid geometric data: bad signature, non-SPD sigma, bad window."""


# ---------------------------------------------------------------------------
# Fields and metric specifications
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalarField2:
    """Scalar function of (t, x) with optional analytic derivatives.

    ``value(t, x)`` receives the time and a tuple of n coordinate values;
    scalars and numpy arrays broadcast.  ``dt`` and the per-axis entries of
    ``dx`` have the same signature; when absent, consumers fall back to
    central differences.
    """

    value: Callable
    dt: Callable | None = None
    dx: tuple[Callable, ...] | None = None

    @classmethod
    def from_expr(cls, source, n: int) -> "ScalarField2":
        """Build a field (with analytic derivatives) from a formula or AST."""
        tree = expr_mod.parse(source, n) if isinstance(source, str) else source
        d_t = expr_mod.differentiate(tree, "t")
        d_x = tuple(expr_mod.differentiate(tree, f"x{k + 1}") for k in range(n))

        def make(e):
            return lambda t, x: expr_mod.evaluate(e, t, x)

        return cls(value=make(tree), dt=make(d_t), dx=tuple(make(e) for e in d_x))

    @classmethod
    def constant(cls, c: float) -> "ScalarField2":
        c = float(c)
        zero = lambda t, x: 0.0  # noqa: E731
        return cls(value=lambda t, x: c, dt=zero, dx=None)


@dataclass(frozen=True)
class MetricSpec:
    """A metric in conformal form on (T-, T+) x domain.

    ``sigma`` is an n x n nested tuple of ScalarField2, symmetric and
    positive definite wherever it is evaluated.  ``window`` holds the time
    interval (either end may be infinite).
    """

    n: int
    signature: str
    psi: ScalarField2
    sigma: tuple[tuple[ScalarField2, ...], ...]
    domain: SpatialDomain
    window: tuple[float, float]

    def __post_init__(self):
        if self.n < 1:
            raise GeometryError("spatial dimension must be >= 1")
        if self.signature not in (LORENTZIAN, RIEMANNIAN):
            raise GeometryError(f"unknown signature {self.signature!r}")
        sigma = tuple(tuple(row) for row in self.sigma)
        object.__setattr__(self, "sigma", sigma)
        if len(sigma) != self.n or any(len(row) != self.n for row in sigma):
            raise GeometryError(f"sigma must be {self.n}x{self.n}")
        lo, hi = (float(self.window[0]), float(self.window[1]))
        object.__setattr__(self, "window", (lo, hi))
        if not lo < hi:
            raise GeometryError("time window must satisfy Tminus < Tplus")
        if isinstance(self.domain, Torus) and self.domain.n != self.n:
            raise GeometryError("torus dimension does not match n")

    @property
    def lorentzian(self) -> bool:
        return self.signature == LORENTZIAN

    def require_time(self, t: float):
        lo, hi = self.window
        if not (lo < t < hi):
            raise GeometryError(f"t={t} outside time window ({lo}, {hi})")


@dataclass(frozen=True)
class SliceGeometry:
    """Pointwise slice data at (t, x): induced metric, curvature, density."""

    gij: np.ndarray
    g_inv: np.ndarray
    sqrt_det_g: float
    hij: np.ndarray
    H: float


@dataclass(frozen=True)
class NormalVector:
    """Unit normal components (nu^0, ..., nu^n) in the chart coordinates."""

    components: tuple[float, ...]


# ---------------------------------------------------------------------------
# Field evaluation (scalar or batched; everything broadcasts)
# ---------------------------------------------------------------------------


def _shape_of(t, xs):
    return np.broadcast_shapes(np.shape(t), *(np.shape(x) for x in xs))


def _eval(fn: Callable, t, xs, shape) -> np.ndarray:
    out = np.asarray(fn(t, xs), dtype=float)
    return out if out.shape == shape else np.broadcast_to(out, shape)


def _eval_dt(field: ScalarField2, t, xs, shape) -> np.ndarray:
    if field.dt is not None:
        return _eval(field.dt, t, xs, shape)
    return np.broadcast_to(
        np.asarray(central_difference(lambda s: field.value(s, xs), t), dtype=float), shape
    )


def _eval_dx(field: ScalarField2, axis: int, t, xs, shape) -> np.ndarray:
    if field.dx is not None:
        return _eval(field.dx[axis], t, xs, shape)
    step = default_fd_step(float(np.max(np.abs(xs[axis]))) if np.size(xs[axis]) else 0.0)

    def shifted(delta):
        moved = tuple(x + delta if k == axis else x for k, x in enumerate(xs))
        return np.asarray(field.value(t, moved), dtype=float)

    return np.broadcast_to((shifted(step) - shifted(-step)) / (2.0 * step), shape)


def _psi_sigma(M: MetricSpec, t, xs, shape):
    psi = _eval(M.psi.value, t, xs, shape)
    sigma = np.empty(shape + (M.n, M.n))
    for i in range(M.n):
        for j in range(i, M.n):
            sigma[..., i, j] = _eval(M.sigma[i][j].value, t, xs, shape)
            if j > i:
                sigma[..., j, i] = sigma[..., i, j]
    return psi, sigma


def _psi_sigma_dt(M: MetricSpec, t, xs, shape):
    psi_t = _eval_dt(M.psi, t, xs, shape)
    sigma_t = np.empty(shape + (M.n, M.n))
    for i in range(M.n):
        for j in range(i, M.n):
            sigma_t[..., i, j] = _eval_dt(M.sigma[i][j], t, xs, shape)
            if j > i:
                sigma_t[..., j, i] = sigma_t[..., i, j]
    return psi_t, sigma_t


def _det_spd(sigma: np.ndarray, n: int) -> np.ndarray:
    """det of stacked symmetric matrices, closed-form for n <= 3."""
    if n == 1:
        return sigma[..., 0, 0]
    if n == 2:
        return sigma[..., 0, 0] * sigma[..., 1, 1] - sigma[..., 0, 1] * sigma[..., 1, 0]
    if n == 3:
        a, b, c = sigma[..., 0, 0], sigma[..., 0, 1], sigma[..., 0, 2]
        d, e, f = sigma[..., 1, 1], sigma[..., 1, 2], sigma[..., 2, 2]
        return a * (d * f - e * e) - b * (b * f - e * c) + c * (b * e - d * c)
    return np.linalg.det(sigma)


def _cholesky_sqrt_det(sigma: np.ndarray, t, xs) -> np.ndarray:
    """sqrt(det sigma) via Cholesky; raises naming the failing point."""
    try:
        chol = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        flat = sigma.reshape(-1, sigma.shape[-1], sigma.shape[-1])
        coords = tuple(np.broadcast_to(x, sigma.shape[:-2]).reshape(-1) for x in xs)
        for k in range(flat.shape[0]):
            try:
                np.linalg.cholesky(flat[k])
            except np.linalg.LinAlgError:
                point = tuple(float(c[k]) for c in coords)
                raise GeometryError(
                    f"sigma not positive definite at t={np.ravel(t)[0] if np.ndim(t) else t}, x={point}"
                ) from None
        raise
    diag = np.einsum("...ii->...i", chol)
    return np.prod(diag, axis=-1)


def _slice_core(M: MetricSpec, t, xs):
    """g, g_inv, sqrt(det g), h, H as stacked arrays over broadcast(t, xs)."""
    shape = _shape_of(t, xs)
    psi, sigma = _psi_sigma(M, t, xs, shape)
    if not (np.all(np.isfinite(psi)) and np.all(np.isfinite(sigma))):
        raise GeometryError("non-finite metric field value")
    psi_t, sigma_t = _psi_sigma_dt(M, t, xs, shape)
    e_psi = np.exp(psi)
    g = (e_psi**2)[..., None, None] * sigma
    g_t = (e_psi**2)[..., None, None] * (2.0 * psi_t[..., None, None] * sigma + sigma_t)
    evo_sign = -0.5 if M.lorentzian else 0.5
    h = evo_sign * (1.0 / e_psi)[..., None, None] * g_t
    sqrt_det_sigma = _cholesky_sqrt_det(sigma, t, xs)
    sqrt_det_g = e_psi**M.n * sqrt_det_sigma
    g_inv = np.linalg.inv(g)
    H = np.einsum("...ij,...ji->...", g_inv, h)
    return g, g_inv, sqrt_det_g, h, H


def _as_point(M: MetricSpec, x) -> tuple[np.ndarray, ...]:
    xs = tuple(np.asarray(xi, dtype=float) for xi in np.atleast_1d(np.asarray(x, dtype=float)))
    if len(xs) != M.n:
        raise GeometryError(f"point has dimension {len(xs)}, metric has n={M.n}")
    return xs


def representative_point(M: MetricSpec) -> tuple[np.ndarray, ...]:
    """Evaluation point for spatially constant metrics (the origin)."""
    return tuple(np.asarray(0.0) for _ in range(M.n))


# ---------------------------------------------------------------------------
# Spec operations
# ---------------------------------------------------------------------------


def slice_geometry(M: MetricSpec, t: float, x) -> SliceGeometry:
    """Induced metric, second fundamental form and mean curvature at (t, x).

    Uses analytic time derivatives of the fields when present, central
    differences otherwise.
    """
    M.require_time(t)
    xs = _as_point(M, x)
    g, g_inv, sqrt_det_g, h, H = _slice_core(M, float(t), xs)
    return SliceGeometry(
        gij=np.array(g, copy=True),
        g_inv=np.array(g_inv, copy=True),
        sqrt_det_g=float(sqrt_det_g),
        hij=np.array(h, copy=True),
        H=float(H),
    )


def normal_vector(M: MetricSpec, t: float, x) -> NormalVector:
    """Past-directed (Lorentzian) or outward (Riemannian) unit normal."""
    M.require_time(t)
    xs = _as_point(M, x)
    psi = float(np.asarray(M.psi.value(float(t), xs), dtype=float))
    sign = -1.0 if M.lorentzian else 1.0
    return NormalVector((sign * math.exp(-psi),) + (0.0,) * M.n)


def ambient_metric(M: MetricSpec, t: float, x) -> np.ndarray:
    """The full (n+1) x (n+1) metric in chart coordinates (t, x^i)."""
    xs = _as_point(M, x)
    shape = _shape_of(t, xs)
    psi, sigma = _psi_sigma(M, float(t), xs, shape)
    s00 = -1.0 if M.lorentzian else 1.0
    gbar = np.zeros((M.n + 1, M.n + 1))
    gbar[0, 0] = s00 * math.exp(2.0 * float(psi))
    gbar[1:, 1:] = math.exp(2.0 * float(psi)) * sigma
    return gbar


def second_fundamental_form_ambient(M: MetricSpec, t: float, x) -> np.ndarray:
    """h_ij recomputed from ambient Christoffel symbols and the unit normal.

    The embedding of a coordinate slice has second derivatives given by the
    ambient connection alone; projecting onto the normal with the ambient
    metric isolates h_ij.  Independent of the evolution-formula path in
    ``slice_geometry`` (see module docstring).
    """
    M.require_time(t)
    xs = _as_point(M, x)
    shape = _shape_of(t, xs)
    n = M.n
    t = float(t)

    psi, sigma = _psi_sigma(M, t, xs, shape)
    psi = float(psi)
    sigma = np.asarray(sigma, dtype=float).reshape(n, n)
    s00 = -1.0 if M.lorentzian else 1.0
    e2psi = math.exp(2.0 * psi)

    gbar = np.zeros((n + 1, n + 1))
    gbar[0, 0] = s00 * e2psi
    gbar[1:, 1:] = e2psi * sigma

    # dpsi[a], dsigma[a] = derivative along coordinate a (0 = t, a = x_a)
    psi_t, sigma_t = _psi_sigma_dt(M, t, xs, shape)
    dpsi = [float(psi_t)]
    dsigma = [np.asarray(sigma_t, dtype=float).reshape(n, n)]
    for axis in range(n):
        dpsi.append(float(_eval_dx(M.psi, axis, t, xs, shape)))
        dsig = np.empty((n, n))
        for i in range(n):
            for j in range(i, n):
                dsig[i, j] = dsig[j, i] = float(_eval_dx(M.sigma[i][j], axis, t, xs, shape))
        dsigma.append(dsig)

    D = np.zeros((n + 1, n + 1, n + 1))
    for a in range(n + 1):
        D[a, 0, 0] = s00 * 2.0 * dpsi[a] * e2psi
        D[a, 1:, 1:] = e2psi * (2.0 * dpsi[a] * sigma + dsigma[a])

    gbar_inv = np.linalg.inv(gbar)
    # Christoffel symbols with both lower indices spatial
    gamma = np.zeros((n + 1, n, n))
    for i in range(n):
        for j in range(n):
            bracket = D[i + 1, :, j + 1] + D[j + 1, :, i + 1] - D[:, i + 1, j + 1]
            gamma[:, i, j] = 0.5 * gbar_inv @ bracket

    nu = np.array(normal_vector(M, t, x).components)
    h = -np.einsum("ab,aij,b->ij", gbar, gamma, nu)
    return h


def curvature_values(M: MetricSpec, t, xs):
    """Mean curvature and sqrt(det g) over broadcast (t, xs) arrays."""
    _, _, sqrt_det_g, _, H = _slice_core(M, t, xs)
    return H, sqrt_det_g


def volume_density(M: MetricSpec, t, xs) -> np.ndarray:
    """sqrt(det g) = e^{n psi} sqrt(det sigma); fast path without curvature."""
    shape = _shape_of(t, xs)
    psi, sigma = _psi_sigma(M, t, xs, shape)
    det = _det_spd(sigma, M.n)
    diag_ok = np.all(np.einsum("...ii->...i", sigma) > 0, axis=-1)
    bad = ~(np.isfinite(det) & (det > 0) & diag_ok & np.isfinite(psi))
    if np.any(bad):
        k = int(np.flatnonzero(np.ravel(bad))[0])
        coords = tuple(float(np.broadcast_to(xi, shape).reshape(-1)[k]) for xi in xs)
        raise GeometryError(f"sigma not positive definite or non-finite at x={coords}")
    return np.exp(M.n * psi) * np.sqrt(det)


def lapse_values(M: MetricSpec, t, xs) -> np.ndarray:
    """e^{psi} over broadcast (t, xs) arrays."""
    shape = _shape_of(t, xs)
    return np.exp(_eval(M.psi.value, t, xs, shape))


def mean_curvature_extrema(M: MetricSpec, t: float, grid: Grid) -> tuple[float, float]:
    """Min and max of H over the grid nodes (single evaluation when the
    domain is homogeneous)."""
    M.require_time(t)
    if isinstance(M.domain, Homogeneous):
        H, _ = curvature_values(M, float(t), representative_point(M))
        return float(H), float(H)
    xs = grid.nodes(M.domain)
    H, _ = curvature_values(M, float(t), xs)
    return float(np.min(H)), float(np.max(H))


# ---------------------------------------------------------------------------
# Time reversal
# ---------------------------------------------------------------------------


def _reversed_field(f: ScalarField2) -> ScalarField2:
    dt = None
    if f.dt is not None:
        dt = lambda t, x, _g=f.dt: -np.asarray(_g(np.negative(t), x), dtype=float)
    dx = None
    if f.dx is not None:
        dx = tuple((lambda t, x, _g=g: _g(np.negative(t), x)) for g in f.dx)
    return ScalarField2(value=lambda t, x, _g=f.value: _g(np.negative(t), x), dt=dt, dx=dx)


def time_reversal(M: MetricSpec) -> MetricSpec:
    """The same geometry traversed backwards: fields at -t, window negated.

    Mean curvature flips sign: H_reversed(t) = -H(-t).  Applying the
    operation twice returns a spec that evaluates identically to the input.
    """
    return MetricSpec(
        n=M.n,
        signature=M.signature,
        psi=_reversed_field(M.psi),
        sigma=tuple(tuple(_reversed_field(f) for f in row) for row in M.sigma),
        domain=M.domain,
        window=(-M.window[1], -M.window[0]),
    )


# ---------------------------------------------------------------------------
# Homogeneity and positive-definiteness checks
# ---------------------------------------------------------------------------

_PROBE_OFFSETS = (0.0, 0.31830988618379067, 0.6366197723675814, 0.9)  # fixed, irrational-ish


def check_spatially_constant(M: MetricSpec, times: Sequence[float], tol: float = 1e-10) -> bool:
    """True when psi and sigma do not depend on x at the sampled times.

    Probes a fixed set of points (scaled by the torus lengths when the
    domain provides them).
    """
    if isinstance(M.domain, Torus):
        points = [tuple(c * L for L in M.domain.lengths) for c in _PROBE_OFFSETS]
    else:
        points = [(c,) * M.n for c in _PROBE_OFFSETS]
    fields = [M.psi] + [M.sigma[i][j] for i in range(M.n) for j in range(i, M.n)]
    for t in times:
        for f in fields:
            vals = [float(np.asarray(f.value(float(t), tuple(np.asarray(c) for c in p)))) for p in points]
            scale = 1.0 + max(abs(v) for v in vals)
            if max(vals) - min(vals) > tol * scale:
                return False
    return True


def validate_positive_definite(M: MetricSpec, t: float, grid: Grid) -> None:
    """Cholesky-factor sigma at every grid node; raises GeometryError on failure."""
    M.require_time(t)
    if isinstance(M.domain, Homogeneous):
        xs = representative_point(M)
    else:
        xs = grid.nodes(M.domain)
    shape = _shape_of(t, xs)
    _, sigma = _psi_sigma(M, float(t), xs, shape)
    _cholesky_sqrt_det(sigma, t, xs)


# ---------------------------------------------------------------------------
# Mean-curvature time (homogeneous metrics)
# ---------------------------------------------------------------------------


def reparameterize_by_mean_curvature(
    M: MetricSpec, t_range: tuple[float, float], samples: int = 65
) -> MetricSpec:
    """Re-express a homogeneous Lorentzian metric with mean curvature as time.

    H(t) must be strictly increasing on ``t_range`` (sampled at ``samples``
    points); its inverse t(tau) is built by monotone piecewise-cubic
    interpolation plus Newton polishing.  The result has the same slices,
    relabeled so that the slice at time tau has mean curvature tau, with the
    lapse absorbed into the conformal factor:

        lapse(tau) = e^{psi(t(tau))} |dt/dtau|,   psi_new = log(lapse),
        sigma_new  = e^{2 psi(t(tau))} sigma(t(tau)) / lapse^2.
    """
    if not M.lorentzian:
        raise GeometryError("mean-curvature time is a Lorentzian construction")
    t_lo, t_hi = float(t_range[0]), float(t_range[1])
    if not (t_lo < t_hi):
        raise GeometryError("empty reparameterization range")
    M.require_time(t_lo)
    M.require_time(t_hi)
    if samples < 4:
        raise GeometryError("need at least 4 samples")

    ts = np.linspace(t_lo, t_hi, int(samples))
    if not check_spatially_constant(M, [ts[0], 0.5 * (t_lo + t_hi), ts[-1]]):
        raise GeometryError("metric is not homogeneous (fields depend on x)")

    x0 = representative_point(M)

    def H_of(t):
        H, _ = curvature_values(M, t, x0)
        return H

    Hs = np.asarray(H_of(ts), dtype=float)
    diffs = np.diff(Hs)
    if np.any(diffs <= 0):
        if np.all(diffs < 0):
            raise GeometryError(
                "mean curvature is strictly decreasing; it cannot serve as a "
                "future-directed time under the past-normal convention"
            )
        raise GeometryError("mean curvature is not strictly monotone on the range")

    interp = PchipInterpolator(Hs, ts, extrapolate=False)
    tau_lo, tau_hi = float(Hs[0]), float(Hs[-1])

    def dH_dt(t):
        # five-point stencil: the lapse divides by this slope, so the usual
        # second-order step would leak visibly into the CMC labels
        t = np.asarray(t, dtype=float)
        h = default_fd_step(float(np.max(np.abs(t))) if t.ndim else abs(float(t)))
        f = H_of
        return (-f(t + 2 * h) + 8.0 * f(t + h) - 8.0 * f(t - h) + f(t - 2 * h)) / (12.0 * h)

    def t_of_tau_array(tau: np.ndarray) -> np.ndarray:
        if np.any(tau < tau_lo) or np.any(tau > tau_hi):
            raise GeometryError(
                f"mean-curvature time {float(np.min(tau))}..{float(np.max(tau))} outside "
                f"({tau_lo}, {tau_hi})"
            )
        t = np.clip(np.asarray(interp(tau), dtype=float), t_lo, t_hi)
        for _ in range(5):
            resid = np.asarray(H_of(t), dtype=float) - tau
            if np.max(np.abs(resid)) <= 1e-13 * (1.0 + np.max(np.abs(tau))):
                break
            t = np.clip(t - resid / dH_dt(t), t_lo, t_hi)
        return t

    @functools.lru_cache(maxsize=4096)
    def t_of_tau_scalar(tau: float) -> float:
        return float(t_of_tau_array(np.asarray(tau, dtype=float)))

    def t_of_tau(tau):
        a = np.asarray(tau, dtype=float)
        if a.ndim == 0:
            return t_of_tau_scalar(float(a))
        return t_of_tau_array(a)

    def lapse(tau):
        t = t_of_tau(tau)
        psi_val = np.asarray(M.psi.value(t, x0), dtype=float)
        return np.exp(psi_val) / np.abs(dH_dt(np.asarray(t, dtype=float)))

    def new_psi(tau, x):
        return np.log(lapse(tau))

    def make_sigma(i, j):
        field = M.sigma[i][j]

        def value(tau, x):
            t = t_of_tau(tau)
            psi_val = np.asarray(M.psi.value(t, x), dtype=float)
            return np.exp(2.0 * psi_val) * np.asarray(field.value(t, x), dtype=float) / lapse(tau) ** 2

        return ScalarField2(value=value)

    sigma_new = tuple(tuple(make_sigma(i, j) for j in range(M.n)) for i in range(M.n))
    return MetricSpec(
        n=M.n,
        signature=LORENTZIAN,
        psi=ScalarField2(value=new_psi),
        sigma=sigma_new,
        domain=M.domain,
        window=(tau_lo, tau_hi),
    )
