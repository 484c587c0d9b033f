"""Built-in metrics with closed-form geometry, the oracle channel for tests.

Entries
-------
flrw-crunch           Lorentzian, psi = 0, sigma_ij = (T+ - t)^{2q} delta_ij.
                      H(t) = n q / (T+ - t), |M(t)| = V (T+ - t)^{n q},
                      slab volume and curve lengths in closed form.
minkowski-strip       psi = 0, sigma = delta; everything is a product of lengths.
conformal-homogeneous psi = psi0(t) from a formula, sigma = delta;
                      H(t) = -e^{-psi} n psi0'(t), |M(t)| = V e^{n psi}.
perturbed-flrw        sigma_ij = (T+ - t)^{2q} (1 + eps sin(2 pi x1/L1))^{2/n} delta_ij.
                      Spatially varying volume element; |M(t)| stays closed
                      form (the perturbation integrates away), H and the slab
                      volume are declared unavailable for eps > 0.
riemannian-cusp       Riemannian, sigma = e^{-2t} delta; H = -n, saturates the
                      negative-curvature volume bound exactly.
riemannian-expanding  Riemannian, sigma = e^{+2t} delta; H = +n.

``make`` builds (MetricSpec, CatalogEntry); ``reference`` evaluates a stored
closed form or raises ReferenceUnavailable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from . import expr as expr_mod
from .geometry import LORENTZIAN, RIEMANNIAN, MetricSpec, ScalarField2
from .numerics import Homogeneous, SpatialDomain, Torus

__all__ = [
    "CatalogEntry",
    "CatalogError",
    "ReferenceUnavailable",
    "names",
    "describe",
    "make",
    "reference",
]


class CatalogError(ValueError):
    """Unknown entry name or invalid parameters."""


class ReferenceUnavailable(LookupError):
    """The requested quantity has no closed form for this entry."""


@dataclass(frozen=True)
class CatalogEntry:
    """A named metric together with its closed-form reference formulas.

    ``formulas`` maps quantity names ("H", "slice_volume", "cylinder_volume",
    "gamma1") to callables; a missing key means no closed form exists.
    """

    name: str
    params: Mapping[str, object]
    spec: MetricSpec
    formulas: Mapping[str, Callable] = field(default_factory=dict)

    def available(self, quantity: str) -> bool:
        return quantity in self.formulas


def reference(entry: CatalogEntry, quantity: str, *args) -> float:
    """Evaluate a stored closed form: H(t), slice_volume(t),
    cylinder_volume(t1, T) or gamma1(t1, T)."""
    if quantity not in ("H", "slice_volume", "cylinder_volume", "gamma1"):
        raise CatalogError(f"unknown quantity {quantity!r}")
    fn = entry.formulas.get(quantity)
    if fn is None:
        raise ReferenceUnavailable(f"{entry.name} has no closed form for {quantity}")
    return float(fn(*args))


# ---------------------------------------------------------------------------
# field helpers
# ---------------------------------------------------------------------------


def _zero(t, x):
    return 0.0


def _const_field(c: float, n: int) -> ScalarField2:
    c = float(c)
    return ScalarField2(
        value=lambda t, x: c, dt=_zero, dx=tuple(_zero for _ in range(n))
    )


def _diag_sigma(diag: ScalarField2, n: int):
    off = _const_field(0.0, n)
    return tuple(
        tuple(diag if i == j else off for j in range(n)) for i in range(n)
    )


def _domain_volume(domain: SpatialDomain) -> float:
    if isinstance(domain, Torus):
        return domain.coordinate_volume
    return domain.sigma_volume


# ---------------------------------------------------------------------------
# parameter handling
# ---------------------------------------------------------------------------


def _float(params, key, default):
    return float(params.get(key, default))


def _int(params, key, default):
    v = params.get(key, default)
    if int(v) != v:
        raise CatalogError(f"parameter {key} must be an integer")
    return int(v)


def _take_domain(params, n: int) -> SpatialDomain:
    if "sigma_volume" in params and "lengths" in params:
        raise CatalogError("give either lengths or sigma_volume, not both")
    if "sigma_volume" in params:
        return Homogeneous(float(params["sigma_volume"]))
    lengths = params.get("lengths", 1.0)
    if np.isscalar(lengths):
        lengths = (float(lengths),) * n
    lengths = tuple(float(L) for L in lengths)
    if len(lengths) != n:
        raise CatalogError(f"lengths must have {n} entries")
    return Torus(lengths)


def _check_keys(params, allowed, name):
    extra = set(params) - set(allowed)
    if extra:
        raise CatalogError(f"{name}: unknown parameters {sorted(extra)}")


# ---------------------------------------------------------------------------
# entry constructors
# ---------------------------------------------------------------------------


def _power_law_sigma(t_plus: float, q: float, n: int) -> ScalarField2:
    p = 2.0 * q

    def value(t, x):
        return np.power(t_plus - np.asarray(t, dtype=float), p)

    def dt(t, x):
        return -p * np.power(t_plus - np.asarray(t, dtype=float), p - 1.0)

    return ScalarField2(value=value, dt=dt, dx=tuple(_zero for _ in range(n)))


def _make_flrw_crunch(params):
    _check_keys(params, {"n", "q", "t_plus", "lengths", "sigma_volume"}, "flrw-crunch")
    n = _int(params, "n", 3)
    q = _float(params, "q", 2.0 / 3.0)
    t_plus = _float(params, "t_plus", 1.0)
    if n < 1:
        raise CatalogError("n must be >= 1")
    if not q > 0:
        raise CatalogError("q must be positive")
    if not math.isfinite(t_plus):
        raise CatalogError("t_plus must be finite")
    domain = _take_domain(params, n)
    V = _domain_volume(domain)
    spec = MetricSpec(
        n=n,
        signature=LORENTZIAN,
        psi=_const_field(0.0, n),
        sigma=_diag_sigma(_power_law_sigma(t_plus, q, n), n),
        domain=domain,
        window=(-math.inf, t_plus),
    )
    nq = n * q
    formulas = {
        "H": lambda t: nq / (t_plus - t),
        "slice_volume": lambda t: V * (t_plus - t) ** nq,
        "cylinder_volume": lambda t1, T: V
        * ((t_plus - t1) ** (nq + 1.0) - (t_plus - T) ** (nq + 1.0))
        / (nq + 1.0),
        "gamma1": lambda t1, T: T - t1,
    }
    used = {"n": n, "q": q, "t_plus": t_plus, "domain": domain}
    return spec, CatalogEntry("flrw-crunch", used, spec, formulas)


def _make_minkowski_strip(params):
    _check_keys(params, {"n", "lengths", "sigma_volume"}, "minkowski-strip")
    n = _int(params, "n", 3)
    if n < 1:
        raise CatalogError("n must be >= 1")
    domain = _take_domain(params, n)
    V = _domain_volume(domain)
    spec = MetricSpec(
        n=n,
        signature=LORENTZIAN,
        psi=_const_field(0.0, n),
        sigma=_diag_sigma(_const_field(1.0, n), n),
        domain=domain,
        window=(-math.inf, math.inf),
    )
    formulas = {
        "H": lambda t: 0.0,
        "slice_volume": lambda t: V,
        "cylinder_volume": lambda t1, T: V * (T - t1),
        "gamma1": lambda t1, T: T - t1,
    }
    used = {"n": n, "domain": domain}
    return spec, CatalogEntry("minkowski-strip", used, spec, formulas)


def _make_conformal_homogeneous(params):
    _check_keys(
        params, {"n", "psi", "lengths", "sigma_volume", "t_minus", "t_plus"}, "conformal-homogeneous"
    )
    n = _int(params, "n", 2)
    if n < 1:
        raise CatalogError("n must be >= 1")
    source = str(params.get("psi", "-t"))
    tree = expr_mod.parse(source, n)
    if not expr_mod.variables(tree) <= {"t"}:
        raise CatalogError("conformal-homogeneous: psi may depend on t only")
    dtree = expr_mod.differentiate(tree, "t")
    domain = _take_domain(params, n)
    V = _domain_volume(domain)
    t_minus = _float(params, "t_minus", -math.inf)
    t_plus = _float(params, "t_plus", math.inf)
    psi_field = ScalarField2.from_expr(tree, n)
    spec = MetricSpec(
        n=n,
        signature=LORENTZIAN,
        psi=psi_field,
        sigma=_diag_sigma(_const_field(1.0, n), n),
        domain=domain,
        window=(t_minus, t_plus),
    )

    def psi_of(t):
        return expr_mod.evaluate(tree, t, ())

    def dpsi_of(t):
        return expr_mod.evaluate(dtree, t, ())

    formulas = {
        "H": lambda t: -math.exp(-psi_of(t)) * n * dpsi_of(t),
        "slice_volume": lambda t: V * math.exp(n * psi_of(t)),
    }
    used = {"n": n, "psi": source, "domain": domain}
    return spec, CatalogEntry("conformal-homogeneous", used, spec, formulas)


def _make_perturbed_flrw(params):
    _check_keys(params, {"n", "q", "t_plus", "lengths", "eps"}, "perturbed-flrw")
    n = _int(params, "n", 3)
    q = _float(params, "q", 2.0 / 3.0)
    t_plus = _float(params, "t_plus", 1.0)
    eps = _float(params, "eps", 0.1)
    if n < 1:
        raise CatalogError("n must be >= 1")
    if not q > 0:
        raise CatalogError("q must be positive")
    if not 0.0 <= eps < 1.0:
        raise CatalogError("eps must lie in [0, 1)")
    if not math.isfinite(t_plus):
        raise CatalogError("t_plus must be finite")
    domain = _take_domain(params, n)
    if not isinstance(domain, Torus):
        raise CatalogError("perturbed-flrw needs a torus domain")
    V = domain.coordinate_volume
    L1 = domain.lengths[0]
    w = 2.0 * math.pi / L1
    p = 2.0 * q
    r = 2.0 / n

    def bump(x1):
        return 1.0 + eps * np.sin(w * np.asarray(x1, dtype=float))

    def value(t, x):
        return np.power(t_plus - np.asarray(t, dtype=float), p) * np.power(bump(x[0]), r)

    def dt(t, x):
        return -p * np.power(t_plus - np.asarray(t, dtype=float), p - 1.0) * np.power(bump(x[0]), r)

    def dx1(t, x):
        return (
            np.power(t_plus - np.asarray(t, dtype=float), p)
            * r
            * np.power(bump(x[0]), r - 1.0)
            * eps
            * w
            * np.cos(w * np.asarray(x[0], dtype=float))
        )

    dx = (dx1,) + tuple(_zero for _ in range(n - 1))
    diag = ScalarField2(value=value, dt=dt, dx=dx)
    spec = MetricSpec(
        n=n,
        signature=LORENTZIAN,
        psi=_const_field(0.0, n),
        sigma=_diag_sigma(diag, n),
        domain=domain,
        window=(-math.inf, t_plus),
    )
    nq = n * q
    formulas = {
        # the sine factor integrates away over full periods
        "slice_volume": lambda t: V * (t_plus - t) ** nq,
        "gamma1": lambda t1, T: T - t1,
    }
    if eps == 0.0:
        formulas["H"] = lambda t: nq / (t_plus - t)
        formulas["cylinder_volume"] = (
            lambda t1, T: V
            * ((t_plus - t1) ** (nq + 1.0) - (t_plus - T) ** (nq + 1.0))
            / (nq + 1.0)
        )
    used = {"n": n, "q": q, "t_plus": t_plus, "eps": eps, "domain": domain}
    return spec, CatalogEntry("perturbed-flrw", used, spec, formulas)


def _exp_sigma(rate: float, n: int) -> ScalarField2:
    def value(t, x):
        return np.exp(rate * np.asarray(t, dtype=float))

    def dt(t, x):
        return rate * np.exp(rate * np.asarray(t, dtype=float))

    return ScalarField2(value=value, dt=dt, dx=tuple(_zero for _ in range(n)))


def _make_riemannian(params, name, rate_sign):
    _check_keys(params, {"n", "lengths", "sigma_volume"}, name)
    n = _int(params, "n", 2)
    if n < 1:
        raise CatalogError("n must be >= 1")
    domain = _take_domain(params, n)
    V = _domain_volume(domain)
    rate = 2.0 * rate_sign
    spec = MetricSpec(
        n=n,
        signature=RIEMANNIAN,
        psi=_const_field(0.0, n),
        sigma=_diag_sigma(_exp_sigma(rate, n), n),
        domain=domain,
        window=(-math.inf, math.inf),
    )
    k = n * rate_sign  # H = +/- n; sqrt(det g) = e^{k t}
    formulas = {
        "H": lambda t: float(k),
        "slice_volume": lambda t: V * math.exp(k * t),
        "cylinder_volume": lambda t1, T: V * (math.exp(k * T) - math.exp(k * t1)) / k,
        "gamma1": lambda t1, T: T - t1,
    }
    used = {"n": n, "domain": domain}
    return spec, CatalogEntry(name, used, spec, formulas)


_BUILDERS = {
    "flrw-crunch": _make_flrw_crunch,
    "minkowski-strip": _make_minkowski_strip,
    "conformal-homogeneous": _make_conformal_homogeneous,
    "perturbed-flrw": _make_perturbed_flrw,
    "riemannian-cusp": lambda p: _make_riemannian(p, "riemannian-cusp", -1.0),
    "riemannian-expanding": lambda p: _make_riemannian(p, "riemannian-expanding", +1.0),
}

_PARAM_DOCS = {
    "flrw-crunch": "n>=1 (3), q>0 (2/3), t_plus (1.0), lengths (1.0) | sigma_volume",
    "minkowski-strip": "n>=1 (3), lengths (1.0) | sigma_volume",
    "conformal-homogeneous": "n>=1 (2), psi formula in t ('-t'), lengths (1.0) | sigma_volume, t_minus, t_plus",
    "perturbed-flrw": "n>=1 (3), q>0 (2/3), t_plus (1.0), eps in [0,1) (0.1), lengths (1.0)",
    "riemannian-cusp": "n>=1 (2), lengths (1.0) | sigma_volume",
    "riemannian-expanding": "n>=1 (2), lengths (1.0) | sigma_volume",
}


def names() -> tuple[str, ...]:
    return tuple(sorted(_BUILDERS))


def describe(name: str) -> str:
    if name not in _PARAM_DOCS:
        raise CatalogError(f"unknown catalog entry {name!r}")
    return _PARAM_DOCS[name]


def make(name: str, params: Mapping | None = None, **kw) -> tuple[MetricSpec, CatalogEntry]:
    """Construct a catalog metric; parameters may be a mapping or keywords."""
    if name not in _BUILDERS:
        raise CatalogError(f"unknown catalog entry {name!r}; known: {', '.join(names())}")
    merged = dict(params or {})
    merged.update(kw)
    return _BUILDERS[name](merged)
