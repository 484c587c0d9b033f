"""Checkable verdicts for the slab-volume estimates, with quantitative margins.

Each check measures the volume of the slab over an increasing ladder of end
times T_k and compares it against the claimed bound:

* thm01-future / thm01-past : H >= eps0 > 0 (resp. <= -eps0) forces
  |Q(t1, T)| <= (1/eps0) |M(t1)|;  the past case is the future case of the
  time-reversed metric.
* thm12    : with the volume element pointwise non-increasing and coordinate
  curve lengths bounded by gamma1, |Q(t1, T)| <= gamma1 |M(t1)|.
* remark2  : in mean-curvature time, (|M(tau)| - |M(tau2)|)/tau2 <= |Q(tau, tau2)|.
* riemann-i / riemann-ii : the Riemannian analogues; case I bounds by the
  latest slice volume on the ladder (a stand-in for the limit, never
  extrapolated), case II by the initial one.

A margin is the bound minus the measured volume (for remark2, measured minus
the lower bound); the verdict is ``holds`` when every margin clears
-(tolerance + quadrature error estimate), ``violated`` when one does not,
and ``hypothesis-not-met`` when the theorem's hypothesis fails, in which
case the estimate asserts nothing.  The constants eps0/gamma1 are sampled
infima/suprema, so a reported violation at coarse resolution should be
re-run denser before being believed; reports echo the sampling resolution.

The Lorentzian checks reject Riemannian inputs and vice versa.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    GeometryError,
    MetricSpec,
    check_spatially_constant,
    curvature_values,
    representative_point,
    time_reversal,
)
from .numerics import Grid, Homogeneous, TimeRule
from .volume import (
    ALL,
    AllSpace,
    Box,
    SpatialSubset,
    cylinder_volume,
    max_curve_length,
    slice_volume,
    snap_box,
    volume_element_monotonicity,
)

__all__ = [
    "HOLDS",
    "VIOLATED",
    "HYPOTHESIS_NOT_MET",
    "BoundReport",
    "CmcVerificationError",
    "check_thm01_future",
    "check_thm01_past",
    "check_thm12",
    "check_remark_sec2",
    "check_riemannian",
]

HOLDS = "holds"
VIOLATED = "violated"
HYPOTHESIS_NOT_MET = "hypothesis-not-met"

DEFAULT_TOLERANCE = 1e-9
DEFAULT_HYPOTHESIS_SAMPLES = 33

_NAN = float("nan")


class CmcVerificationError(ValueError):
    """The metric handed to the remark check is not in mean-curvature time."""


@dataclass(frozen=True)
class BoundReport:
    """Verdict record of one check.

    ``ladder``, ``measured_volumes``, ``error_estimates``, ``bound_values``
    and ``margins`` are aligned; for remark2 the ladder is the single pair
    endpoint.  ``reference_volumes`` carries the per-T slice volumes used by
    riemann-i.  ``epsilon0`` is set for the curvature-based checks, ``gamma``
    for the curve-length one.  Bounds and margins are NaN when the verdict is
    hypothesis-not-met.
    """

    theorem: str
    t_ref: float
    ladder: tuple[float, ...]
    subset: str
    epsilon0: float | None
    gamma: float | None
    reference_volume: float
    reference_volumes: tuple[float, ...] | None
    measured_volumes: tuple[float, ...]
    error_estimates: tuple[float, ...]
    bound_values: tuple[float, ...]
    margins: tuple[float, ...]
    sharper_bounds: tuple[float, ...] | None
    verdict: str
    hypothesis_samples: int
    tolerance: float
    notes: tuple[str, ...]

    @property
    def bound_value(self) -> float:
        return self.bound_values[-1]


def _subset_echo(M: MetricSpec, E: SpatialSubset, grid: Grid) -> tuple[SpatialSubset, str, list[str]]:
    if isinstance(E, AllSpace):
        return E, "all", []
    if isinstance(M.domain, Homogeneous):
        raise GeometryError("box subsets require a torus domain")
    snapped, moved = snap_box(E, grid, M.domain)
    desc = "box " + " x ".join(f"[{a}, {b})" for a, b in snapped.intervals)
    notes = []
    if moved:
        notes.append(f"box snapped to grid cell boundaries: {desc}")
    return snapped, desc, notes


def _validate_ladder(M: MetricSpec, t1: float, ladder) -> tuple[float, ...]:
    out = tuple(float(T) for T in ladder)
    if not out:
        raise ValueError("ladder must contain at least one end time")
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ValueError("ladder must be strictly increasing")
    if out[0] <= t1:
        raise ValueError("ladder must start above t1")
    # slice volumes are evaluated at every endpoint, so the ladder must stay
    # strictly below the window edge (unlike a bare slab integral)
    if out[-1] >= M.window[1]:
        raise ValueError("ladder must stay strictly inside the time window")
    return out

def _sample_times(t1: float, t_max: float, ladder, count: int) -> list[float]:
    times = set(np.linspace(t1, t_max, count).tolist())
    times.update(float(T) for T in ladder)
    times.add(float(t1))
    return sorted(times)


def _curvature_range(M: MetricSpec, times, E: SpatialSubset, grid: Grid) -> tuple[float, float]:
    """Infimum and supremum of H over sampled times and nodes in E."""
    if isinstance(M.domain, Homogeneous):
        xs = representative_point(M)
        keep = None
    else:
        xs = grid.nodes(M.domain)
        if isinstance(E, Box):
            from .volume import _indicator  # snapped upstream

            keep = _indicator(E)(xs)
        else:
            keep = None
    lo, hi = math.inf, -math.inf
    for t in times:
        H, _ = curvature_values(M, float(t), xs)
        H = np.atleast_1d(np.asarray(H, dtype=float))
        if keep is not None:
            H = H[np.broadcast_to(keep, H.shape)]
        lo = min(lo, float(np.min(H)))
        hi = max(hi, float(np.max(H)))
    return lo, hi


def _measure_ladder(M, t1, ladder, E, grid, time_rule):
    measured, estimates = [], []
    for T in ladder:
        q = cylinder_volume(M, t1, T, E, grid, time_rule)
        measured.append(q.value)
        estimates.append(q.error_estimate)
    return tuple(measured), tuple(estimates)


def _verdict(margins, estimates, tol) -> str:
    for m, e in zip(margins, estimates):
        if not (m >= -(tol + e)):
            return VIOLATED
    return HOLDS


# ---------------------------------------------------------------------------
# Lorentzian checks
# ---------------------------------------------------------------------------


def check_thm01_future(
    M: MetricSpec,
    t1: float,
    ladder,
    E: SpatialSubset = ALL,
    grid: Grid | None = None,
    time_rule: TimeRule | int = TimeRule(),
    tol: float = DEFAULT_TOLERANCE,
    hypothesis_samples: int = DEFAULT_HYPOTHESIS_SAMPLES,
) -> BoundReport:
    """Positive-mean-curvature bound on the future slab over E."""
    if not M.lorentzian:
        raise GeometryError("this check applies to Lorentzian metrics")
    t1 = float(t1)
    M.require_time(t1)
    grid = grid or Grid.uniform(M.n, 32)
    ladder = _validate_ladder(M, t1, ladder)
    E, subset_desc, notes = _subset_echo(M, E, grid)

    eps0, _ = _curvature_range(M, _sample_times(t1, ladder[-1], ladder, hypothesis_samples), E, grid)
    reference = slice_volume(M, t1, E, grid)
    measured, estimates = _measure_ladder(M, t1, ladder, E, grid, time_rule)
    slice_at = [slice_volume(M, T, E, grid) for T in ladder]

    if eps0 <= tol:
        verdict = HYPOTHESIS_NOT_MET
        bounds = margins = (_NAN,) * len(ladder)
        sharper = None
        notes.append(f"infimum of H is {eps0!r}, not positive")
    else:
        bounds = tuple(reference / eps0 for _ in ladder)
        sharper = tuple((reference - v) / eps0 for v in slice_at)
        margins = tuple(b - m for b, m in zip(bounds, measured))
        verdict = _verdict(margins, estimates, tol)

    return BoundReport(
        theorem="thm01-future",
        t_ref=t1,
        ladder=ladder,
        subset=subset_desc,
        epsilon0=eps0,
        gamma=None,
        reference_volume=reference,
        reference_volumes=None,
        measured_volumes=measured,
        error_estimates=estimates,
        bound_values=bounds,
        margins=margins,
        sharper_bounds=sharper,
        verdict=verdict,
        hypothesis_samples=hypothesis_samples,
        tolerance=tol,
        notes=tuple(notes),
    )


def check_thm01_past(
    M: MetricSpec,
    t2: float,
    ladder,
    E: SpatialSubset = ALL,
    grid: Grid | None = None,
    time_rule: TimeRule | int = TimeRule(),
    tol: float = DEFAULT_TOLERANCE,
    hypothesis_samples: int = DEFAULT_HYPOTHESIS_SAMPLES,
) -> BoundReport:
    """Negative-mean-curvature bound on the past slab over E.

    ``ladder`` decreases toward the past endpoint; the check runs the future
    check on the time-reversed metric and relabels the report.
    """
    t2 = float(t2)
    ladder = tuple(float(T) for T in ladder)
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("past ladder must be strictly decreasing")
    rep = check_thm01_future(
        time_reversal(M),
        -t2,
        tuple(-T for T in ladder),
        E,
        grid,
        time_rule,
        tol,
        hypothesis_samples,
    )
    return BoundReport(
        theorem="thm01-past",
        t_ref=t2,
        ladder=ladder,
        subset=rep.subset,
        epsilon0=rep.epsilon0,
        gamma=None,
        reference_volume=rep.reference_volume,
        reference_volumes=None,
        measured_volumes=rep.measured_volumes,
        error_estimates=rep.error_estimates,
        bound_values=rep.bound_values,
        margins=rep.margins,
        sharper_bounds=rep.sharper_bounds,
        verdict=rep.verdict,
        hypothesis_samples=rep.hypothesis_samples,
        tolerance=rep.tolerance,
        notes=rep.notes,
    )


def check_thm12(
    M: MetricSpec,
    t1: float,
    ladder,
    E: SpatialSubset = ALL,
    grid: Grid | None = None,
    time_rule: TimeRule | int = TimeRule(),
    tol: float = DEFAULT_TOLERANCE,
    hypothesis_samples: int = DEFAULT_HYPOTHESIS_SAMPLES,
) -> BoundReport:
    """Curve-length bound on the future slab (the zero-infimum case).

    Hypothesis: sqrt(det g) pointwise non-increasing after t1, sampled on the
    grid.  gamma1 is the largest coordinate-curve length up to the top of the
    ladder (a lower bound for the any-curve constant; flagged in the notes).
    """
    if not M.lorentzian:
        raise GeometryError("this check applies to Lorentzian metrics")
    t1 = float(t1)
    M.require_time(t1)
    grid = grid or Grid.uniform(M.n, 32)
    ladder = _validate_ladder(M, t1, ladder)
    E, subset_desc, notes = _subset_echo(M, E, grid)

    worst = 0.0
    for s in _sample_times(t1, ladder[-1], ladder, hypothesis_samples):
        if s <= t1:
            continue
        worst = max(worst, volume_element_monotonicity(M, t1, s, grid))
    gamma1 = max_curve_length(M, t1, ladder[-1], grid, time_rule)
    notes.append(
        "gamma1 measured along coordinate curves; it is a lower bound for the "
        "any-future-curve constant of the hypothesis"
    )

    reference = slice_volume(M, t1, E, grid)
    measured, estimates = _measure_ladder(M, t1, ladder, E, grid, time_rule)

    if worst > tol:
        verdict = HYPOTHESIS_NOT_MET
        bounds = margins = (_NAN,) * len(ladder)
        notes.append(f"volume element grows by {worst!r} somewhere after t1")
    else:
        bounds = tuple(gamma1 * reference for _ in ladder)
        margins = tuple(b - m for b, m in zip(bounds, measured))
        verdict = _verdict(margins, estimates, tol)

    return BoundReport(
        theorem="thm12",
        t_ref=t1,
        ladder=ladder,
        subset=subset_desc,
        epsilon0=None,
        gamma=gamma1,
        reference_volume=reference,
        reference_volumes=None,
        measured_volumes=measured,
        error_estimates=estimates,
        bound_values=bounds,
        margins=margins,
        sharper_bounds=None,
        verdict=verdict,
        hypothesis_samples=hypothesis_samples,
        tolerance=tol,
        notes=tuple(notes),
    )


# ---------------------------------------------------------------------------
# Mean-curvature-time remark
# ---------------------------------------------------------------------------


def check_remark_sec2(
    M_cmc: MetricSpec,
    tau: float,
    tau2: float,
    grid: Grid | None = None,
    time_rule: TimeRule | int = TimeRule(),
    tol: float = DEFAULT_TOLERANCE,
    cmc_tol: float = 1e-6,
    cmc_samples: int = 10,
) -> BoundReport:
    """Lower bound on the slab volume of a metric foliated in CMC time.

    Verifies first that the slice at time tau has mean curvature tau (to
    ``cmc_tol``) at ``cmc_samples`` times; then checks

        (|M(tau)| - |M(tau2)|) / tau2  <=  |Q(tau, tau2)|.

    When the foliation window reaches toward time 0, the report also notes
    whether |M| keeps growing along a sample sequence toward the window edge
    (the finite-sample face of "unbounded slice volume means infinite past
    volume"); the note is diagnostic, never a verdict.
    """
    if not M_cmc.lorentzian:
        raise GeometryError("mean-curvature time is a Lorentzian construction")
    tau, tau2 = float(tau), float(tau2)
    if not 0.0 < tau < tau2:
        raise ValueError("need 0 < tau < tau2 (empty or reversed slab)")
    M_cmc.require_time(tau)
    M_cmc.require_time(tau2)
    grid = grid or Grid.uniform(M_cmc.n, 32)
    notes = []

    probes = np.linspace(tau, tau2, int(cmc_samples))
    if not check_spatially_constant(M_cmc, [float(s) for s in probes[:: max(1, len(probes) // 3)]]):
        raise CmcVerificationError("metric in CMC time must be homogeneous")
    x0 = representative_point(M_cmc)
    deviation = 0.0
    for s in probes:
        H, _ = curvature_values(M_cmc, float(s), x0)
        deviation = max(deviation, abs(float(H) - float(s)))
    if deviation > cmc_tol:
        raise CmcVerificationError(
            f"slice mean curvature deviates from its time label by {deviation!r} (> {cmc_tol!r})"
        )
    notes.append(f"CMC labels verified to {deviation!r} at {int(cmc_samples)} times")

    vol_tau = slice_volume(M_cmc, tau, ALL, grid)
    vol_tau2 = slice_volume(M_cmc, tau2, ALL, grid)
    q = cylinder_volume(M_cmc, tau, tau2, ALL, grid, time_rule)
    lower = (vol_tau - vol_tau2) / tau2
    margin = q.value - lower
    verdict = HOLDS if margin >= -(tol + q.error_estimate) else VIOLATED

    lo = M_cmc.window[0]
    if lo < tau and lo <= 0.05 * tau:
        taus = [lo + (tau - lo) * 0.5**j for j in range(1, 6)]
        vols = [slice_volume(M_cmc, s, ALL, grid) for s in taus]
        growing = all(b > a for a, b in zip([vol_tau] + vols, vols))
        if growing and vols[-1] > 10.0 * vol_tau:
            notes.append(
                "|M| grows without sign of saturation toward the window edge; "
                "infinite past volume expected"
            )
        else:
            notes.append("|M| stays bounded along samples toward the window edge")
    else:
        notes.append("past-volume growth diagnostic not applicable (window bounded away from 0)")

    return BoundReport(
        theorem="remark2",
        t_ref=tau,
        ladder=(tau2,),
        subset="all",
        epsilon0=None,
        gamma=None,
        reference_volume=vol_tau - vol_tau2,
        reference_volumes=None,
        measured_volumes=(q.value,),
        error_estimates=(q.error_estimate,),
        bound_values=(lower,),
        margins=(margin,),
        sharper_bounds=None,
        verdict=verdict,
        hypothesis_samples=int(cmc_samples),
        tolerance=tol,
        notes=tuple(notes),
    )


# ---------------------------------------------------------------------------
# Riemannian cases
# ---------------------------------------------------------------------------


def check_riemannian(
    M: MetricSpec,
    t1: float,
    ladder,
    E: SpatialSubset = ALL,
    grid: Grid | None = None,
    time_rule: TimeRule | int = TimeRule(),
    tol: float = DEFAULT_TOLERANCE,
    case: str = "I",
    hypothesis_samples: int = DEFAULT_HYPOTHESIS_SAMPLES,
) -> BoundReport:
    """Riemannian slab bounds: case I (H >= eps0 > 0) bounds |Q(t1, T)| by
    |M(T)|/eps0 along the ladder; case II (H <= -eps0 < 0) bounds it by
    |M(t1)|/eps0."""
    if M.lorentzian:
        raise GeometryError("this check applies to Riemannian metrics")
    case = case.upper()
    if case not in ("I", "II"):
        raise ValueError("case must be 'I' or 'II'")
    t1 = float(t1)
    M.require_time(t1)
    grid = grid or Grid.uniform(M.n, 32)
    ladder = _validate_ladder(M, t1, ladder)
    E, subset_desc, notes = _subset_echo(M, E, grid)

    h_lo, h_hi = _curvature_range(
        M, _sample_times(t1, ladder[-1], ladder, hypothesis_samples), E, grid
    )
    eps0 = h_lo if case == "I" else -h_hi

    reference = slice_volume(M, t1, E, grid)
    slice_at = tuple(slice_volume(M, T, E, grid) for T in ladder)
    measured, estimates = _measure_ladder(M, t1, ladder, E, grid, time_rule)

    if eps0 <= tol:
        verdict = HYPOTHESIS_NOT_MET
        bounds = margins = (_NAN,) * len(ladder)
        sharper = None
        sign = ">= some eps0 > 0" if case == "I" else "<= some -eps0 < 0"
        notes.append(f"H is not {sign} on the sampled slab")
    else:
        if case == "I":
            bounds = tuple(v / eps0 for v in slice_at)
            sharper = tuple((v - reference) / eps0 for v in slice_at)
            trend = (
                "increasing"
                if all(b > a for a, b in zip(slice_at, slice_at[1:]))
                else "not monotone increasing"
            )
            notes.append(
                f"|M(T)| ladder is {trend}; the limiting slice volume is reported "
                "as this ladder, never extrapolated"
            )
        else:
            bounds = tuple(reference / eps0 for _ in ladder)
            sharper = tuple((reference - v) / eps0 for v in slice_at)
        margins = tuple(b - m for b, m in zip(bounds, measured))
        verdict = _verdict(margins, estimates, tol)

    return BoundReport(
        theorem="riemann-i" if case == "I" else "riemann-ii",
        t_ref=t1,
        ladder=ladder,
        subset=subset_desc,
        epsilon0=eps0,
        gamma=None,
        reference_volume=reference,
        reference_volumes=slice_at if case == "I" else None,
        measured_volumes=measured,
        error_estimates=estimates,
        bound_values=bounds,
        margins=margins,
        sharper_bounds=sharper,
        verdict=verdict,
        hypothesis_samples=hypothesis_samples,
        tolerance=tol,
        notes=tuple(notes),
    )
