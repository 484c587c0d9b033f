"""Command-line driver: config loading, command dispatch, report emission.

Commands::

    slicevol info           [options]
    slicevol slice-volume   [options]
    slicevol sweep          [options]
    slicevol cylinder       [options]
    slicevol curvature      [options]
    slicevol check (thm01-future|thm01-past|thm12|remark2|riemann-i|riemann-ii) [options]
    slicevol catalog list

The metric comes either from ``--catalog NAME`` (with ``--param key=value``)
or from a TOML config file with an inline ``[metric]`` block; ``--config``
merges the file first, flags win.  Reports go to stdout (CSV by default,
``--format kv`` for flat key-value text), diagnostics to stderr.

Exit codes: 0 success / bound holds, 2 bound violated, 3 hypothesis not
met, 1 usage, config, or numeric error.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field, replace

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import bounds as bounds_mod
from . import catalog as catalog_mod
from .expr import ParseError
from .geometry import (
    LORENTZIAN,
    RIEMANNIAN,
    GeometryError,
    MetricSpec,
    ScalarField2,
    check_spatially_constant,
    mean_curvature_extrema,
    reparameterize_by_mean_curvature,
)
from .numerics import Grid, Homogeneous, QuadratureError, TimeRule, Torus
from .volume import ALL, Box, cylinder_volume, slice_volume, volume_sweep

__all__ = ["RunConfig", "ConfigError", "load_config", "run", "main"]

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VIOLATED = 2
EXIT_HYPOTHESIS = 3

CHECKS = ("thm01-future", "thm01-past", "thm12", "remark2", "riemann-i", "riemann-ii")

CSV_HEADER = "theorem,t1,T,epsilon0_or_gamma,reference_volume,cylinder_volume,bound,margin,verdict"


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration with defaults applied."""

    catalog: str | None = None
    params: dict = field(default_factory=dict)
    metric: dict | None = None  # inline metric block (raw, validated on build)
    grid_counts: tuple[int, ...] | int = 32
    panels: int = 20
    t1: float = 0.0
    t2: float | None = None
    tau: float | None = None
    tau2: float | None = None
    ladder: tuple[float, ...] | None = None
    ladder_geometric: tuple[float, float, int] | None = None
    subset: tuple[tuple[float, float], ...] | None = None
    tol: float = 1e-9
    format: str = "csv"
    cmc_range: tuple[float, float] | None = None
    cmc_samples: int = 65


# ---------------------------------------------------------------------------
# Config file
# ---------------------------------------------------------------------------


def _number(value, key):
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise ConfigError(f"{key}: expected a number")
    if isinstance(value, str):
        try:
            return float(value)  # accepts "inf" / "-inf"
        except ValueError:
            raise ConfigError(f"{key}: expected a number, got {value!r}") from None
    return float(value)


def load_config(path: str) -> RunConfig:
    """Parse and validate a TOML run configuration."""
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"config: {e}") from None
    return _config_from_mapping(data)


def _config_from_mapping(data: dict) -> RunConfig:
    known = {
        "catalog",
        "params",
        "metric",
        "grid",
        "panels",
        "t1",
        "t2",
        "tau",
        "tau2",
        "ladder",
        "ladder_geometric",
        "subset",
        "tol",
        "format",
        "cmc",
    }
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")

    cfg = RunConfig()
    if "catalog" in data:
        if not isinstance(data["catalog"], str):
            raise ConfigError("catalog: expected a string")
        cfg = replace(cfg, catalog=data["catalog"])
    if "params" in data:
        if not isinstance(data["params"], dict):
            raise ConfigError("params: expected a table")
        cfg = replace(cfg, params=dict(data["params"]))
    if "metric" in data:
        if not isinstance(data["metric"], dict):
            raise ConfigError("metric: expected a table")
        cfg = replace(cfg, metric=dict(data["metric"]))
    if cfg.catalog and cfg.metric:
        raise ConfigError("metric: give either catalog or an inline metric, not both")

    if "grid" in data:
        g = data["grid"]
        if isinstance(g, list):
            cfg = replace(cfg, grid_counts=tuple(int(_number(v, "grid")) for v in g))
        else:
            cfg = replace(cfg, grid_counts=int(_number(g, "grid")))
    if "panels" in data:
        cfg = replace(cfg, panels=int(_number(data["panels"], "panels")))
        if cfg.panels < 1:
            raise ConfigError("panels: must be >= 1")
    for key in ("t1", "t2", "tau", "tau2", "tol"):
        if key in data:
            cfg = replace(cfg, **{key: _number(data[key], key)})
    if "ladder" in data:
        if not isinstance(data["ladder"], list) or not data["ladder"]:
            raise ConfigError("ladder: expected a non-empty array of times")
        cfg = replace(cfg, ladder=tuple(_number(v, "ladder") for v in data["ladder"]))
    if "ladder_geometric" in data:
        tbl = data["ladder_geometric"]
        if not isinstance(tbl, dict) or set(tbl) - {"start", "stop", "count"}:
            raise ConfigError("ladder_geometric: expected keys start, stop, count")
        try:
            cfg = replace(
                cfg,
                ladder_geometric=(
                    _number(tbl["start"], "ladder_geometric.start"),
                    _number(tbl["stop"], "ladder_geometric.stop"),
                    int(_number(tbl.get("count", 6), "ladder_geometric.count")),
                ),
            )
        except KeyError as e:
            raise ConfigError(f"ladder_geometric: missing {e.args[0]}") from None
    if cfg.ladder is not None and cfg.ladder_geometric is not None:
        raise ConfigError("ladder: give either an explicit ladder or a geometric one")
    if "subset" in data:
        tbl = data["subset"]
        if not isinstance(tbl, dict) or set(tbl) != {"box"}:
            raise ConfigError("subset: expected a table with key 'box'")
        box = tbl["box"]
        if not isinstance(box, list) or not all(isinstance(iv, list) and len(iv) == 2 for iv in box):
            raise ConfigError("subset.box: expected an array of [a, b] pairs")
        cfg = replace(
            cfg,
            subset=tuple((_number(a, "subset.box"), _number(b, "subset.box")) for a, b in box),
        )
    if "format" in data:
        if data["format"] not in ("csv", "kv"):
            raise ConfigError("format: must be 'csv' or 'kv'")
        cfg = replace(cfg, format=data["format"])
    if "cmc" in data:
        tbl = data["cmc"]
        if not isinstance(tbl, dict) or set(tbl) - {"t_lo", "t_hi", "samples"}:
            raise ConfigError("cmc: expected keys t_lo, t_hi, samples")
        if "t_lo" not in tbl or "t_hi" not in tbl:
            raise ConfigError("cmc: missing t_lo or t_hi")
        cfg = replace(
            cfg,
            cmc_range=(_number(tbl["t_lo"], "cmc.t_lo"), _number(tbl["t_hi"], "cmc.t_hi")),
            cmc_samples=int(_number(tbl.get("samples", 65), "cmc.samples")),
        )

    _validate_window_block(cfg)
    return cfg


def _validate_window_block(cfg: RunConfig):
    if cfg.metric is None:
        return
    window = cfg.metric.get("window", {})
    if not isinstance(window, dict):
        raise ConfigError("metric.window: expected a table")
    tminus = _number(window.get("tminus", -math.inf), "metric.window.tminus")
    tplus = _number(window.get("tplus", math.inf), "metric.window.tplus")
    if not tminus < tplus:
        raise ConfigError("metric.window: tminus must be below tplus")
    if tplus <= cfg.t1:
        raise ConfigError("metric.window: tplus must exceed t1")


# ---------------------------------------------------------------------------
# Metric construction
# ---------------------------------------------------------------------------


def _build_inline(metric: dict, grid: Grid | None) -> MetricSpec:
    known = {"n", "signature", "psi", "sigma", "domain", "window"}
    extra = set(metric) - known
    if extra:
        raise ConfigError(f"metric: unknown keys {sorted(extra)}")
    try:
        n = int(metric["n"])
    except KeyError:
        raise ConfigError("metric.n: required") from None
    if n < 1:
        raise ConfigError("metric.n: must be >= 1")
    signature = metric.get("signature", LORENTZIAN)
    if signature not in (LORENTZIAN, RIEMANNIAN):
        raise ConfigError(f"metric.signature: unknown {signature!r}")

    psi_src = metric.get("psi", "0")
    try:
        psi = ScalarField2.from_expr(str(psi_src), n)
    except ParseError as e:
        raise ConfigError(f"metric.psi: {e}") from None

    sigma_src = metric.get("sigma")
    if not isinstance(sigma_src, list) or len(sigma_src) != n * n:
        raise ConfigError(f"metric.sigma: expected {n * n} expression strings (row-major)")
    fields = []
    for k, src in enumerate(sigma_src):
        try:
            fields.append(ScalarField2.from_expr(str(src), n))
        except ParseError as e:
            raise ConfigError(f"metric.sigma[{k}]: {e}") from None
    sigma = tuple(tuple(fields[i * n + j] for j in range(n)) for i in range(n))

    domain_tbl = metric.get("domain", {})
    if not isinstance(domain_tbl, dict) or ("torus" in domain_tbl) == ("homogeneous" in domain_tbl):
        raise ConfigError("metric.domain: give exactly one of torus = [L..] or homogeneous = V")
    if "torus" in domain_tbl:
        lengths = domain_tbl["torus"]
        if np.isscalar(lengths):
            lengths = [lengths] * n
        domain = Torus(tuple(_number(L, "metric.domain.torus") for L in lengths))
        if domain.n != n:
            raise ConfigError("metric.domain.torus: needs one length per axis")
    else:
        domain = Homogeneous(_number(domain_tbl["homogeneous"], "metric.domain.homogeneous"))

    window_tbl = metric.get("window", {})
    tminus = _number(window_tbl.get("tminus", -math.inf), "metric.window.tminus")
    tplus = _number(window_tbl.get("tplus", math.inf), "metric.window.tplus")

    spec = MetricSpec(
        n=n, signature=signature, psi=psi, sigma=sigma, domain=domain, window=(tminus, tplus)
    )
    _validate_inline(spec)
    return spec


def _probe_times(spec: MetricSpec) -> list[float]:
    lo, hi = spec.window
    if math.isfinite(lo) and math.isfinite(hi):
        return [lo + 0.25 * (hi - lo), lo + 0.75 * (hi - lo)]
    if math.isfinite(hi):
        return [hi - 1.0, hi - 0.25]
    if math.isfinite(lo):
        return [lo + 0.25, lo + 1.0]
    return [0.0, 0.6180339887498949]


def _validate_inline(spec: MetricSpec):
    points = [
        tuple(np.asarray(0.0) for _ in range(spec.n)),
        tuple(np.asarray(0.328 * (k + 1)) for k in range(spec.n)),
    ]
    for t in _probe_times(spec):
        for i in range(spec.n):
            for j in range(i + 1, spec.n):
                for p in points:
                    a = float(np.asarray(spec.sigma[i][j].value(t, p)))
                    b = float(np.asarray(spec.sigma[j][i].value(t, p)))
                    if abs(a - b) > 1e-12 * (1.0 + abs(a) + abs(b)):
                        raise ConfigError(
                            f"metric.sigma: sigma[{i + 1}][{j + 1}] != sigma[{j + 1}][{i + 1}] at t={t}"
                        )
    if isinstance(spec.domain, Homogeneous) and not check_spatially_constant(
        spec, _probe_times(spec)
    ):
        raise ConfigError("metric.domain: homogeneous domain requires x-independent fields")


def build_metric(cfg: RunConfig):
    """Returns (MetricSpec, CatalogEntry or None)."""
    if (cfg.catalog is None) == (cfg.metric is None):
        raise ConfigError("metric: give exactly one metric source (catalog or inline metric)")
    if cfg.catalog is not None:
        try:
            spec, entry = catalog_mod.make(cfg.catalog, cfg.params)
        except catalog_mod.CatalogError as e:
            raise ConfigError(f"catalog: {e}") from None
        return spec, entry
    return _build_inline(cfg.metric, None), None


# ---------------------------------------------------------------------------
# Ladders and subsets
# ---------------------------------------------------------------------------


def _geometric_ladder(start: float, stop: float, count: int, endpoint: float) -> tuple[float, ...]:
    if count < 1:
        raise ConfigError("ladder_geometric.count: must be >= 1")
    if count == 1:
        return (stop,)
    if math.isfinite(endpoint):
        g0, g1 = endpoint - start, endpoint - stop
        if not (g0 > 0 and g1 > 0 and g1 < g0):
            raise ConfigError("ladder_geometric: needs start < stop < window endpoint")
        ratio = (g1 / g0) ** (1.0 / (count - 1))
        return tuple(endpoint - g0 * ratio**k for k in range(count))
    if not stop > start:
        raise ConfigError("ladder_geometric: needs start < stop")
    return tuple(np.geomspace(start, stop, count).tolist())


def _resolve_ladder(cfg: RunConfig, spec: MetricSpec, anchor: float, direction: int):
    """Explicit ladder, geometric ladder, or a default approach schedule.

    ``direction`` +1 runs toward the future window end, -1 toward the past.
    """
    if cfg.ladder is not None:
        return cfg.ladder
    endpoint = spec.window[1] if direction > 0 else spec.window[0]
    if cfg.ladder_geometric is not None:
        start, stop, count = cfg.ladder_geometric
        if direction > 0:
            return _geometric_ladder(start, stop, count, endpoint)
        mirrored = _geometric_ladder(-start, -stop, count, -endpoint)
        return tuple(-T for T in mirrored)
    gap = endpoint - anchor if direction > 0 else anchor - endpoint
    if math.isfinite(gap):
        start = anchor + direction * 0.5 * gap
        stop = anchor + direction * (1.0 - 1e-4) * gap
        if direction > 0:
            return _geometric_ladder(start, stop, 6, endpoint)
        mirrored = _geometric_ladder(-start, -stop, 6, -endpoint)
        return tuple(-T for T in mirrored)
    return tuple(anchor + direction * 2.0**k for k in range(4))


def _resolve_subset(cfg: RunConfig):
    if cfg.subset is None:
        return ALL
    return Box(cfg.subset)


def _resolve_grid(cfg: RunConfig, spec: MetricSpec) -> Grid:
    counts = cfg.grid_counts
    if isinstance(counts, int):
        return Grid.uniform(spec.n, counts)
    if len(counts) != spec.n:
        raise ConfigError(f"grid: needs {spec.n} axis counts")
    return Grid(counts)


# ---------------------------------------------------------------------------
# Report emission
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _emit_rows(header: str, rows, fmt: str, out):
    if fmt == "csv":
        out.write(header + "\n")
        for row in rows:
            out.write(",".join(_fmt(v) for v in row) + "\n")
    else:
        cols = header.split(",")
        for k, row in enumerate(rows):
            for name, v in zip(cols, row):
                out.write(f"row{k}.{name} = {_fmt(v)}\n")


def _check_rows(rep: bounds_mod.BoundReport):
    rows = []
    eps_or_gamma = rep.epsilon0 if rep.epsilon0 is not None else rep.gamma
    if rep.theorem == "remark2":
        eps_or_gamma = rep.ladder[0]
    for k, T in enumerate(rep.ladder):
        ref = rep.reference_volumes[k] if rep.reference_volumes is not None else rep.reference_volume
        rows.append(
            (
                rep.theorem,
                rep.t_ref,
                T,
                eps_or_gamma,
                ref,
                rep.measured_volumes[k],
                rep.bound_values[k],
                rep.margins[k],
                rep.verdict,
            )
        )
    return rows


def _emit_report(rep: bounds_mod.BoundReport, fmt: str, out, err):
    _emit_rows(CSV_HEADER, _check_rows(rep), fmt, out)
    if fmt == "kv":
        out.write(f"verdict = {rep.verdict}\n")
        out.write(f"hypothesis_samples = {rep.hypothesis_samples}\n")
        out.write(f"tolerance = {_fmt(rep.tolerance)}\n")
        for k, note in enumerate(rep.notes):
            out.write(f"note.{k} = {note}\n")
    else:
        for note in rep.notes:
            err.write(f"note: {note}\n")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _cmd_info(cfg: RunConfig, out, err) -> int:
    spec, entry = build_metric(cfg)
    rows = [
        ("source", cfg.catalog if cfg.catalog else "inline"),
        ("signature", spec.signature),
        ("n", spec.n),
        ("window_tminus", spec.window[0]),
        ("window_tplus", spec.window[1]),
    ]
    if isinstance(spec.domain, Torus):
        rows.append(("domain", "torus"))
        for k, L in enumerate(spec.domain.lengths):
            rows.append((f"length_{k + 1}", L))
    else:
        rows.append(("domain", "homogeneous"))
        rows.append(("sigma_volume", spec.domain.sigma_volume))
    if entry is not None:
        for q in ("H", "slice_volume", "cylinder_volume", "gamma1"):
            rows.append((f"closed_form_{q}", entry.available(q)))
    _emit_rows("key,value", rows, cfg.format, out)
    return EXIT_OK


def _cmd_slice_volume(cfg: RunConfig, out, err) -> int:
    spec, _ = build_metric(cfg)
    grid = _resolve_grid(cfg, spec)
    vol = slice_volume(spec, cfg.t1, _resolve_subset(cfg), grid)
    _emit_rows("t,volume", [(cfg.t1, vol)], cfg.format, out)
    return EXIT_OK


def _cmd_sweep(cfg: RunConfig, out, err) -> int:
    spec, _ = build_metric(cfg)
    grid = _resolve_grid(cfg, spec)
    ladder = _resolve_ladder(cfg, spec, cfg.t1, +1)
    times = sorted({cfg.t1, *ladder})
    sweep = volume_sweep(spec, times, _resolve_subset(cfg), grid)
    rows = list(zip(sweep.times, sweep.volumes, sweep.rates))
    _emit_rows("t,volume,rate", rows, cfg.format, out)
    return EXIT_OK


def _cmd_cylinder(cfg: RunConfig, out, err) -> int:
    spec, _ = build_metric(cfg)
    grid = _resolve_grid(cfg, spec)
    E = _resolve_subset(cfg)
    rows = []
    for T in _resolve_ladder(cfg, spec, cfg.t1, +1):
        q = cylinder_volume(spec, cfg.t1, T, E, grid, TimeRule(cfg.panels))
        rows.append((cfg.t1, T, q.value, q.error_estimate))
    _emit_rows("t1,T,volume,error_estimate", rows, cfg.format, out)
    return EXIT_OK


def _cmd_curvature(cfg: RunConfig, out, err) -> int:
    spec, _ = build_metric(cfg)
    grid = _resolve_grid(cfg, spec)
    ladder = _resolve_ladder(cfg, spec, cfg.t1, +1)
    rows = []
    for t in sorted({cfg.t1, *ladder}):
        lo, hi = mean_curvature_extrema(spec, t, grid)
        rows.append((t, lo, hi))
    _emit_rows("t,H_min,H_max", rows, cfg.format, out)
    return EXIT_OK


def _cmd_catalog_list(cfg: RunConfig, out, err) -> int:
    rows = [(name, catalog_mod.describe(name)) for name in catalog_mod.names()]
    if cfg.format == "csv":
        out.write("name,parameters\n")
        for name, doc in rows:
            out.write(f'{name},"{doc}"\n')
    else:
        for name, doc in rows:
            out.write(f"{name} = {doc}\n")
    return EXIT_OK


def _default_cmc_range(spec: MetricSpec, t1: float) -> tuple[float, float]:
    hi = spec.window[1]
    if math.isfinite(hi):
        return (t1, hi - (hi - t1) / 64.0)
    return (t1, t1 + 8.0)


def _cmd_check(which: str, cfg: RunConfig, out, err) -> int:
    spec, _ = build_metric(cfg)
    grid = _resolve_grid(cfg, spec)
    rule = TimeRule(cfg.panels)
    E = _resolve_subset(cfg)

    if which == "thm01-future":
        rep = bounds_mod.check_thm01_future(
            spec, cfg.t1, _resolve_ladder(cfg, spec, cfg.t1, +1), E, grid, rule, cfg.tol
        )
    elif which == "thm01-past":
        t2 = cfg.t2 if cfg.t2 is not None else 0.0
        rep = bounds_mod.check_thm01_past(
            spec, t2, _resolve_ladder(cfg, spec, t2, -1), E, grid, rule, cfg.tol
        )
    elif which == "thm12":
        rep = bounds_mod.check_thm12(
            spec, cfg.t1, _resolve_ladder(cfg, spec, cfg.t1, +1), E, grid, rule, cfg.tol
        )
    elif which == "remark2":
        if cfg.tau is None or cfg.tau2 is None:
            raise ConfigError("tau: remark2 needs tau and tau2")
        cmc_range = cfg.cmc_range or _default_cmc_range(spec, cfg.t1)
        cmc = reparameterize_by_mean_curvature(spec, cmc_range, cfg.cmc_samples)
        rep = bounds_mod.check_remark_sec2(cmc, cfg.tau, cfg.tau2, grid, rule, cfg.tol)
    elif which in ("riemann-i", "riemann-ii"):
        case = "I" if which == "riemann-i" else "II"
        rep = bounds_mod.check_riemannian(
            spec, cfg.t1, _resolve_ladder(cfg, spec, cfg.t1, +1), E, grid, rule, cfg.tol, case
        )
    else:
        raise ConfigError(f"check: unknown theorem {which!r}")

    _emit_report(rep, cfg.format, out, err)
    if rep.verdict == bounds_mod.HOLDS:
        return EXIT_OK
    if rep.verdict == bounds_mod.VIOLATED:
        return EXIT_VIOLATED
    return EXIT_HYPOTHESIS


def run(command: tuple[str, ...], cfg: RunConfig, out=None, err=None) -> int:
    """Execute a command tuple against a config; returns the exit code."""
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    if not command:
        raise ConfigError("no command given")
    head = command[0]
    if head == "info":
        return _cmd_info(cfg, out, err)
    if head == "slice-volume":
        return _cmd_slice_volume(cfg, out, err)
    if head == "sweep":
        return _cmd_sweep(cfg, out, err)
    if head == "cylinder":
        return _cmd_cylinder(cfg, out, err)
    if head == "curvature":
        return _cmd_curvature(cfg, out, err)
    if head == "check":
        if len(command) != 2 or command[1] not in CHECKS:
            raise ConfigError(f"check: expected one of {', '.join(CHECKS)}")
        return _cmd_check(command[1], cfg, out, err)
    if head == "catalog":
        if len(command) != 2 or command[1] != "list":
            raise ConfigError("catalog: the only action is 'list'")
        return _cmd_catalog_list(cfg, out, err)
    raise ConfigError(f"unknown command {head!r}")


# ---------------------------------------------------------------------------
# Flag parsing
# ---------------------------------------------------------------------------


def _parse_param_value(text: str):
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    if "," in text:
        return [_parse_param_value(part) for part in text.split(",")]
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _build_argparser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="slicevol",
        description="Verify slab-volume estimates on foliated metrics.",
    )
    ap.add_argument("command", nargs="+", help="info | slice-volume | sweep | cylinder | curvature | check <name> | catalog list")
    ap.add_argument("--config", help="TOML config file; flags override it")
    ap.add_argument("--catalog", help="catalog metric name")
    ap.add_argument("--param", action="append", default=[], metavar="KEY=VALUE", help="catalog parameter (repeatable)")
    ap.add_argument("--grid", help="nodes per axis (int or comma list)")
    ap.add_argument("--panels", type=int, help="time-quadrature panels")
    ap.add_argument("--t1", type=float, help="initial slice time")
    ap.add_argument("--t2", type=float, help="final slice time (past checks)")
    ap.add_argument("--tau", type=float, help="remark2 lower CMC time")
    ap.add_argument("--tau2", type=float, help="remark2 upper CMC time")
    ap.add_argument("--ladder", help="explicit end times, comma separated")
    ap.add_argument("--ladder-geometric", metavar="START:STOP:COUNT", help="geometric approach schedule")
    ap.add_argument("--subset", metavar="A:B[,A:B...]", help="box subset per axis")
    ap.add_argument("--tol", type=float, help="margin tolerance")
    ap.add_argument("--format", choices=("csv", "kv"), help="report format")
    ap.add_argument("--cmc", metavar="LO:HI:SAMPLES", help="reparameterization range for remark2")
    return ap


def _merge_flags(cfg: RunConfig, ns: argparse.Namespace) -> RunConfig:
    if ns.catalog:
        if cfg.metric is not None:
            raise ConfigError("metric: give either catalog or an inline metric, not both")
        cfg = replace(cfg, catalog=ns.catalog)
    if ns.param:
        params = dict(cfg.params)
        for item in ns.param:
            if "=" not in item:
                raise ConfigError(f"param: expected KEY=VALUE, got {item!r}")
            key, _, value = item.partition("=")
            params[key.strip()] = _parse_param_value(value.strip())
        cfg = replace(cfg, params=params)
    if ns.grid:
        if "," in ns.grid:
            cfg = replace(cfg, grid_counts=tuple(int(v) for v in ns.grid.split(",")))
        else:
            cfg = replace(cfg, grid_counts=int(ns.grid))
    if ns.panels is not None:
        if ns.panels < 1:
            raise ConfigError("panels: must be >= 1")
        cfg = replace(cfg, panels=ns.panels)
    for key in ("t1", "t2", "tau", "tau2", "tol"):
        value = getattr(ns, key)
        if value is not None:
            cfg = replace(cfg, **{key: float(value)})
    if ns.ladder:
        cfg = replace(
            cfg, ladder=tuple(float(v) for v in ns.ladder.split(",")), ladder_geometric=None
        )
    if ns.ladder_geometric:
        parts = ns.ladder_geometric.split(":")
        if len(parts) != 3:
            raise ConfigError("ladder-geometric: expected START:STOP:COUNT")
        cfg = replace(
            cfg,
            ladder_geometric=(float(parts[0]), float(parts[1]), int(parts[2])),
            ladder=None,
        )
    if ns.subset:
        intervals = []
        for part in ns.subset.split(","):
            lohi = part.split(":")
            if len(lohi) != 2:
                raise ConfigError("subset: expected A:B per axis")
            intervals.append((float(lohi[0]), float(lohi[1])))
        cfg = replace(cfg, subset=tuple(intervals))
    if ns.format:
        cfg = replace(cfg, format=ns.format)
    if ns.cmc:
        parts = ns.cmc.split(":")
        if len(parts) not in (2, 3):
            raise ConfigError("cmc: expected LO:HI[:SAMPLES]")
        cfg = replace(
            cfg,
            cmc_range=(float(parts[0]), float(parts[1])),
            cmc_samples=int(parts[2]) if len(parts) == 3 else cfg.cmc_samples,
        )
    return cfg


def main(argv=None) -> int:
    ns = _build_argparser().parse_args(argv)
    try:
        cfg = load_config(ns.config) if ns.config else RunConfig()
        cfg = _merge_flags(cfg, ns)
        return run(tuple(ns.command), cfg)
    except (
        ConfigError,
        ParseError,
        GeometryError,
        QuadratureError,
        catalog_mod.CatalogError,
        bounds_mod.CmcVerificationError,
        ValueError,
        OSError,
    ) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
