"""Experiment drivers behind the CLI subcommands."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

import floqbound
from floqbound.effective import (
    EffectiveResult,
    bound_ingredients,
    derive_effective,
    generic_bound,
)
from floqbound.fourier_poly import HarmonicPoly
from floqbound.harness.config import ExperimentConfig, TimeSpec
from floqbound.harness.table import ResultTable
from floqbound.propagator import PropagationSettings, distances, propagate_at
from floqbound.rabi import (
    OutsideValidityError,
    RabiParams,
    closed_form_bound_curve,
    rotating_frame_hamiltonian,
    to_omega_normalized,
)

RABI_LABELS = {0: "rwa", 1: "bs", 2: "3rd"}
SLACK_FACTOR = 10.0
SLOPE_MARGIN = 0.3
STEPS_PER_PERIOD_SINGLE = 512
MACHINE_LEVEL = 1e-13


class NumericalCheckError(RuntimeError):
    """A built-in numerical assertion failed (exit code 4 in the CLI)."""


@dataclass(frozen=True)
class Model:
    h: HarmonicPoly
    omega_cap: float
    rabi: RabiParams | None = None

    @property
    def period(self) -> float:
        return 2 * math.pi / self.omega_cap

    @property
    def scale(self) -> float:
        return self.h.sup_norm(self.omega_cap, 256)[0]


def build_model(cfg: ExperimentConfig, omega: float | None = None) -> Model:
    """Model from the config; ``omega`` moves the drive (rabi) or Omega (custom)."""
    if cfg.model == "rabi":
        p = cfg.rabi.params(omega)
        h, w = rotating_frame_hamiltonian(p)
        return Model(h, w, p)
    return Model(cfg.custom.hamiltonian(), cfg.custom.omega if omega is None else omega)


def order_label(k: int, model: Model) -> str:
    if model.rabi is not None and k in RABI_LABELS:
        return RABI_LABELS[k]
    return f"L{k}"


def _metadata(cfg: ExperimentConfig, command: str, **extra) -> dict:
    meta = {
        "command": command,
        "version": floqbound.__version__,
        "config": cfg.to_dict(),
    }
    meta.update(extra)
    return meta


def _closed_form(model: Model, k: int):
    if model.rabi is None:
        return None
    return closed_form_bound_curve(model.rabi, k)


def _effective(model: Model, orders) -> dict[int, EffectiveResult]:
    return {k: derive_effective(model.h, k) for k in orders}


def _fit_slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


# derive -----------------------------------------------------------------------


def _pairs(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def cmd_derive(cfg: ExperimentConfig) -> dict:
    """JSON-ready summary of the effective Hamiltonian and its bound ingredients."""
    model = build_model(cfg)
    r = derive_effective(model.h, cfg.order)
    ing = bound_ingredients(r, model.omega_cap, cfg.grid_points)
    numeric, certified = generic_bound(ing)
    out = {
        "model": cfg.model,
        "order": cfg.order,
        "omega_cap": model.omega_cap,
        "h_eff_terms": [_pairs(c) for c in r.h_eff_terms],
        "h_eff": _pairs(r.h_eff(model.omega_cap)),
        "condition_residual_by_degree": {str(j): v for j, v in r.residual_by_degree().items()},
        "bound_ingredients": {
            "sup_actions": ing.sup_actions,
            "sup_actions_certified": ing.sup_actions_certified,
            "avg_residual": ing.avg_residual,
            "sup_k_tail": ing.sup_k_tail,
            "sup_k_tail_certified": ing.sup_k_tail_certified,
        },
        "generic_bound_numeric": {"offset": numeric.offset, "slope": numeric.slope},
        "generic_bound_certified": {"offset": certified.offset, "slope": certified.slope},
        "version": floqbound.__version__,
    }
    if model.rabi is not None:
        out["drive_omega"] = model.rabi.omega
        out["h_eff_terms_omega_normalized"] = [_pairs(c) for c in to_omega_normalized(r.h_eff_terms)]
    return out


def format_derive(summary: dict) -> str:
    def mat(pairs):
        rows = []
        for row in pairs:
            rows.append("  [" + ", ".join(f"{re:+.12g}{im:+.12g}j" for re, im in row) + "]")
        return "\n".join(rows)

    lines = [f"model={summary['model']} order={summary['order']} Omega={summary['omega_cap']:.12g}"]
    key = "h_eff_terms_omega_normalized" if "h_eff_terms_omega_normalized" in summary else "h_eff_terms"
    unit = "omega" if key.endswith("normalized") else "Omega"
    for k, m in enumerate(summary[key]):
        lines.append(f"H_eff^({k})  [coefficient of {unit}^-{k}]")
        lines.append(mat(m))
    lines.append("H_eff (summed)")
    lines.append(mat(summary["h_eff"]))
    lines.append("condition residual by lambda-degree:")
    for j, v in summary["condition_residual_by_degree"].items():
        lines.append(f"  degree {j}: {v:.6e}")
    lines.append("bound ingredients:")
    for k, v in summary["bound_ingredients"].items():
        lines.append(f"  {k}: {v:.12g}")
    c = summary["generic_bound_certified"]
    lines.append(f"certified bound: {c['offset']:.12g} + {c['slope']:.12g} * t")
    return "\n".join(lines) + "\n"


# time-resolved comparison ----------------------------------------------------


def _distance_table(cfg, model, times, orders, with_bounds, with_generic, strict, command, extra_cols=None):
    settings = cfg.integrator.settings()
    if settings.step is None:
        settings = replace(settings, step=PropagationSettings().resolve_step(model.h, model.omega_cap))
    traj = propagate_at(model.h, model.omega_cap, times, settings)
    results = _effective(model, orders)
    cols = dict(extra_cols or {})
    cols["t"] = traj.times
    dist, bounds, omitted = {}, {}, {}
    for k in orders:
        label = order_label(k, model)
        dist[label] = distances(traj, results[k].h_eff(model.omega_cap))
        cols[f"dist_{label}"] = dist[label]
    if with_bounds and model.rabi is not None:
        for k in orders:
            label = order_label(k, model)
            try:
                curve = _closed_form(model, k)
            except OutsideValidityError as exc:
                if strict:
                    raise
                omitted[f"bound_{label}"] = str(exc)
                continue
            bounds[label] = curve(traj.times)
            cols[f"bound_{label}"] = bounds[label]
    if with_generic:
        for k in orders:
            label = order_label(k, model)
            _, cert = generic_bound(bound_ingredients(results[k], model.omega_cap, cfg.grid_points))
            cols[f"bound_generic_{label}"] = cert(traj.times)

    est = traj.error_estimate
    residual = float(est.max()) if est is not None else None
    slack = SLACK_FACTOR * residual if residual is not None else 0.0
    checks = {}
    for name in cols:
        if name.startswith("bound_"):
            label = name.removeprefix("bound_generic_").removeprefix("bound_")
            margin = cols[name] + slack - dist[label]
            checks[name] = {"min_margin": float(margin.min()), "dominates": bool(margin.min() >= 0)}
    meta = _metadata(
        cfg,
        command,
        step=settings.step,
        method=settings.method,
        integrator_residual_estimate=residual,
        slack=slack,
        orders=list(orders),
        omitted_bounds=omitted,
        bound_checks=checks,
    )
    return ResultTable(cols, meta)


def cmd_compare(cfg: ExperimentConfig, strict: bool = False) -> ResultTable:
    """Distances for orders ``0..L`` plus closed-form and certified generic bounds."""
    model = build_model(cfg)
    return _distance_table(
        cfg, model, cfg.times.grid(), range(cfg.order + 1), True, True, strict, "compare"
    )


def cmd_strobe(cfg: ExperimentConfig, strict: bool = False, start: int = 1) -> ResultTable:
    """Distances at ``t = m T`` for ``m = start..periods``."""
    model = build_model(cfg)
    m = np.arange(start, cfg.strobe.periods + 1)
    times = m * model.period
    return _distance_table(
        cfg, model, times, range(cfg.order + 1), False, False, strict, "strobe", {"m": m}
    )


# frequency sweep ---------------------------------------------------------------


def _sweep_point(args):
    cfg, omega, orders = args
    model = build_model(cfg, omega)
    settings = cfg.integrator.settings(richardson=False)
    results = _effective(model, orders)
    fixed_t = cfg.sweep.fixed_t
    traj = propagate_at(model.h, model.omega_cap, [fixed_t], settings)
    step1 = settings.step or min(
        settings.resolve_step(model.h, model.omega_cap), model.period / STEPS_PER_PERIOD_SINGLE
    )
    one = propagate_at(model.h, model.omega_cap, [model.period], replace(settings, step=step1))
    row = {}
    for k in orders:
        label = order_label(k, model)
        h_eff = results[k].h_eff(model.omega_cap)
        row[f"dist_{label}"] = float(distances(traj, h_eff)[0])
        row[f"period_dist_{label}"] = float(distances(one, h_eff)[0])
        try:
            curve = _closed_form(model, k)
            if curve is not None:
                row[f"bound_{label}"] = float(curve(fixed_t))
        except OutsideValidityError as exc:
            row[f"bound_{label}"] = exc
    return row


def _map(fn, items, workers):
    workers = workers or os.cpu_count() or 1
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def cmd_sweep_omega(cfg: ExperimentConfig, strict: bool = False) -> ResultTable:
    """Fixed-time and single-period distances against the drive frequency.

    Log-log least-squares slopes are reported for both; the single-period slope
    of order ``L`` must not exceed ``-(L + 1) + 0.3``.
    """
    sw = cfg.sweep
    if sw.points < 4:
        raise ValueError("sweep needs at least 4 points for a slope fit")
    base = build_model(cfg)
    g_scale = base.rabi.g if base.rabi is not None else base.scale
    if sw.omega_min < g_scale:
        raise ValueError(f"omega_min={sw.omega_min} is below the coupling scale {g_scale:.6g}")
    omegas = sw.grid()
    orders = list(range(cfg.order + 1))
    rows = _map(_sweep_point, [(cfg, float(w), orders) for w in omegas], cfg.workers)

    cols = {"omega": omegas}
    omitted = {}
    group = {"dist_": 0, "period_dist_": 1, "bound_": 2}
    names = sorted(rows[0], key=lambda n: next(v for p, v in group.items() if n.startswith(p)))
    for name in names:
        values = [r[name] for r in rows]
        bad = [v for v in values if isinstance(v, Exception)]
        if bad:
            if strict:
                raise bad[0]
            omitted[name] = str(bad[0])
            continue
        cols[name] = np.array(values)

    # without an oscillating part every order is exact and only roundoff remains
    exact = base.h.deviation().is_zero()
    slopes, checks, notes = {}, {}, {}
    for k in orders:
        label = order_label(k, base)
        for prefix in ("dist_", "period_dist_"):
            y = cols[prefix + label]
            if exact or np.max(y) <= MACHINE_LEVEL:
                notes[prefix + label] = "distances at machine-precision level; slope fit skipped"
                continue
            slopes[prefix + label] = _fit_slope(omegas, np.maximum(y, np.finfo(float).tiny))
        if "period_dist_" + label in slopes:
            limit = -(k + 1) + SLOPE_MARGIN
            s = slopes["period_dist_" + label]
            checks["period_dist_" + label] = {"slope": s, "limit": limit, "passed": bool(s <= limit)}
    meta = _metadata(
        cfg,
        "sweep-omega",
        fixed_t=sw.fixed_t,
        slopes=slopes,
        slope_checks=checks,
        notes=notes,
        omitted_bounds=omitted,
    )
    return ResultTable(cols, meta)


def failed_checks(table: ResultTable) -> list[str]:
    """Names of built-in numerical checks that did not pass."""
    bad = [k for k, v in table.metadata.get("slope_checks", {}).items() if not v["passed"]]
    bad += [k for k, v in table.metadata.get("bound_checks", {}).items() if not v["dominates"]]
    return bad


# figures -----------------------------------------------------------------------

FIG2_PERIODS = 10
FIG2_SAMPLES_PER_PERIOD = 100


def cmd_fig(cfg: ExperimentConfig, which: int, strict: bool = False) -> ResultTable:
    """Data behind figures 1-5 of the Rabi study (g=1, omega=5 unless overridden)."""
    if which not in (1, 2, 3, 4, 5):
        raise ValueError(f"figure must be 1..5, got {which}")
    if cfg.model != "rabi":
        raise ValueError("figure reproduction requires the rabi model")
    model = build_model(cfg)
    if which == 1:
        table = _distance_table(cfg, model, cfg.times.grid(), (0, 1), False, False, strict, "fig1")
    elif which == 2:
        n = FIG2_PERIODS * FIG2_SAMPLES_PER_PERIOD
        times = np.arange(n + 1) * (model.period / FIG2_SAMPLES_PER_PERIOD)
        table = _distance_table(cfg, model, times, (0, 1), False, False, strict, "fig2")
    elif which == 3:
        table = _distance_table(cfg, model, cfg.times.grid(), (0, 1, 2), True, False, strict, "fig3")
    elif which == 4:
        full = cmd_sweep_omega(replace(cfg, order=2), strict)
        keep = {k: v for k, v in full.columns.items() if not k.startswith("period_")}
        meta = dict(full.metadata, command="fig4")
        table = ResultTable(keep, meta)
    else:
        periods = int(math.floor(cfg.times.t_max / model.period + 1e-9))
        strobe_cfg = replace(cfg, strobe=replace(cfg.strobe, periods=periods), order=2)
        table = cmd_strobe(strobe_cfg, strict)
        table.metadata["command"] = "fig5"
    table.metadata["figure"] = which
    return table


def default_fig_config() -> ExperimentConfig:
    return ExperimentConfig(times=TimeSpec(100.0, 1000))
