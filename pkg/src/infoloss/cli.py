"""Experiment runner: JSON config in, JSON report + CSV curve out.

A config is one nested key-value record naming the distribution, the system,
the resolution ladder, and the estimator settings; the report echoes it back,
so one file carries the whole provenance of a run. Identical config + seed
produce byte-identical CSV output regardless of the worker count
(INFOLOSS_WORKERS parallelizes sampling only).

Verbs:
  run <config> [--seed N]                 one experiment
  sweep <config> --param name --values v1,v2,...
  catalog                                 built-in systems and distributions
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .dimension import conditional_dimension, marginal_dimension, \
    output_dimension
from .entropy import DEFAULT_M_FACTOR, component_curves, entropy_curve
from .errors import ConfigurationError, DataError, InsufficientDataError, \
    UndefinedRelativeLossError
from .loss import LossReport, absolute_loss, componentwise_bound, \
    conditional_growth, conjecture_gap, relative_loss
from .measure import UniformBox, distribution_from_config
from .reconstruct import error_curve, fano_check
from .systems import CenterClipper, Identity, Magnitude, MagnitudeClipper, \
    Square, UniformQuantizer, analytic_relative_loss, system_from_config

CSV_COLUMNS = (
    "experiment_id", "system", "distribution", "k", "n", "samples",
    "H_marginal_bits", "H_conditional_bits", "ratio", "reliable",
    "d_X", "d_cond", "relative_ratio", "relative_slope", "analytic",
    "absolute", "bound_joint", "bound_marginal", "conjecture_gap",
    "Pe_max", "fano_satisfied")

_CONFIG_KEYS = {
    "experiment_id", "distribution", "system", "k_min", "k_max",
    "sample_count", "seed", "mode", "m_factor", "miller_madow", "checks",
    "output"}
_CHECK_KEYS = {"fano", "componentwise", "conjecture"}


@dataclass(frozen=True)
class Checks:
    fano: bool = False
    componentwise: bool = False
    conjecture: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    distribution: object
    system: object
    experiment_id: str = "run"
    k_min: int = 4
    k_max: int = 12
    sample_count: int = 10 ** 6
    seed: int = 20240601
    mode: str = "auto"
    m_factor: int = DEFAULT_M_FACTOR
    miller_madow: bool = False
    checks: Checks = field(default_factory=Checks)
    output: str | None = None

    def __post_init__(self):
        if not (1 <= self.k_min < self.k_max <= 20):
            raise ConfigurationError(
                f"need 1 <= k_min < k_max <= 20, got [{self.k_min}, {self.k_max}]")
        if self.sample_count < 1000:
            raise ConfigurationError("sample_count must be >= 1000")
        if self.m_factor < 2:
            raise ConfigurationError("m_factor must be >= 2")

    @property
    def ladder(self):
        return range(self.k_min, self.k_max + 1)


def parse_config(raw: dict) -> ExperimentConfig:
    """Validate a raw config record; unknown keys are named in the error."""
    if not isinstance(raw, dict):
        raise ConfigurationError("config must be a JSON object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigurationError(f"unknown config key(s): {sorted(unknown)}")
    for key in ("distribution", "system"):
        if key not in raw:
            raise ConfigurationError(f"config is missing key '{key}'")
    checks_raw = raw.get("checks", {})
    bad = set(checks_raw) - _CHECK_KEYS
    if bad:
        raise ConfigurationError(f"unknown checks key(s): {sorted(bad)}")
    kwargs = {k: raw[k] for k in raw if k not in ("distribution", "system", "checks")}
    return ExperimentConfig(
        distribution=distribution_from_config(raw["distribution"]),
        system=system_from_config(raw["system"]),
        checks=Checks(**{k: bool(v) for k, v in checks_raw.items()}),
        **kwargs)


def load_config(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from None


@dataclass
class RunReport:
    """Everything one run produced, traceable to the echoed config."""

    config: dict
    curve: object
    fit_marginal: object
    fit_conditional: object
    fit_output: object
    loss: LossReport
    pe_sequence: list
    wall_time_s: float
    version: str
    flags: list


def run_experiment(config: ExperimentConfig) -> RunReport:
    """Execute the full pipeline described by ``config`` and (when an output
    path is set) write the JSON report and curve CSV."""
    t0 = time.perf_counter()
    dist, system = config.distribution, config.system

    curve = entropy_curve(dist, system, config.ladder, config.sample_count,
                          config.seed, mode=config.mode,
                          m_factor=config.m_factor,
                          miller_madow=config.miller_madow)
    fit_marg = marginal_dimension(curve)
    fit_cond = conditional_dimension(curve)
    rel = relative_loss(curve)
    absolute = absolute_loss(curve)
    analytic = analytic_relative_loss(system, dist)

    fit_out = None
    gap = None
    if config.checks.conjecture:
        fit_out = output_dimension(curve)
        gap = conjecture_gap(rel.slope, fit_marg, fit_out)

    bounds = None
    if config.checks.componentwise:
        comp = component_curves(dist, system, config.ladder,
                                config.sample_count, config.seed,
                                mode=config.mode, m_factor=config.m_factor)
        bounds = componentwise_bound(comp)

    pe_seq = []
    fano = None
    if config.checks.fano:
        pe_seq = error_curve(dist, system, config.ladder, config.sample_count,
                             config.sample_count, config.seed + 1,
                             config.seed + 2)
        fano = fano_check(rel.slope, pe_seq)

    report = RunReport(
        config=config_echo(config),
        curve=curve, fit_marginal=fit_marg, fit_conditional=fit_cond,
        fit_output=fit_out,
        loss=LossReport(
            relative_ratio=rel.ratio, relative_slope=rel.slope,
            relative_slope_raw=rel.slope_raw, analytic=analytic,
            absolute=absolute, conditional_growth=conditional_growth(curve),
            estimator_error=(None if analytic is None
                             else abs(rel.slope - analytic)),
            componentwise=bounds, conjecture_gap=gap, fano=fano),
        pe_sequence=pe_seq,
        wall_time_s=time.perf_counter() - t0,
        version=__version__,
        flags=[f"row k={r.k} unreliable ({r.distinct_bins} occupied bins "
               f"for {config.sample_count} samples)"
               for r in curve.rows if not r.reliable])
    if config.output:
        write_outputs(config.output, [report])
    return report


def config_echo(config: ExperimentConfig) -> dict:
    return {
        "experiment_id": config.experiment_id,
        "distribution": config.distribution.to_config(),
        "system": config.system.to_config(),
        "k_min": config.k_min, "k_max": config.k_max,
        "sample_count": config.sample_count, "seed": config.seed,
        "mode": config.mode, "m_factor": config.m_factor,
        "miller_madow": config.miller_madow,
        "checks": {"fano": config.checks.fano,
                   "componentwise": config.checks.componentwise,
                   "conjecture": config.checks.conjecture},
        "output": config.output}


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _num(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "diverging" if math.isinf(v) else repr(v)
    return str(v)


def report_csv_rows(report: RunReport) -> list:
    """Curve rows followed by one trailing report row (fixed column set)."""
    cfg = report.config
    ident = [cfg["experiment_id"], report.curve.system_label,
             report.curve.dist_label]
    rows = []
    for r in report.curve.rows:
        rows.append(ident + [
            str(r.k), str(r.n), str(report.curve.sample_count),
            _num(r.h_marginal), _num(r.h_conditional), _num(r.ratio),
            "1" if r.reliable else "0"] + [""] * 11)
    loss = report.loss
    bounds = loss.componentwise
    rows.append(ident + [""] * 7 + [
        _num(report.fit_marginal.slope), _num(report.fit_conditional.slope),
        _num(loss.relative_ratio), _num(loss.relative_slope),
        _num(loss.analytic), _num(loss.absolute),
        _num(None if bounds is None else bounds.bound_joint),
        _num(None if bounds is None else bounds.bound_marginal),
        _num(loss.conjecture_gap),
        _num(None if loss.fano is None else loss.fano.pe_max),
        _num(None if loss.fano is None else loss.fano.satisfied)])
    return rows


def csv_text(reports) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for rep in reports:
        for row in report_csv_rows(rep):
            lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _fit_dict(fit):
    if fit is None:
        return None
    return {"slope": fit.slope, "intercept": fit.intercept,
            "residual": fit.residual, "rows_used": list(fit.rows_used)}


def report_json_dict(report: RunReport) -> dict:
    loss = report.loss
    bounds = loss.componentwise
    fano = loss.fano
    return {
        "config": report.config,
        "curve": {
            "mode": report.curve.mode,
            "sample_count": report.curve.sample_count,
            "seed": report.curve.seed,
            "rows": [{
                "k": r.k, "n": r.n, "H_marginal_bits": r.h_marginal,
                "H_conditional_bits": r.h_conditional,
                "H_output_bits": r.h_output, "ratio": r.ratio,
                "distinct_bins": r.distinct_bins,
                "distinct_keys": r.distinct_keys,
                "samples_per_bin": report.curve.sample_count
                / max(r.distinct_bins, 1),
                "reliable": r.reliable} for r in report.curve.rows]},
        "fits": {"marginal": _fit_dict(report.fit_marginal),
                 "conditional": _fit_dict(report.fit_conditional),
                 "output": _fit_dict(report.fit_output)},
        "loss": {
            "relative_ratio": loss.relative_ratio,
            "relative_slope": loss.relative_slope,
            "relative_slope_raw": loss.relative_slope_raw,
            "analytic": loss.analytic,
            "absolute": "diverging" if loss.diverging else loss.absolute,
            "conditional_growth_bits_per_step": loss.conditional_growth,
            "estimator_error": loss.estimator_error,
            "componentwise": None if bounds is None else {
                "bound_joint": bounds.bound_joint,
                "bound_marginal": bounds.bound_marginal,
                "per_axis_vs_full": list(bounds.per_axis_vs_full),
                "per_axis_vs_own": list(bounds.per_axis_vs_own)},
            "conjecture_gap": loss.conjecture_gap,
            "fano": None if fano is None else {
                "satisfied": fano.satisfied, "margin": fano.margin,
                "pe_max": fano.pe_max, "monotone": fano.monotone}},
        "pe_sequence": [[k, pe] for k, pe in report.pe_sequence],
        "wall_time_s": report.wall_time_s,
        "version": report.version,
        "flags": report.flags}


def write_outputs(stem, reports, sweep_status=None):
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    stem.with_suffix(".csv").write_text(csv_text(reports), encoding="utf-8")
    payload = [report_json_dict(r) for r in reports]
    doc = payload[0] if len(reports) == 1 and sweep_status is None else {
        "runs": payload, "sweep": sweep_status}
    stem.with_suffix(".json").write_text(
        json.dumps(doc, indent=2) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def _set_param(raw: dict, param: str, value):
    """Set a (possibly dotted) parameter in a raw config dict; bare names are
    searched at the top level, then under system, then distribution."""
    if "." in param:
        path = param.split(".")
        node = raw
        for p in path[:-1]:
            if not isinstance(node, dict) or p not in node:
                raise ConfigurationError(f"sweep parameter '{param}' not in config")
            node = node[p]
        if not isinstance(node, dict) or path[-1] not in node:
            raise ConfigurationError(f"sweep parameter '{param}' not in config")
        node[path[-1]] = value
        return
    key = param.replace("-", "_")
    for node in (raw, raw.get("system", {}), raw.get("distribution", {})):
        if isinstance(node, dict) and key in node:
            node[key] = value
            return
    raise ConfigurationError(f"sweep parameter '{param}' not in config")


def sweep(raw_config: dict, param: str, values, output=None):
    """Run the config once per parameter value; rows are tagged with the
    value. A failing value aborts the sweep; completed runs are preserved in
    the output and the failure is flagged in the JSON status block."""
    reports = []
    status = {"parameter": param, "completed": [], "failed": None}
    base_id = raw_config.get("experiment_id", "run")
    out_stem = output or raw_config.get("output")
    try:
        for value in values:
            raw = copy.deepcopy(raw_config)
            raw["experiment_id"] = f"{base_id}[{param}={value}]"
            raw.pop("output", None)
            _set_param(raw, param, value)
            reports.append(run_experiment(parse_config(raw)))
            status["completed"].append(value)
    except (ConfigurationError, DataError, InsufficientDataError,
            UndefinedRelativeLossError) as exc:
        status["failed"] = {"value": value, "error": f"{type(exc).__name__}: {exc}"}
        if out_stem:
            write_outputs(out_stem, reports, sweep_status=status)
        raise
    if out_stem:
        write_outputs(out_stem, reports, sweep_status=status)
    return reports


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

def catalog_text() -> str:
    demos = [
        (Identity(), UniformBox([0.0], [1.0])),
        (CenterClipper(0.5), UniformBox([-1.0], [1.0])),
        (MagnitudeClipper(0.5), UniformBox([-1.0], [1.0])),
        (UniformQuantizer(8, 0.0, 1.0), UniformBox([0.0], [1.0])),
        (Square(), UniformBox([-1.0], [1.0])),
        (Magnitude(), UniformBox([-1.0], [1.0])),
    ]
    lines = ["built-in systems (config kinds):",
             "  identity | affine(scale, offset) | center-clipper(c) |"
             " magnitude-clipper(c)",
             "  uniform-quantizer(levels, lo, hi) | square | magnitude",
             "  coordinate-projection(keep, dim_in) | componentwise(parts) |"
             " composition(inner, outer)",
             "",
             "built-in distributions (config kinds):",
             "  uniform-box(lo, hi) | truncated-gaussian(mean, sigma, lo, hi)",
             "  finite-discrete(points, weights) | mixture(components) |"
             " product(factors)",
             "",
             "analytic relative loss where the closed form applies:"]
    for system, dist in demos:
        val = analytic_relative_loss(system, dist)
        shown = "n/a" if val is None else f"{val:.4f}"
        lines.append(f"  {system.label():30s} on {dist.label():18s} -> {shown}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _parse_values(text: str):
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            out.append(json.loads(tok))
        except json.JSONDecodeError:
            out.append(tok)
    if not out:
        raise ConfigurationError("--values is empty")
    return out


def _summary(report: RunReport) -> str:
    loss = report.loss
    parts = [f"{report.config['experiment_id']}:",
             f"d(X)={report.fit_marginal.slope:.3f}",
             f"loss slope={loss.relative_slope:.3f}",
             f"ratio={loss.relative_ratio:.3f}",
             "absolute=" + ("diverging" if loss.diverging
                            else f"{loss.absolute:.3f} bits")]
    if loss.analytic is not None:
        parts.append(f"analytic={loss.analytic:.3f}")
    if loss.fano is not None:
        parts.append(f"Pe_max={loss.fano.pe_max:.4f} "
                     f"fano={'ok' if loss.fano.satisfied else 'VIOLATED'}")
    parts.append(f"[{report.wall_time_s:.1f}s]")
    return " ".join(parts)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="infoloss",
        description="Estimate information dimension and relative information "
                    "loss of static maps from seeded Monte Carlo runs.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("config", help="path to a JSON experiment config")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the config seed")

    p_sweep = sub.add_parser("sweep", help="run a config once per value")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--param", required=True,
                         help="config field to vary (dotted path or bare name)")
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated values")

    sub.add_parser("catalog", help="list built-in systems and distributions")

    args = parser.parse_args(argv)
    try:
        if args.verb == "catalog":
            print(catalog_text())
            return 0
        raw = load_config(args.config)
        if args.verb == "run":
            if args.seed is not None:
                raw["seed"] = args.seed
            report = run_experiment(parse_config(raw))
            print(_summary(report))
            if report.config["output"]:
                print(f"wrote {report.config['output']}.json and .csv")
            return 0
        reports = sweep(raw, args.param, _parse_values(args.values))
        for rep in reports:
            print(_summary(rep))
        return 0
    except (ConfigurationError, DataError, InsufficientDataError,
            UndefinedRelativeLossError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
