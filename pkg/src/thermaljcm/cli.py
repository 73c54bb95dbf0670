"""Command-line frontend: figure-data reproduction and validation suites.

Subcommands emit machine-readable tables (CSV or JSON) for the excitation
probability time series, the period-vs-temperature sweep, the coherence map,
the closed-form approximation check, and the oracle validation report.
Identical configuration yields byte-identical output: floats are printed
with 12 significant digits and all reductions run in fixed order.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import oracle, perturbation, validation
from .analysis import (
    SAMPLES_PER_CYCLE,
    approx_cos_sum,
    period_vs_temperature_sweep,
)
from .coherence import PHYS_EPS, coherence_values, project_values
from .model import (
    ModelParams,
    rabi_period,
    t0_period,
    thermal_from_inv_beta,
)
from .oracle import FockTruncation
from .perturbation import TruncationPolicy

__all__ = ["main", "ConfigError", "RunConfig", "parse_config", "PRESETS", "build_preset"]

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_NO_REVIVAL = 4


class ConfigError(ValueError):
    """Invalid run configuration; message carries the offending field path."""


@dataclass
class RunConfig:
    """Parsed, validated run configuration (canonical form)."""

    params: ModelParams
    inv_betas: list[float]
    t_start: float | None = None
    t_stop: float | None = None
    dt: float | None = None
    n_max: int = 250
    tail_tol: float | None = None
    adaptive: bool = False
    with_oracle: bool = False
    n_fock: int | None = None
    alpha_threshold: float = 2.5
    out_format: str = "csv"

    @property
    def trunc(self) -> TruncationPolicy:
        if self.adaptive:
            return TruncationPolicy.adaptive(self.params, self.tail_tol or 1e-12)
        return TruncationPolicy(n_max=self.n_max, tail_tol=self.tail_tol)

    def canonical(self) -> dict:
        alpha = self.params.alpha
        return {
            "schema": SCHEMA_VERSION,
            "model": {
                "l": self.params.l,
                "g": self.params.g,
                "omega0": self.params.omega0,
                "omega": self.params.omega,
                "alpha": alpha.real if alpha.imag == 0 else [alpha.real, alpha.imag],
            },
            "thermal": {"inv_beta_grid": list(self.inv_betas)},
            "grid": {"t_start": self.t_start, "t_stop": self.t_stop, "dt": self.dt},
            "truncation": {"n_max": self.n_max, "tail_tol": self.tail_tol,
                           "adaptive": self.adaptive},
            "oracle": {"with_oracle": self.with_oracle, "n_fock": self.n_fock,
                       "alpha_threshold": self.alpha_threshold},
            "output": {"format": self.out_format},
        }


def _expect(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise ConfigError(f"{path}: {message}")


def _get_number(section: dict, path: str, key: str, default=None, required=False):
    if key not in section or section[key] is None:
        _expect(not required, f"{path}.{key}", "required field is missing")
        return default
    value = section[key]
    _expect(isinstance(value, (int, float)) and not isinstance(value, bool),
            f"{path}.{key}", f"expected a number, got {value!r}")
    return float(value)


def parse_config(data: dict) -> RunConfig:
    """Validate a configuration document and return its canonical form."""
    _expect(isinstance(data, dict), "config", "document must be a JSON object")
    schema = data.get("schema", SCHEMA_VERSION)
    _expect(schema == SCHEMA_VERSION, "schema", f"unsupported version {schema!r}")
    unknown = set(data) - {"schema", "model", "thermal", "grid", "truncation",
                           "oracle", "output"}
    _expect(not unknown, "config", f"unknown sections {sorted(unknown)}")

    model = data.get("model")
    _expect(isinstance(model, dict), "model", "section is required")
    l_raw = model.get("l")
    _expect(isinstance(l_raw, int) and not isinstance(l_raw, bool) and l_raw >= 1,
            "model.l", "must be an integer >= 1")
    alpha_raw = model.get("alpha", 0.0)
    if isinstance(alpha_raw, (list, tuple)):
        _expect(len(alpha_raw) == 2 and all(isinstance(v, (int, float)) for v in alpha_raw),
                "model.alpha", "complex amplitude must be [re, im]")
        alpha = complex(alpha_raw[0], alpha_raw[1])
    else:
        _expect(isinstance(alpha_raw, (int, float)) and not isinstance(alpha_raw, bool),
                "model.alpha", f"expected a number or [re, im], got {alpha_raw!r}")
        alpha = complex(alpha_raw)
    try:
        params = ModelParams(
            l=l_raw,
            g=_get_number(model, "model", "g", required=True),
            omega0=_get_number(model, "model", "omega0", required=True),
            omega=_get_number(model, "model", "omega", required=True),
            alpha=alpha,
        )
    except ValueError as exc:
        raise ConfigError(f"model: {exc}") from exc

    thermal = data.get("thermal", {})
    _expect(isinstance(thermal, dict), "thermal", "must be an object")
    if "inv_beta_grid" in thermal:
        grid_raw = thermal["inv_beta_grid"]
        _expect(isinstance(grid_raw, (list, tuple)) and len(grid_raw) > 0,
                "thermal.inv_beta_grid", "must be a non-empty list")
        inv_betas = []
        for i, v in enumerate(grid_raw):
            _expect(isinstance(v, (int, float)) and not isinstance(v, bool) and v >= 0,
                    f"thermal.inv_beta_grid[{i}]", "temperatures must be numbers >= 0")
            inv_betas.append(float(v))
    else:
        ib = _get_number(thermal, "thermal", "inv_beta", default=0.0)
        _expect(ib >= 0, "thermal.inv_beta", "temperature must be >= 0")
        inv_betas = [ib]

    grid = data.get("grid", {}) or {}
    _expect(isinstance(grid, dict), "grid", "must be an object")
    t_start = _get_number(grid, "grid", "t_start")
    t_stop = _get_number(grid, "grid", "t_stop")
    dt = _get_number(grid, "grid", "dt")
    if dt is not None:
        _expect(dt > 0, "grid.dt", "must be positive")
    if t_stop is not None and t_start is not None:
        _expect(t_stop >= t_start, "grid.t_stop", "must be >= t_start")

    truncation = data.get("truncation", {}) or {}
    _expect(isinstance(truncation, dict), "truncation", "must be an object")
    n_max_raw = truncation.get("n_max", 250)
    _expect(isinstance(n_max_raw, int) and not isinstance(n_max_raw, bool) and n_max_raw >= 1,
            "truncation.n_max", "must be an integer >= 1")
    tail_tol = _get_number(truncation, "truncation", "tail_tol")
    adaptive = truncation.get("adaptive", False)
    _expect(isinstance(adaptive, bool), "truncation.adaptive", "must be a boolean")

    oracle_cfg = data.get("oracle", {}) or {}
    _expect(isinstance(oracle_cfg, dict), "oracle", "must be an object")
    with_oracle = oracle_cfg.get("with_oracle", False)
    _expect(isinstance(with_oracle, bool), "oracle.with_oracle", "must be a boolean")
    n_fock = oracle_cfg.get("n_fock")
    if n_fock is not None:
        _expect(isinstance(n_fock, int) and not isinstance(n_fock, bool) and n_fock >= 2,
                "oracle.n_fock", "must be an integer >= 2")
    alpha_threshold = _get_number(oracle_cfg, "oracle", "alpha_threshold", default=2.5)

    output = data.get("output", {}) or {}
    _expect(isinstance(output, dict), "output", "must be an object")
    out_format = output.get("format", "csv")
    _expect(out_format in ("csv", "json"), "output.format", "must be 'csv' or 'json'")

    return RunConfig(params=params, inv_betas=inv_betas, t_start=t_start,
                     t_stop=t_stop, dt=dt, n_max=n_max_raw, tail_tol=tail_tol,
                     adaptive=adaptive, with_oracle=with_oracle, n_fock=n_fock,
                     alpha_threshold=alpha_threshold, out_format=out_format)


# ---------------------------------------------------------------------------
# figure presets (caption parameter sets; g = omega0 = omega = 1 throughout)

_FIG1 = {"fig1a": (1, 6.0), "fig1b": (2, 7.0), "fig1c": (3, 7.0), "fig1d": (4, 8.0)}
_SWEEP_LS = {"fig3a": 1, "fig3b": 2, "fig3c": 3, "fig3d": 4}
_MAP_LS = {"fig4a": 1, "fig4b": 2, "fig4c": 3, "fig4d": 4}


def _base_model(l: int, alpha: float) -> dict:
    return {"l": l, "g": 1.0, "omega0": 1.0, "omega": 1.0, "alpha": alpha}


def build_preset(name: str) -> dict:
    """Configuration document of a named built-in figure preset."""
    if name in _FIG1:
        l, alpha = _FIG1[name]
        params = ModelParams(**_base_model(l, alpha))
        return {
            "schema": SCHEMA_VERSION,
            "model": _base_model(l, alpha),
            "thermal": {"inv_beta": 0.1},
            "grid": {"t_start": 0.0, "t_stop": 1.35 * t0_period(params),
                     "dt": rabi_period(params) / SAMPLES_PER_CYCLE},
            # the published truncation leaves a ~1e-7 tail at alpha = 8
            "truncation": {"n_max": 110, "tail_tol": 1e-6},
        }
    if name == "fig2":
        return {
            "schema": SCHEMA_VERSION,
            "model": _base_model(1, 0.2),
            "thermal": {"inv_beta": 0.1},
            "grid": {"t_start": 0.0, "t_stop": 100.0, "dt": 0.02},
            "truncation": {"n_max": 80},
        }
    if name in _SWEEP_LS:
        l = _SWEEP_LS[name]
        return {
            "schema": SCHEMA_VERSION,
            "model": _base_model(l, 12.0),
            "thermal": {"inv_beta_grid": [round(0.02 * i, 2) for i in range(9)]},
            "truncation": {"n_max": 250},
        }
    if name in _MAP_LS:
        l = _MAP_LS[name]
        params = ModelParams(**_base_model(l, 12.0))
        return {
            "schema": SCHEMA_VERSION,
            "model": _base_model(l, 12.0),
            "thermal": {"inv_beta_grid": [round(0.04 * i, 2) for i in range(5)]},
            # desk-scale grid density; pass --dt for the full-density map
            "grid": {"t_start": 0.0, "t_stop": 3.35 * t0_period(params),
                     "dt": rabi_period(params) / 20.0},
            "truncation": {"n_max": 250},
        }
    raise ConfigError(f"preset: unknown name {name!r}")


PRESETS = tuple(sorted([*_FIG1, "fig2", *_SWEEP_LS, *_MAP_LS]))


# ---------------------------------------------------------------------------
# output helpers

def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return "nan"
        return f"{value:.12g}"
    return str(value)


def _write_table(stream, columns: list[str], rows: list[tuple], out_format: str) -> None:
    if out_format == "csv":
        import csv

        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    else:
        doc = {"columns": columns,
               "rows": [[_coerce_json(v) for v in row] for row in rows]}
        json.dump(doc, stream, indent=2, sort_keys=True)
        stream.write("\n")


def _coerce_json(value):
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return None if math.isnan(value) else float(f"{value:.12g}")
    return value


def _default_pe_grid(config: RunConfig) -> np.ndarray:
    t0 = config.t_start if config.t_start is not None else 0.0
    t1 = config.t_stop if config.t_stop is not None else 1.35 * t0_period(config.params)
    dt = config.dt if config.dt is not None else rabi_period(config.params) / SAMPLES_PER_CYCLE
    n = max(int(math.floor((t1 - t0) / dt + 0.5)), 0) + 1
    return t0 + dt * np.arange(n)


# ---------------------------------------------------------------------------
# subcommands

def cmd_pe_series(config: RunConfig, stream) -> int:
    """Excitation-probability time series with per-order contributions."""
    if len(config.inv_betas) != 1:
        raise ConfigError("thermal: pe-series expects a single inv_beta")
    params = config.params
    thermal = thermal_from_inv_beta(config.inv_betas[0], params)
    trunc = config.trunc
    t = _default_pe_grid(config)

    orders = perturbation.pe_order_terms(t, params, trunc)
    s2, c2 = thermal.sin_atom**2, thermal.cos_atom**2
    th = thermal.theta
    order0 = s2 * orders.p1[0] + c2 * orders.p2[0]
    order1 = th * (s2 * orders.p1[1] + c2 * orders.p2[1])
    order2 = 0.5 * th * th * (s2 * orders.p1[2] + c2 * orders.p2[2])
    pe = order0 + order1 + order2
    flags = (pe >= -PHYS_EPS) & (pe <= 1.0 + PHYS_EPS)

    columns = ["t", "pe_pert", "pe_order0", "pe_order1_contrib",
               "pe_order2_contrib", "physicality_flag"]
    oracle_col = None
    if config.with_oracle:
        if abs(params.alpha) <= config.alpha_threshold:
            ftrunc = (FockTruncation(config.n_fock) if config.n_fock
                      else FockTruncation.auto(params, thermal))
            oracle_col = oracle.pe_curve(params, thermal, t, ftrunc)
            columns.append("pe_oracle")
        else:
            print(f"note: |alpha| = {abs(params.alpha):g} exceeds the oracle "
                  f"threshold {config.alpha_threshold:g}; pe_oracle column skipped",
                  file=sys.stderr)

    rows = []
    for i in range(t.size):
        row = [t[i], pe[i], order0[i], order1[i], order2[i], bool(flags[i])]
        if oracle_col is not None:
            row.append(oracle_col[i])
        rows.append(tuple(row))
    _write_table(stream, columns, rows, config.out_format)
    return EXIT_OK


def cmd_period_sweep(config: RunConfig, stream) -> int:
    """Revival period against temperature, with the closed-form prior."""
    params = config.params
    rows_out = []
    sweep = period_vs_temperature_sweep(params, config.inv_betas, config.trunc,
                                        dt=config.dt)
    n_missing = 0
    for row in sweep:
        if row.no_revival:
            n_missing += 1
            flag = "no-revival"
            period = math.nan
        else:
            flag = "ok" if row.physical else "unstable"
            period = row.period
        rows_out.append((row.inv_beta, period, row.t0_prime, row.quantum, flag))
    _write_table(stream, ["inv_beta", "extracted_period", "t0_prime",
                          "tau1_quantum", "stability_flag"], rows_out,
                 config.out_format)
    return EXIT_NO_REVIVAL if n_missing == len(sweep) else EXIT_OK


def cmd_coherence_map(config: RunConfig, stream) -> int:
    """Relative entropy of coherence over the (t, 1/beta) grid, long format."""
    params = config.params
    trunc = config.trunc
    t = _default_pe_grid(config)
    rows = []
    for inv_beta in config.inv_betas:
        thermal = thermal_from_inv_beta(inv_beta, params)
        pe = perturbation.pe_thermal(t, params, thermal, trunc)
        rho01 = perturbation.rho01_thermal(t, params, thermal, trunc)
        p00, z, projected = project_values(pe, np.abs(rho01))
        coh = coherence_values(p00, z)
        for i in range(t.size):
            rows.append((t[i], inv_beta, coh[i], p00[i], z[i], bool(projected[i])))
    _write_table(stream, ["t", "inv_beta", "coherence", "rho00", "abs_rho01",
                          "projection_applied"], rows, config.out_format)
    return EXIT_OK


def cmd_approx_check(config: RunConfig, stream) -> int:
    """Closed-form approximation check: both sides of the cosine-sum identity."""
    params = config.params
    if params.alpha == 0:
        raise ConfigError("model.alpha: approx-check requires alpha != 0")
    t = _default_pe_grid(config)
    lhs, rhs = approx_cos_sum(params.alpha, params.l, params.g, t)
    rows = [(t[i], lhs[i], rhs[i], abs(lhs[i] - rhs[i])) for i in range(t.size)]
    _write_table(stream, ["t", "lhs", "rhs", "abs_dev"], rows, config.out_format)
    return EXIT_OK


def cmd_oracle_validate(config: RunConfig | None, stream) -> int:
    """Run the oracle-vs-series validation suite; JSON report."""
    if config is None:
        report = validation.run_validation_suite()
    else:
        if abs(config.params.alpha) > config.alpha_threshold:
            raise ConfigError(
                f"model.alpha: |alpha| = {abs(config.params.alpha):g} exceeds the "
                f"oracle threshold {config.alpha_threshold:g}")
        report = validation.run_validation_suite(
            l_values=(config.params.l,), alpha=config.params.alpha)
    json.dump(report, stream, indent=2, sort_keys=True)
    stream.write("\n")
    return EXIT_OK if report["passed"] else EXIT_VALIDATION


# ---------------------------------------------------------------------------

def _load_config(args) -> RunConfig | None:
    doc = None
    if getattr(args, "preset", None):
        doc = build_preset(args.preset)
    if getattr(args, "config", None):
        if doc is not None:
            raise ConfigError("config: pass either --preset or --config, not both")
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"config: cannot read {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: {args.config} line {exc.lineno}: {exc.msg}") from exc
    if doc is None:
        return None
    config = parse_config(doc)
    if getattr(args, "nmax", None) is not None:
        if args.nmax < 1:
            raise ConfigError("--nmax: must be an integer >= 1")
        config.n_max = args.nmax
        config.adaptive = False
    if getattr(args, "dt", None) is not None:
        if not args.dt > 0:
            raise ConfigError("--dt: must be positive")
        config.dt = args.dt
    if getattr(args, "with_oracle", False):
        config.with_oracle = True
    if getattr(args, "format", None):
        config.out_format = args.format
    return config


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--preset", choices=PRESETS, help="named figure preset")
    sub.add_argument("--config", help="path to a JSON configuration document")
    sub.add_argument("--out", help="output path (default: stdout)")
    sub.add_argument("--format", choices=("csv", "json"), help="output format")
    sub.add_argument("--nmax", type=int, help="override the series truncation")
    sub.add_argument("--dt", type=float, help="override the time-grid spacing")
    sub.add_argument("--with-oracle", action="store_true", dest="with_oracle",
                     help="add the exact-solver column where applicable")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="thermaljcm",
        description="Finite-temperature multiphoton Jaynes-Cummings dynamics")
    subs = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("pe-series", "excitation probability time series"),
        ("period-sweep", "revival period vs temperature"),
        ("coherence-map", "relative entropy of coherence over (t, 1/beta)"),
        ("oracle-validate", "series-vs-exact validation report (JSON)"),
        ("approx-check", "closed-form cosine-sum approximation table"),
    ):
        _add_common(subs.add_parser(name, help=help_text))
    args = parser.parse_args(argv)

    handlers = {
        "pe-series": cmd_pe_series,
        "period-sweep": cmd_period_sweep,
        "coherence-map": cmd_coherence_map,
        "approx-check": cmd_approx_check,
    }
    try:
        if args.command == "oracle-validate":
            config = _load_config(args)
        else:
            config = _load_config(args)
            if config is None:
                raise ConfigError("config: pass --preset or --config")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                if args.command == "oracle-validate":
                    return cmd_oracle_validate(config, fh)
                return handlers[args.command](config, fh)
        if args.command == "oracle-validate":
            return cmd_oracle_validate(config, sys.stdout)
        return handlers[args.command](config, sys.stdout)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
