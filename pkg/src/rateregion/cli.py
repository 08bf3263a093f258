"""Command-line front end.

Subcommands ``boundary``, ``check``, ``sweep``, ``sumrate`` and ``scaling``
emit CSV or JSON tables. Parameters come from ``--config`` (a JSON object
whose keys are the long flag names with dashes replaced by underscores) and
from flags, flags taking precedence. SNR is given in dB and angles in degrees.

Exit codes: 0 success (``check``: convex), 1 non-convex (``check`` only),
2 invalid configuration, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from . import __version__
from .channels import LoSScenario, RayleighScenario, los_model, rayleigh_model
from .convexity import DEFAULT_GRID, DEFAULT_RESOLUTION, check_convexity, chord_oracle
from .experiments import (
    DEFAULT_SUMRATE_STEP,
    DEFAULT_SWEEP_STEP,
    angle_grid,
    angle_sweep,
    relative_spread,
    scaling_check,
    sum_rate_comparison,
)
from .rate_core import DEFAULT_SAMPLES, Direction, GeneralRateModel, RateRegionError, sample_boundary

EXIT_OK = 0
EXIT_NONCONVEX = 1
EXIT_CONFIG = 2
EXIT_IO = 3

R1_COL = "R1_bits_per_s_per_Hz"
R2_COL = "R2_bits_per_s_per_Hz"
SUM_COL = "sum_rate_bits_per_s_per_Hz"


class ConfigError(Exception):
    """Invalid run configuration; the message names the offending field."""


DEFAULTS: Dict[str, Any] = {
    "model": "general",
    "direction": "dl",
    "alpha1": None,
    "alpha2": None,
    "mu11": 0.0,
    "mu12": 0.0,
    "mu21": 0.0,
    "mu22": 0.0,
    "M": None,
    "snr_db": None,
    "d_h": 0.5,
    "theta1_deg": 0.0,
    "theta2_deg": 0.0,
    "beta1": 1.0,
    "beta2": 1.0,
    "gamma1": None,
    "gamma2": None,
    "grid_n": None,
    "grid_step_deg": None,
    "separations_deg": None,
    "oracle": False,
    "out": None,
    "format": None,
    "precision": 9,
}

COMMAND_DEFAULTS = {
    "boundary": {"grid_n": DEFAULT_SAMPLES, "format": "csv"},
    "check": {"grid_n": DEFAULT_GRID, "format": "json"},
    "sweep": {"grid_step_deg": DEFAULT_SWEEP_STEP, "format": "csv"},
    "sumrate": {"grid_step_deg": DEFAULT_SUMRATE_STEP, "format": "csv", "M": [100], "snr_db": [15.0]},
    "scaling": {"grid_step_deg": DEFAULT_SWEEP_STEP, "format": "csv", "M": [64, 128, 256], "snr_db": -20.0},
}

LIST_FIELDS = {
    "sweep": ("M", "snr_db"),
    "sumrate": ("M", "snr_db"),
    "scaling": ("M",),
}


@dataclass
class RunConfig:
    command: str
    params: Dict[str, Any] = field(default_factory=dict)

    def get(self, key):
        return self.params.get(key)

    def need(self, key):
        value = self.params.get(key)
        if value is None:
            raise ConfigError(f"{key}: required for '{self.command}'")
        return value


def db_to_linear(db: float) -> float:
    return 10.0 ** (float(db) / 10.0)


def _add_scenario_flags(p: argparse.ArgumentParser, multi_m: bool = False):
    p.add_argument("--model", choices=("general", "rayleigh", "los"))
    p.add_argument("--direction", choices=("dl", "ul"))
    for name in ("alpha1", "alpha2", "mu11", "mu12", "mu21", "mu22"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--M", type=int)
    p.add_argument("--snr-db", type=float, help="transmit power over noise, dB")
    p.add_argument("--d-h", type=float, help="antenna spacing in wavelengths")
    p.add_argument("--theta1-deg", type=float)
    p.add_argument("--theta2-deg", type=float)
    for name in ("beta1", "beta2", "gamma1", "gamma2"):
        p.add_argument(f"--{name}", type=float)


def _add_output_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file with parameters; flags override it")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--precision", type=int, help="significant digits (default 9)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rateregion", description="Two-user Massive MIMO rate regions and their convexity."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("boundary", help="sample the Pareto boundary")
    _add_scenario_flags(p)
    p.add_argument("--grid-n", type=int, help=f"samples per segment (default {DEFAULT_SAMPLES})")
    _add_output_flags(p)

    p = sub.add_parser("check", help="decide convexity of the rate region")
    _add_scenario_flags(p)
    p.add_argument("--grid-n", type=int, help=f"derivative grid points (default {DEFAULT_GRID})")
    p.add_argument("--oracle", action="store_true", default=None, help="also run the chord oracle")
    _add_output_flags(p)

    p = sub.add_parser("sweep", help="LoS angle sweep with theta1 fixed")
    p.add_argument("--direction", choices=("dl", "ul"))
    p.add_argument("--M", type=int, nargs="+")
    p.add_argument("--snr-db", type=float, nargs="+")
    p.add_argument("--d-h", type=float)
    p.add_argument("--theta1-deg", type=float)
    p.add_argument("--grid-step-deg", type=float)
    p.add_argument("--oracle", action="store_true", default=None,
                   help="cross-check every 10th point with the numeric checker")
    _add_output_flags(p)

    p = sub.add_parser("sumrate", help="spatial multiplexing versus orthogonal scheduling (DL LoS)")
    p.add_argument("--M", type=int, nargs="+")
    p.add_argument("--snr-db", type=float, nargs="+")
    p.add_argument("--d-h", type=float)
    p.add_argument("--grid-step-deg", type=float)
    p.add_argument("--separations-deg", type=float, nargs="*")
    _add_output_flags(p)

    p = sub.add_parser("scaling", help="non-convex angle fraction times M across antenna counts")
    p.add_argument("--direction", choices=("dl", "ul"))
    p.add_argument("--M", type=int, nargs="+")
    p.add_argument("--snr-db", type=float)
    p.add_argument("--d-h", type=float)
    p.add_argument("--grid-step-deg", type=float)
    _add_output_flags(p)
    return parser


def _load_config_file(path: str) -> Dict[str, Any]:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"config: cannot read {path!r}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be a JSON object")
    unknown = sorted(set(data) - set(DEFAULTS))
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown configuration key")
    return data


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, the optional config file and explicit flags, in that order."""
    params = dict(DEFAULTS)
    params.update(COMMAND_DEFAULTS[args.command])
    if getattr(args, "config", None):
        params.update(_load_config_file(args.config))
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        params[key] = value
    for key in LIST_FIELDS.get(args.command, ()):
        if params[key] is not None and not isinstance(params[key], list):
            params[key] = [params[key]]
    precision = params["precision"]
    if not isinstance(precision, int) or not 1 <= precision <= 17:
        raise ConfigError(f"precision: must be an integer in [1, 17], got {precision!r}")
    if params["format"] not in ("csv", "json"):
        raise ConfigError(f"format: must be 'csv' or 'json', got {params['format']!r}")
    try:
        Direction.parse(params["direction"])
    except RateRegionError as exc:
        raise ConfigError(f"direction: {exc}") from None
    return RunConfig(args.command, params)


def build_model(cfg: RunConfig) -> GeneralRateModel:
    kind = cfg.get("model")
    direction = cfg.get("direction")
    try:
        if kind == "general":
            coeffs = [cfg.need(k) for k in ("alpha1", "alpha2")]
            coeffs += [cfg.get(k) for k in ("mu11", "mu12", "mu21", "mu22")]
            return GeneralRateModel(*coeffs, direction=direction)
        rho = db_to_linear(cfg.need("snr_db"))
        if kind == "rayleigh":
            gamma1 = cfg.get("gamma1") if cfg.get("gamma1") is not None else cfg.get("beta1")
            gamma2 = cfg.get("gamma2") if cfg.get("gamma2") is not None else cfg.get("beta2")
            s = RayleighScenario(cfg.need("M"), rho, cfg.get("beta1"), cfg.get("beta2"), gamma1, gamma2, direction)
            return rayleigh_model(s)
        if kind == "los":
            s = LoSScenario(
                cfg.need("M"),
                cfg.get("d_h"),
                rho,
                cfg.get("beta1"),
                cfg.get("beta2"),
                math.radians(cfg.get("theta1_deg")),
                math.radians(cfg.get("theta2_deg")),
                direction,
            )
            return los_model(s)
    except (RateRegionError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    raise ConfigError(f"model: unknown model {kind!r}")


class Formatter:
    def __init__(self, precision: int):
        self.precision = precision

    def num(self, x):
        if isinstance(x, (bool, np.bool_)):
            return bool(x)
        if isinstance(x, (int, np.integer)):
            return int(x)
        if isinstance(x, (float, np.floating)):
            x = float(x)
            if not math.isfinite(x):
                return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
            return float(f"{x:.{self.precision}g}")
        return x

    def cell(self, x):
        if x is None:
            return ""
        if isinstance(x, (bool, np.bool_)):
            return "true" if x else "false"
        if isinstance(x, (float, np.floating)):
            x = float(x)
            if not math.isfinite(x):
                return self.num(x)
            return f"{x:.{self.precision}g}"
        return str(x)

    def tree(self, obj):
        if isinstance(obj, dict):
            return {k: self.tree(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [self.tree(v) for v in obj]
        return self.num(obj)

    def csv_text(self, header: List[str], rows) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([self.cell(x) for x in row])
        return buf.getvalue()

    def json_text(self, obj) -> str:
        return json.dumps(self.tree(obj), indent=2) + "\n"


def _table(fmt: Formatter, cfg: RunConfig, header, rows, extra: Optional[dict] = None) -> str:
    if cfg.get("format") == "csv":
        return fmt.csv_text(header, rows)
    doc = {"columns": header, "rows": [list(r) for r in rows]}
    if extra:
        doc.update(extra)
    return fmt.json_text(doc)


def cmd_boundary(cfg: RunConfig, fmt: Formatter):
    model = build_model(cfg)
    n = cfg.get("grid_n")
    if not isinstance(n, int) or n < 2:
        raise ConfigError(f"grid_n: must be an integer >= 2, got {n!r}")
    boundary = sample_boundary(model, n)
    header = ["segment", "eta", R1_COL, R2_COL]
    return EXIT_OK, _table(fmt, cfg, header, list(boundary.rows()), {"model": model.as_dict()})


def cmd_check(cfg: RunConfig, fmt: Formatter):
    model = build_model(cfg)
    n = cfg.get("grid_n")
    if not isinstance(n, int) or n < 2:
        raise ConfigError(f"grid_n: must be an integer >= 2, got {n!r}")
    verdict = check_convexity(model, n)
    record = verdict.as_dict()
    if cfg.get("oracle"):
        oracle = chord_oracle(model, DEFAULT_RESOLUTION)
        record["max_excess"] = oracle.max_excess
        record["oracle_convex"] = oracle.convex
        record["oracle_agrees"] = oracle.convex == verdict.convex
    record["model"] = model.as_dict()
    code = EXIT_OK if verdict.convex else EXIT_NONCONVEX
    if cfg.get("format") == "csv":
        flat = {k: v for k, v in record.items() if k not in ("segments", "model")}
        flat.update(model.as_dict())
        return code, fmt.csv_text(list(flat), [list(flat.values())])
    return code, fmt.json_text(record)


def _positive_step(cfg):
    step = cfg.get("grid_step_deg")
    if not isinstance(step, (int, float)) or not step > 0:
        raise ConfigError(f"grid_step_deg: must be > 0, got {step!r}")
    return float(step)


def _int_list(cfg, key):
    values = cfg.need(key)
    if not values or not all(isinstance(v, int) and v >= 1 for v in values):
        raise ConfigError(f"{key}: must be a non-empty list of positive integers, got {values!r}")
    return values


def _float_list(cfg, key):
    values = cfg.need(key)
    if not values or not all(isinstance(v, (int, float)) for v in values):
        raise ConfigError(f"{key}: must be a non-empty list of numbers, got {values!r}")
    return [float(v) for v in values]


def cmd_sweep(cfg: RunConfig, fmt: Formatter):
    step = _positive_step(cfg)
    Ms = _int_list(cfg, "M")
    snrs = _float_list(cfg, "snr_db")
    header = [
        "row", "M", "snr_db", "theta2_deg", "g", "threshold", "convex",
        "nonconvex_fraction", "nonconvex_interval_count",
    ]
    rows = []
    summaries = []
    for M in Ms:
        for snr_db in snrs:
            try:
                res = angle_sweep(
                    M, db_to_linear(snr_db), cfg.get("direction"), step,
                    theta1=math.radians(cfg.get("theta1_deg")), dH=cfg.get("d_h"),
                    cross_stride=10 if cfg.get("oracle") else None,
                )
            except RateRegionError as exc:
                raise ConfigError(str(exc)) from None
            deg = np.degrees(res.theta2)
            for t, g, c in zip(deg, res.g, res.convex):
                rows.append(["point", M, snr_db, float(t), float(g), res.threshold, bool(c), None, None])
            rows.append(["summary", M, snr_db, None, None, res.threshold, None,
                         res.nonconvex_fraction, res.nonconvex_interval_count])
            summary = {"M": M, "snr_db": snr_db, "nonconvex_fraction": res.nonconvex_fraction,
                       "nonconvex_interval_count": res.nonconvex_interval_count,
                       "nonconvex_count": res.nonconvex_count, "grid_size": res.grid_size}
            if res.cross_validation is not None:
                xv = res.cross_validation
                summary["cross_validation"] = {"checked": xv.checked, "agreed": xv.agreed,
                                               "marginal": xv.marginal,
                                               "mismatches": len(xv.mismatches)}
            summaries.append(summary)
    return EXIT_OK, _table(fmt, cfg, header, rows, {"summary": summaries})


def cmd_sumrate(cfg: RunConfig, fmt: Formatter):
    seps = cfg.get("separations_deg")
    if seps is None:
        seps = angle_grid(_positive_step(cfg)).tolist()
    if not isinstance(seps, list) or not seps:
        raise ConfigError("separations_deg: separation grid is empty")
    Ms = _int_list(cfg, "M")
    snrs = _float_list(cfg, "snr_db")
    header = ["M", "snr_db", "separation_deg", "multiplexing_" + SUM_COL, "scheduling_" + SUM_COL,
              "scheduling_gain"]
    rows = []
    summaries = []
    for M in Ms:
        for snr_db in snrs:
            try:
                cmp = sum_rate_comparison(M, db_to_linear(snr_db), seps, dH=cfg.get("d_h"))
                zero = sum_rate_comparison(M, db_to_linear(snr_db), [0.0], dH=cfg.get("d_h"))
            except RateRegionError as exc:
                raise ConfigError(str(exc)) from None
            for sep, mux, sch, gain in zip(cmp.separations, cmp.multiplexing, cmp.scheduling, cmp.gain):
                rows.append([M, snr_db, float(sep), float(mux), float(sch), float(gain)])
            summaries.append({"M": M, "snr_db": snr_db, "gain_at_zero_separation": float(zero.gain[0]),
                              "crossover_separations_deg": cmp.crossover_separations})
    return EXIT_OK, _table(fmt, cfg, header, rows, {"summary": summaries})


def cmd_scaling(cfg: RunConfig, fmt: Formatter):
    step = _positive_step(cfg)
    Ms = _int_list(cfg, "M")
    snr_db = cfg.need("snr_db")
    try:
        result = scaling_check(Ms, db_to_linear(snr_db), cfg.get("direction"), step, dH=cfg.get("d_h"))
    except RateRegionError as exc:
        raise ConfigError(str(exc)) from None
    header = ["M", "nonconvex_fraction", "fraction_times_M"]
    spread = relative_spread([r[2] for r in result])
    if cfg.get("format") == "csv":
        rows = [list(r) for r in result]
        rows.append(["relative_spread", None, spread])
        return EXIT_OK, fmt.csv_text(header, rows)
    return EXIT_OK, _table(fmt, cfg, header, result, {"snr_db": snr_db, "relative_spread": spread})


COMMANDS = {
    "boundary": cmd_boundary,
    "check": cmd_check,
    "sweep": cmd_sweep,
    "sumrate": cmd_sumrate,
    "scaling": cmd_scaling,
}


def _write(text: str, path: Optional[str]):
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = resolve_config(args)
        code, text = COMMANDS[args.command](cfg, Formatter(cfg.get("precision")))
    except ConfigError as exc:
        print(f"rateregion: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        _write(text, cfg.get("out"))
    except OSError as exc:
        print(f"rateregion: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return code


if __name__ == "__main__":
    sys.exit(main())
