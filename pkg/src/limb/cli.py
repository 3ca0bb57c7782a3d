"""Command-line front end.

    limb estimate --method lim-b --flops 1e28 --params 1e15 --bits 16 --schedule poly:10
    limb sweep --method lim-a,lim-b --gamma 0.5:10:20 --bits 16 --format csv
    limb trajectory --schedule poly:2 --format csv
    limb fit --project 1e15
    limb compare --flops 1e28 --params 1e15
    limb mc --mode walk --seed 1

Every run resolves its parameters from defaults, then an optional
``--config`` file, then explicit flags. The resolved set is embedded in the
output and can be fed back through ``--config`` to repeat the run; JSON
outputs and CSV outputs (via their ``# config:`` header lines) both work.

Exit status: 0 success, 1 validation error, 2 series did not converge.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from . import estimators as est
from . import stochastic as mc
from . import workloads as wl
from .analysis import ConvergenceError, SeriesResult
from .schedules import LearningRateSchedule, UpdateRateSchedule, parse_schedule
from .thermo import BistableCellParams, ThermalEnvironment, default_temperature, net_update_rate

COMMANDS = ("estimate", "sweep", "trajectory", "fit", "compare", "mc")

METHOD_TAGS = {
    "lim-a": "LIM_A_NUM",
    "lim-a-closed": "LIM_A_CLOSED",
    "lim-b": "LIM_B_NUM",
    "lim-b-ub": "LIM_B_UB",
    "lim-b-lb": "LIM_B_LB_CLOSED",
    "lim-b-lb-finite": "LIM_B_LB_FINITE",
    "lim-a-exp": "LIM_A_EXP_CLOSED",
    "lim-b-exp": "LIM_B_EXP_CLOSED",
    "ceb": "CEB",
    "landauer-meas": "LANDAUER_MEAS",
}

SWEEP_COLUMNS = ("method", "gamma", "per_op_kt", "dynamic_j", "retention_j", "total_j", "terms_used", "tail_bound")
TRAJECTORY_COLUMNS = ("n", "epsilon", "r", "tilt_kt", "barrier_kt", "power_w")
COMPARE_COLUMNS = ("name", "method", "total_j", "per_op_kt", "ratio_to_lim_b", "assumption")
DUMP_COLUMNS = ("trial", "step", "wx", "wy", "loss", "hop")


class ValidationError(ValueError):
    pass


# value parsers; each takes the text form used on the command line and in config files


def _positive(text) -> float:
    x = float(text)
    if not (x > 0 and math.isfinite(x)):
        raise ValueError(f"expected a positive number, got {text!r}")
    return x


def _nonneg(text) -> float:
    x = float(text)
    if not (x >= 0 and math.isfinite(x)):
        raise ValueError(f"expected a non-negative number, got {text!r}")
    return x


def _count(text) -> int:
    x = float(text)
    if not (x >= 1 and x == int(x)):
        raise ValueError(f"expected a positive integer, got {text!r}")
    return int(x)


def _seed(text) -> int:
    x = int(text)
    if not 0 <= x < 2**64:
        raise ValueError(f"seed must lie in [0, 2^64), got {text!r}")
    return x


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected true or false, got {text!r}")


def _methods(text) -> tuple[str, ...]:
    tags = tuple(t.strip().lower() for t in str(text).split(",") if t.strip())
    bad = [t for t in tags if t not in METHOD_TAGS]
    if bad or not tags:
        raise ValueError(f"unknown method {','.join(bad) or text!r}; choose from {', '.join(METHOD_TAGS)}")
    return tags


def _choice(*options):
    def parse(text) -> str:
        v = str(text).strip()
        if v not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return v

    return parse


def _schedule(text) -> str:
    return parse_schedule(text).describe()


def _floats(n=None):
    def parse(text) -> tuple[float, ...]:
        vals = tuple(float(v) for v in str(text).replace(" ", "").split(",") if v)
        if n is not None and len(vals) != n:
            raise ValueError(f"expected {n} comma-separated numbers, got {text!r}")
        return vals

    return parse


def _ints(n):
    def parse(text) -> tuple[int, ...]:
        vals = tuple(int(v) for v in str(text).replace(" ", "").split(",") if v)
        if len(vals) != n:
            raise ValueError(f"expected {n} comma-separated integers, got {text!r}")
        return vals

    return parse


def _gamma_range(text) -> str:
    gamma_values(text)
    return str(text).strip()


def gamma_values(spec: str) -> np.ndarray:
    """``start:stop:count`` (linear, inclusive) or a comma list."""
    spec = str(spec).strip()
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"gamma range must be start:stop:count, got {spec!r}")
        start, stop, count = float(parts[0]), float(parts[1]), _count(parts[2])
        vals = np.linspace(start, stop, count)
    else:
        vals = np.array([float(v) for v in spec.split(",") if v])
    if vals.size == 0 or not np.all(vals > 0):
        raise ValueError(f"gamma values must be positive, got {spec!r}")
    return vals


def _path(text) -> str:
    return str(text)


@dataclass(frozen=True)
class Param:
    name: str
    parse: object
    default: object
    help: str
    commands: tuple[str, ...]


_WORKLOAD = ("estimate", "sweep", "compare")
_ALL = COMMANDS

PARAMS = (
    Param("temperature", _positive, None, "temperature in K (default: $LIMB_TEMP_K or 300)", _ALL),
    Param("format", _choice("json", "csv"), "json", "output format: json or csv", _ALL),
    Param("units", _choice("J", "kT"), "J", "energy units: J or kT", _ALL),
    Param("no_timestamp", _bool, False, "omit the timestamp from output metadata", _ALL),
    Param("rel_tol", _positive, 1e-9, "relative tolerance for series", ("estimate", "sweep", "trajectory", "compare")),
    Param("method", _methods, None, "comma-separated method tags", ("estimate", "sweep")),
    Param("flops", _nonneg, 1e28, "training FLOPs", _WORKLOAD),
    Param("params", _nonneg, 1e15, "parameter count M", _WORKLOAD),
    Param("delta", _positive, None, "retention precision delta (exclusive with --bits)", _WORKLOAD + ("trajectory", "mc")),
    Param("bits", _positive, None, "precision bits, delta = 2^-bits (exclusive with --delta)", _WORKLOAD + ("trajectory", "mc")),
    Param("schedule", _schedule, "poly:2", "update-rate schedule: poly:G, exp:G, expunit, logpoly",
          ("estimate", "trajectory", "compare", "mc")),
    Param("lr_offset", _nonneg, 0.0, "learning rate 1/(n + offset)", ("estimate", "sweep", "trajectory", "compare", "mc")),
    Param("e_bit", _positive, None, "CEB energy per bit in J (default log(1/delta) kT per bit)", ("estimate",)),
    Param("gamma", _gamma_range, "0.5:10:20", "gamma values, start:stop:count or a comma list", ("sweep",)),
    Param("family", _choice("poly", "exp"), "poly", "schedule family swept over gamma: poly or exp", ("sweep",)),
    Param("r_max", _positive, None, "maximum update rate in 1/s", ("trajectory", "mc")),
    Param("n_points", _count, 200, "trajectory grid points", ("trajectory",)),
    Param("n_max", _count, 10**8, "last trajectory step", ("trajectory",)),
    Param("data", _path, None, "model CSV (default: bundled dataset)", ("fit",)),
    Param("breakpoint", _positive, wl.DEFAULT_BREAKPOINT, "parameter count splitting the two segments", ("fit",)),
    Param("slopes", _choice("pinned", "free"), "pinned", "pin slopes to (2, 1) or fit them", ("fit",)),
    Param("continuous", _bool, False, "join the segments at the breakpoint", ("fit",)),
    Param("project", _floats(), (1e15,), "comma-separated parameter counts to project", ("fit",)),
    Param("baselines", _path, None, "baseline INI file (default: bundled)", ("compare",)),
    Param("mode", _choice("kinetics", "walk", "audit"), "walk", "Monte Carlo experiment: kinetics, walk or audit", ("mc",)),
    Param("seed", _seed, 0, "generator seed", ("mc",)),
    Param("barrier", _nonneg, 2.0, "kinetics: barrier height in kT", ("mc",)),
    Param("tilt", _nonneg, 1.0, "kinetics: tilt in kT", ("mc",)),
    Param("dt", _positive, 1e-8, "kinetics: time step in s", ("mc",)),
    Param("steps", _count, None, "kinetics or walk steps", ("mc",)),
    Param("trials", _count, 200, "walk trials", ("mc",)),
    Param("beta", _positive, 50.0, "walk: tilt per unit loss drop", ("mc",)),
    Param("grid_step", _positive, 1.0, "walk: parameter quantum", ("mc",)),
    Param("start", _ints(2), (10, 10), "walk: start position in grid units", ("mc",)),
    Param("loss", _floats(4), (1.0, 0.0, 0.0, 1.0), "walk: loss matrix a11,a12,a21,a22", ("mc",)),
    Param("frozen_barrier", _nonneg, None, "walk: constant barrier in kT instead of the schedule", ("mc",)),
    Param("tol", _positive, 2.0, "walk: distance from the minimizer counted as converged", ("mc",)),
    Param("accounting", _choice("lim_a", "lim_b"), "lim_b", "audit: dissipation accounting, lim_a or lim_b", ("mc",)),
    Param("dump", _path, None, "walk: write per-step trajectories to this CSV", ("mc",)),
)
_BY_NAME = {p.name: p for p in PARAMS}

_COMMAND_DEFAULTS = {
    "estimate": {"method": ("lim-b",)},
    "sweep": {"method": ("lim-a", "lim-b")},
    "mc": {"schedule": "poly:0.5", "delta": 0.5},
}
_MC_DEFAULTS = {"kinetics": {"r_max": 1e6, "steps": 10**7}, "walk": {"steps": 10**4}, "audit": {"steps": 10**4}}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


COMMAND_HELP = {
    "estimate": "energy of one workload under one or more methods",
    "sweep": "per-op and total energy over a range of schedule exponents",
    "trajectory": "barrier, tilt and update rate along the training run",
    "fit": "piecewise power-law fit of FLOPs against parameters, with projections",
    "compare": "baselines, reference limits and LIM estimates for one workload",
    "mc": "Monte Carlo kinetics, descent walk and energy audit",
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="limb", description="Training-energy estimates for learning-in-memory hardware.")
    parser.add_argument("--version", action="version", version=f"limb {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    for cmd in COMMANDS:
        sp = sub.add_parser(cmd, help=COMMAND_HELP[cmd], description=COMMAND_HELP[cmd])
        sp.add_argument("--config", help="key = value file, or an earlier output of this tool")
        sp.add_argument("-o", "--output", help="output path (default: standard output)")
        for p in PARAMS:
            if cmd not in p.commands:
                continue
            flag = "--" + p.name.replace("_", "-")
            if p.parse is _bool:
                sp.add_argument(flag, dest=p.name, action="store_const", const=True, default=None, help=p.help)
            else:
                sp.add_argument(flag, dest=p.name, type=str, default=None, help=p.help)
    return parser


# config files


def read_config(path: str) -> dict[str, str]:
    """Flat ``key = value`` text, a JSON output document, or a CSV output with ``# config:`` lines."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read config file {path}: {exc.strerror}") from None
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config file {path} is not valid JSON: {exc.msg} (line {exc.lineno})") from None
        if not isinstance(doc.get("config"), dict):
            raise ValidationError(f"config file {path}: JSON document has no 'config' object")
        return {k: str(v) for k, v in doc["config"].items()}
    lines = text.splitlines()
    from_csv = bool(lines) and lines[0].startswith("# limb")
    out = {}
    for i, line in enumerate(lines, start=1):
        s = line.strip()
        if from_csv:
            if not s.startswith("# config:"):
                continue
            s = s[len("# config:"):].strip()
        elif not s or s.startswith("#"):
            continue
        key, sep, value = s.partition("=")
        if not sep:
            raise ValidationError(f"config file {path}, line {i}: expected 'key = value', got {line!r}")
        out[key.strip()] = value.strip()
    return out


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return ",".join(_format_value(x) for x in v)
    return str(v)


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults < config file < flags into typed values."""
    cmd = args.command
    layers = []
    if args.config:
        file_cfg = read_config(args.config)
        other = file_cfg.pop("command", cmd)
        if other != cmd:
            raise ValidationError(f"config file is for '{other}', not '{cmd}'")
        layers.append(("config file", file_cfg))
    flags = {p.name: getattr(args, p.name) for p in PARAMS if cmd in p.commands and getattr(args, p.name) is not None}
    layers.append(("flags", flags))

    raw: dict[str, object] = {}
    for source, layer in layers:
        unknown = sorted(k for k in layer if k not in _BY_NAME or cmd not in _BY_NAME[k].commands)
        if unknown:
            raise ValidationError(f"{source}: unknown key(s) for '{cmd}': {', '.join(unknown)}")
        if "delta" in layer and "bits" in layer:
            raise ValidationError("delta and bits are mutually exclusive")
        # an explicit delta in a later layer replaces bits from an earlier one, and vice versa
        if "delta" in layer:
            raw.pop("bits", None)
        if "bits" in layer:
            raw.pop("delta", None)
        raw.update(layer)

    cfg: dict[str, object] = {"command": cmd}
    for p in PARAMS:
        if cmd not in p.commands:
            continue
        if p.name in raw:
            try:
                cfg[p.name] = p.parse(raw[p.name])
            except ValueError as exc:
                raise ValidationError(f"--{p.name.replace('_', '-')}: {exc}") from None
        else:
            cfg[p.name] = p.default
    for k, v in _COMMAND_DEFAULTS.get(cmd, {}).items():
        if k not in raw:
            cfg[k] = v
    if cmd == "mc":
        for k, v in _MC_DEFAULTS[cfg["mode"]].items():
            if k not in raw:
                cfg[k] = v
    if cfg.get("r_max") is None and "r_max" in cfg:
        cfg["r_max"] = est.DEFAULT_R_MAX
    if cfg["temperature"] is None:
        try:
            cfg["temperature"] = default_temperature()
        except ValueError as exc:
            raise ValidationError(str(exc)) from None
    if "delta" in cfg:
        if cfg["bits"] is None:
            cfg.pop("bits")
            if cfg["delta"] is None:
                cfg["delta"] = est.DEFAULT_DELTA
            elif cfg["delta"] > 1:
                raise ValidationError(f"--delta must lie in (0, 1], got {cfg['delta']}")
        else:
            cfg.pop("delta")
    return {k: v for k, v in cfg.items() if v is not None}


def _delta(cfg) -> float:
    return 2.0 ** -cfg["bits"] if "bits" in cfg else cfg["delta"]


def _workload(cfg) -> est.Workload:
    if "bits" in cfg:
        return est.Workload.from_bits(cfg["flops"], cfg["params"], cfg["bits"])
    return est.Workload(cfg["flops"], cfg["params"], cfg["delta"])


# output


def _json_number(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return f"{x:.8e}"


def dumps(obj, indent: int = 2, level: int = 0) -> str:
    """JSON with every float in 9-significant-digit scientific notation."""
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, str):
        return json.dumps(obj)
    if obj is None:
        return "null"
    return _json_number(obj)


def _csv_number(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{float(x):.8e}"


def _meta(cfg, extra=None) -> dict:
    meta = {"tool": "limb", "version": __version__, "temperature_k": cfg["temperature"]}
    if not cfg["no_timestamp"]:
        meta["timestamp"] = datetime.now(timezone.utc).replace(microsecond=0).isoformat()
    meta.update(extra or {})
    return meta


def _config_block(cfg) -> dict[str, str]:
    return {k: _format_value(v) for k, v in cfg.items()}


def render(cfg: dict, meta: dict, results: list[dict], columns: tuple[str, ...]) -> str:
    if cfg["format"] == "json":
        return dumps({"meta": meta, "config": _config_block(cfg), "results": results}) + "\n"
    buf = io.StringIO()
    buf.write(f"# limb {meta['version']}\n")
    for k, v in meta.items():
        if k not in ("tool", "version"):
            buf.write(f"# {k}: {_format_value(v)}\n")
    for k, v in _config_block(cfg).items():
        buf.write(f"# config: {k} = {v}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in results:
        writer.writerow([_csv_number(row[c]) for c in columns])
    return buf.getvalue()


def _energy_fields(units: str, kt: float, dynamic_j: float, retention_j: float) -> dict:
    if units == "kT":
        return {"dynamic_kt": dynamic_j / kt, "retention_kt": retention_j / kt, "total_kt": (dynamic_j + retention_j) / kt}
    return {"dynamic_joules": dynamic_j, "retention_joules": retention_j, "total_joules": dynamic_j + retention_j}


def _diagnostic(d: SeriesResult) -> dict:
    return {"value": d.value, "terms_used": d.terms_used, "tail_bound": d.tail_bound, "converged": d.converged}


def _per_op_bound(e: est.EnergyEstimate) -> tuple[int, float]:
    """Most terms used and a propagated bound on the per-op ratio."""
    if not e.diagnostics:
        return 0, 0.0
    rel = sum(d.tail_bound / abs(d.value) for d in e.diagnostics if d.value)
    return max(d.terms_used for d in e.diagnostics), abs(e.dynamic_kt_per_op) * rel


def _project(e: est.EnergyEstimate, units: str) -> dict:
    row = {"method": e.method, "per_op_kt": e.dynamic_kt_per_op}
    row.update(_energy_fields(units, e.kt, e.dynamic_joules, e.retention_joules))
    row["flops"] = e.flops
    row["diagnostics"] = [_diagnostic(d) for d in e.diagnostics]
    if e.notes:
        row["notes"] = dict(e.notes)
    return row


def _with_units(columns: tuple[str, ...], units: str) -> tuple[str, ...]:
    if units == "J":
        return columns
    return tuple(c[:-2] + "_kt" if c.endswith("_j") and c != "per_op_kt" else c for c in columns)


# subcommands


def _estimate_one(tag: str, cfg: dict, w: est.Workload, ur: UpdateRateSchedule) -> est.EnergyEstimate:
    lr = LearningRateSchedule(cfg["lr_offset"])
    t, tol = cfg["temperature"], cfg["rel_tol"]
    method = METHOD_TAGS[tag]
    if method == "LIM_A_NUM":
        return est.lim_a_numeric(w, lr, ur, t, rel_tol=tol)
    if method == "LIM_B_NUM":
        return est.lim_b_numeric(w, lr, ur, t, rel_tol=tol)
    if method == "LIM_B_UB":
        return est.lim_b_upper(w, t)
    if method == "CEB":
        return est.ceb_energy(w, e_bit=cfg.get("e_bit"), temperature=t)
    if method == "LANDAUER_MEAS":
        return est.landauer_measurement_total(w, temperature=t)
    if method in ("LIM_A_CLOSED", "LIM_B_LB_CLOSED", "LIM_B_LB_FINITE"):
        if ur.family != "polynomial":
            raise ValidationError(f"method {tag} needs a poly:G schedule, got {ur.describe()}")
        fn = {"LIM_A_CLOSED": est.lim_a_closed_poly, "LIM_B_LB_CLOSED": est.lim_b_lower_closed,
              "LIM_B_LB_FINITE": est.lim_b_lower_finite}[method]
        return fn(w, ur.gamma, t)
    if not ur.is_geometric():
        raise ValidationError(f"method {tag} needs an exp:G or expunit schedule, got {ur.describe()}")
    fn = est.lim_a_exp_closed if method == "LIM_A_EXP_CLOSED" else est.lim_b_exp_closed
    return fn(w, ur.gamma, t)


def cmd_estimate(cfg):
    w = _workload(cfg)
    ur = parse_schedule(cfg["schedule"])
    estimates = [_estimate_one(tag, cfg, w, ur) for tag in cfg["method"]]
    results = [_project(e, cfg["units"]) for e in estimates]
    cols = ("method", "per_op_kt", "dynamic_j", "retention_j", "total_j")
    rows = []
    for e in estimates:
        f = _energy_fields("J", e.kt, e.dynamic_joules, e.retention_joules)
        rows.append(_unit_row(cfg, e.kt, {"method": e.method, "per_op_kt": e.dynamic_kt_per_op,
                                          "dynamic_j": f["dynamic_joules"], "retention_j": f["retention_joules"],
                                          "total_j": f["total_joules"]}))
    return results, rows, _with_units(cols, cfg["units"]), {}


def _unit_row(cfg, kt, row):
    if cfg["units"] == "J":
        return row
    return {(k[:-2] + "_kt" if k.endswith("_j") else k): (v / kt if k.endswith("_j") else v) for k, v in row.items()}


def cmd_sweep(cfg):
    w = _workload(cfg)
    family = "polynomial" if cfg["family"] == "poly" else "exponential"
    results, rows = [], []
    for g in gamma_values(cfg["gamma"]):
        ur = UpdateRateSchedule(family, float(g))
        for tag in cfg["method"]:
            e = _estimate_one(tag, cfg, w, ur)
            terms, bound = _per_op_bound(e)
            res = _project(e, cfg["units"])
            res["gamma"] = float(g)
            results.append(res)
            rows.append(_unit_row(cfg, e.kt, {
                "method": e.method, "gamma": float(g), "per_op_kt": e.dynamic_kt_per_op,
                "dynamic_j": e.dynamic_joules, "retention_j": e.retention_joules, "total_j": e.total_joules,
                "terms_used": terms, "tail_bound": bound,
            }))
    return results, rows, _with_units(SWEEP_COLUMNS, cfg["units"]), {}


def cmd_trajectory(cfg):
    ur = parse_schedule(cfg["schedule"])
    points, checks = est.trajectory(
        LearningRateSchedule(cfg["lr_offset"]), ur, _delta(cfg), cfg["r_max"], cfg["n_points"], cfg["n_max"],
        cfg["temperature"],
    )
    rows = [
        {"n": p.n, "epsilon": p.epsilon_n, "r": p.r_n, "tilt_kt": p.tilt_kt, "barrier_kt": p.barrier_kt,
         "power_w": p.power_watts, "feasible": p.feasible}
        for p in points
    ]
    return rows, rows, TRAJECTORY_COLUMNS, {"checks": checks}


def cmd_fit(cfg):
    records = wl.load_records(cfg.get("data"))
    slopes = (2.0, 1.0) if cfg["slopes"] == "pinned" else None
    try:
        model = wl.fit_trend(records, cfg["breakpoint"], slopes, cfg["continuous"])
    except wl.FitError as exc:
        raise ValidationError(str(exc)) from None
    rows = [{"params": p, "flops": wl.project_flops(model, p)} for p in cfg["project"]]
    summary = {
        "records": len(records),
        "breakpoint_params": model.breakpoint_params,
        "slope_low": model.slope_low,
        "slope_high": model.slope_high,
        "intercept_low": model.intercept_low,
        "intercept_high": model.intercept_high,
        "continuity": model.continuity,
    }
    return rows, rows, ("params", "flops"), {"model": summary}


def cmd_compare(cfg):
    w = _workload(cfg)
    ur = parse_schedule(cfg["schedule"])
    baselines = wl.load_baselines(cfg.get("baselines"))
    cmp = wl.compare_workload(w, baselines, LearningRateSchedule(cfg["lr_offset"]), ur, cfg["temperature"])
    kt = ThermalEnvironment(cfg["temperature"]).kt
    rows = [_unit_row(cfg, kt, {"name": r.name, "method": r.method, "total_j": r.total_j, "per_op_kt": r.per_op_kt,
                                "ratio_to_lim_b": r.ratio_to_lim_b, "assumption": r.assumption}) for r in cmp]
    return rows, rows, _with_units(COMPARE_COLUMNS, cfg["units"]), {}


def _walk_config(cfg) -> mc.DescentWalkConfig:
    a = cfg["loss"]
    return mc.DescentWalkConfig(
        loss=((a[0], a[1]), (a[2], a[3])),
        grid_step=cfg["grid_step"],
        beta=cfg["beta"],
        lr=LearningRateSchedule(cfg["lr_offset"]),
        ur=parse_schedule(cfg["schedule"]),
        delta=_delta(cfg),
        steps=cfg["steps"],
        trials=cfg["trials"],
        seed=cfg["seed"],
        start=tuple(cfg["start"]),
        frozen_barrier=cfg.get("frozen_barrier"),
        tol=cfg["tol"],
    )


def cmd_mc(cfg):
    extra = {"generator": mc.GENERATOR}
    try:
        if cfg["mode"] == "kinetics":
            cell = BistableCellParams(cfg["barrier"], cfg["tilt"], cfg["r_max"])
            exp = mc.KineticsExperiment(cell, cfg["steps"], cfg["dt"], cfg["seed"])
            r = mc.mc_estimate_net_rate(exp)
            analytic = net_update_rate(cell)
            row = {"rate": r.rate, "std_error": r.std_error, "analytic": analytic,
                   "z_score": (r.rate - analytic) / r.std_error if r.std_error else 0.0,
                   "forward_hops": r.forward_hops, "backward_hops": r.backward_hops}
            return [row], [row], tuple(row), extra
        walk_cfg = _walk_config(cfg)
        walk = mc.mc_descent_walk(walk_cfg, record_trajectory=cfg.get("dump") is not None)
    except mc.ConfigurationError as exc:
        raise ValidationError(str(exc)) from None
    if cfg.get("dump"):
        _write_dump(cfg["dump"], walk.trajectory)
    extra["fraction_within_tol"] = walk.fraction_within_tol
    extra["mean_final_distance"] = float(walk.final_distance.mean())
    extra["total_hops"] = int(walk.hops.sum())
    if cfg["mode"] == "audit":
        a = mc.mc_energy_audit(walk_cfg, cfg["accounting"], walk)
        rows = [{"trial": i, "dissipation_kt": float(v), "hops": int(h)}
                for i, (v, h) in enumerate(zip(a.per_trial_kt, walk.hops))]
        extra.update({"accounting": a.accounting, "mean_kt": a.mean_kt, "std_error_kt": a.std_error_kt,
                      "mean_per_hop_kt": a.mean_per_hop_kt, "expected_per_hop_kt": a.expected_per_hop_kt})
        return rows, rows, ("trial", "dissipation_kt", "hops"), extra
    steps = np.unique(np.concatenate([[0], np.rint(np.logspace(0, math.log10(walk_cfg.steps), 60)).astype(int)]))
    rows = [{"step": int(s), "mean_loss": float(walk.mean_loss[s])} for s in steps]
    return rows, rows, ("step", "mean_loss"), extra


def _write_dump(path: str, traj: np.ndarray) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(DUMP_COLUMNS)
            for t, s, x, y, loss, hop in traj:
                w.writerow([int(t), int(s), repr(float(x)), repr(float(y)), repr(float(loss)), int(hop)])
    except OSError as exc:
        raise ValidationError(f"cannot write trajectory dump {path}: {exc.strerror}") from None


HANDLERS = {
    "estimate": cmd_estimate,
    "sweep": cmd_sweep,
    "trajectory": cmd_trajectory,
    "fit": cmd_fit,
    "compare": cmd_compare,
    "mc": cmd_mc,
}


def run(argv: list[str] | None = None, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise ValidationError(f"missing command; choose one of {', '.join(COMMANDS)}")
        cfg = resolve(args)
        json_results, csv_rows, columns, extra = HANDLERS[args.command](cfg)
        results = json_results if cfg["format"] == "json" else csv_rows
        meta = _meta(cfg, extra if cfg["format"] == "json" else {k: v for k, v in extra.items() if not isinstance(v, dict)})
        text = render(cfg, meta, results, columns)
        if args.output:
            try:
                Path(args.output).write_text(text, encoding="utf-8")
            except OSError as exc:
                raise ValidationError(f"cannot write {args.output}: {exc.strerror}") from None
        else:
            stdout.write(text)
    except ConvergenceError as exc:
        print(f"limb: convergence error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, ValueError) as exc:
        print(f"limb: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
