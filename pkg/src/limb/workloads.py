"""Model-size trends, workload projection and baseline comparisons."""

from __future__ import annotations

import configparser
import csv
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import estimators as est
from .schedules import LearningRateSchedule, UpdateRateSchedule
from .thermo import DEFAULT_TEMPERATURE, ThermalEnvironment

CSV_COLUMNS = ("name", "params", "flops", "reported_energy_j")
DEFAULT_BREAKPOINT = 1e9


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class ModelRecord:
    name: str
    params: float
    flops: float
    reported_energy_j: float | None = None

    def __post_init__(self):
        if not (self.params > 0 and self.flops > 0):
            raise ValueError(f"{self.name}: params and flops must be positive")
        if self.reported_energy_j is not None and not self.reported_energy_j > 0:
            raise ValueError(f"{self.name}: reported_energy_j must be positive when given")


@dataclass(frozen=True)
class TrendModel:
    """Two power laws in log10 space, joined at ``breakpoint_params``."""

    breakpoint_params: float = DEFAULT_BREAKPOINT
    slope_low: float = 2.0
    slope_high: float = 1.0
    intercept_low: float = 0.0
    intercept_high: float = 0.0
    continuity: bool = False

    def log_flops(self, params) -> np.ndarray:
        x = np.log10(np.asarray(params, dtype=float))
        low = self.intercept_low + self.slope_low * x
        high = self.intercept_high + self.slope_high * x
        return np.where(x < math.log10(self.breakpoint_params), low, high)


@dataclass(frozen=True)
class BaselineSpec:
    name: str
    joules_per_flop: float
    notes: str = ""

    def __post_init__(self):
        if not self.joules_per_flop > 0:
            raise ValueError(f"baseline {self.name!r}: joules_per_flop must be positive")


def load_records(path: str | Path | None = None) -> list[ModelRecord]:
    """Read ``name,params,flops,reported_energy_j``; defaults to the bundled dataset."""
    if path is None:
        text = resources.files("limb.data").joinpath("models.csv").read_text(encoding="utf-8")
        source = "bundled models.csv"
    else:
        text = Path(path).read_text(encoding="utf-8")
        source = str(path)
    rows = [line for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
    reader = csv.DictReader(rows)
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"{source}: header must be {','.join(CSV_COLUMNS)}, got {reader.fieldnames}")
    records = []
    for lineno, row in enumerate(reader, start=2):
        try:
            energy = row["reported_energy_j"].strip()
            records.append(
                ModelRecord(row["name"].strip(), float(row["params"]), float(row["flops"]), float(energy) if energy else None)
            )
        except (TypeError, ValueError) as exc:
            raise ValueError(f"{source}, data row {lineno}: {exc}") from None
    return records


def load_baselines(path: str | Path | None = None) -> list[BaselineSpec]:
    """Read baseline entries from an INI-style key-value file, one section per entry."""
    parser = configparser.ConfigParser(interpolation=None)
    if path is None:
        parser.read_string(resources.files("limb.data").joinpath("baselines.ini").read_text(encoding="utf-8"))
    else:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    out = []
    for section in parser.sections():
        entry = parser[section]
        if "joules_per_flop" not in entry:
            raise ValueError(f"baseline [{section}] is missing joules_per_flop")
        out.append(BaselineSpec(entry.get("name", section), float(entry["joules_per_flop"]), entry.get("notes", "")))
    return out


def fit_trend(
    records: list[ModelRecord],
    breakpoint: float | None = None,
    slopes: tuple[float, float] | None = None,
    continuous: bool = False,
) -> TrendModel:
    """Least-squares piecewise power law of flops against params.

    ``slopes`` pins (slope_low, slope_high) and fits intercepts only.
    ``continuous`` constrains both segments to meet at the breakpoint.
    With free slopes and fewer than two records on a side, a single
    segment is fitted to all records.
    """
    bp = DEFAULT_BREAKPOINT if breakpoint is None else float(breakpoint)
    if not bp > 0:
        raise FitError(f"breakpoint must be positive, got {bp}")
    x = np.log10([r.params for r in records])
    y = np.log10([r.flops for r in records])
    xb = math.log10(bp)
    low = x < xb
    n_low, n_high = int(low.sum()), int((~low).sum())
    need = 1 if slopes is not None else 2

    if continuous:
        if len(records) < (1 if slopes is not None else 3):
            raise FitError(f"continuous fit needs more records (have {len(records)})")
        # y = a + s_low (x - xb) below, a + s_high (x - xb) above
        if slopes is None:
            design = np.column_stack([np.ones_like(x), np.where(low, x - xb, 0.0), np.where(low, 0.0, x - xb)])
            (a, s_lo, s_hi), *_ = np.linalg.lstsq(design, y, rcond=None)
        else:
            s_lo, s_hi = slopes
            a = float(np.mean(y - np.where(low, s_lo, s_hi) * (x - xb)))
        return TrendModel(bp, float(s_lo), float(s_hi), float(a - s_lo * xb), float(a - s_hi * xb), True)

    if n_low < need or n_high < need:
        if slopes is not None:
            side = "below" if n_low < need else "above"
            raise FitError(f"no records {side} the breakpoint {bp:g} to anchor the {side} segment")
        if len(records) < 2:
            raise FitError(f"single-segment fit needs at least 2 records, have {len(records)}")
        slope, icpt = np.polyfit(x, y, 1)
        return TrendModel(bp, float(slope), float(slope), float(icpt), float(icpt), True)

    def segment(mask, pinned):
        if pinned is None:
            s, c = np.polyfit(x[mask], y[mask], 1)
            return float(s), float(c)
        return float(pinned), float(np.mean(y[mask] - pinned * x[mask]))

    s_lo, c_lo = segment(low, None if slopes is None else slopes[0])
    s_hi, c_hi = segment(~low, None if slopes is None else slopes[1])
    joined = abs((c_lo + s_lo * xb) - (c_hi + s_hi * xb)) <= 1e-12
    return TrendModel(bp, s_lo, s_hi, c_lo, c_hi, joined)


def project_flops(model: TrendModel, params: float) -> float:
    if not params > 0:
        raise ValueError(f"params must be positive, got {params}")
    return float(10.0 ** model.log_flops(params))


def gpu_hours_equivalent(energy_j: float, gpu_watts: float) -> float:
    if energy_j < 0 or not gpu_watts > 0:
        raise ValueError("energy must be >= 0 and gpu_watts > 0")
    return energy_j / gpu_watts / 3600.0


@dataclass(frozen=True)
class ComparisonRow:
    name: str
    method: str
    total_j: float
    per_op_kt: float
    ratio_to_lim_b: float
    assumption: bool = False


def compare_workload(
    w: est.Workload,
    baselines: list[BaselineSpec],
    lr: LearningRateSchedule | None = None,
    ur: UpdateRateSchedule | None = None,
    temperature: float = DEFAULT_TEMPERATURE,
    calibration: est.LimCalibration = est.ASYMPTOTIC,
) -> list[ComparisonRow]:
    """Baselines, reference limits and LIM estimates for one workload.

    Baselines are ``flops x joules_per_flop`` and carry ``assumption=True``.
    """
    lr = LearningRateSchedule() if lr is None else lr
    ur = UpdateRateSchedule("polynomial", est.DEFAULT_GAMMA) if ur is None else ur
    kt = ThermalEnvironment(temperature).kt
    estimates = [
        est.ceb_energy(w, temperature=temperature),
        est.landauer_measurement_total(w, temperature=temperature),
        est.lim_a_numeric(w, lr, ur, temperature, calibration),
        est.lim_b_numeric(w, lr, ur, temperature, calibration),
        est.lim_b_upper(w, temperature),
    ]
    if ur.family == "polynomial":
        estimates.append(est.lim_b_lower_closed(w, ur.gamma, temperature))
        estimates.append(est.lim_b_lower_finite(w, ur.gamma, temperature))
    lim_b = next(e for e in estimates if e.method == "LIM_B_NUM").total_joules

    rows = []
    for b in baselines:
        total = w.flops * b.joules_per_flop
        rows.append(ComparisonRow(b.name, "BASELINE", total, b.joules_per_flop / kt, total / lim_b, True))
    for e in estimates:
        rows.append(ComparisonRow(e.method.lower(), e.method, e.total_joules, e.dynamic_kt_per_op, e.total_joules / lim_b))
    return rows
