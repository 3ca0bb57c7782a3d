"""Training-energy estimators for learning-in-memory and reference limits.

Totals follow the ratio form

    E = #FLOPs * (per-operation energy) + M * E0_inf,

with per-operation energies in kT and E0_inf = log(1/delta), the
retention floor. Every result is an :class:`EnergyEstimate`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import DEFAULT_REL_TOL, SeriesResult, partial_log_sum, sum_weighted, zeta, zeta_prime
from .schedules import LearningRateSchedule, UpdateRateSchedule, log_grid
from .thermo import DEFAULT_TEMPERATURE, ThermalEnvironment, log_tanh_half

LN2 = math.log(2.0)
MEASUREMENT_LIMIT_KT = 2.0 * math.pi * LN2
LANDAUER_MEASUREMENT_KT = LN2 + MEASUREMENT_LIMIT_KT
DEFAULT_DELTA = 2.0**-16
DEFAULT_GAMMA = 2.0
DEFAULT_R_MAX = 1e12

METHODS = (
    "LIM_A_NUM",
    "LIM_A_CLOSED",
    "LIM_B_NUM",
    "LIM_B_UB",
    "LIM_B_LB_FINITE",
    "LIM_B_LB_CLOSED",
    "LIM_A_EXP_CLOSED",
    "LIM_B_EXP_CLOSED",
    "CEB",
    "LANDAUER_MEAS",
)


@dataclass(frozen=True)
class Workload:
    """A training job: #FLOPs, parameter count M and retention precision delta."""

    flops: float
    params: float
    delta: float = DEFAULT_DELTA
    label: str = ""

    def __post_init__(self):
        if self.flops < 0 or self.params < 0:
            raise ValueError("flops and params must be non-negative")
        if not 0 < self.delta <= 1:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")

    @classmethod
    def from_bits(cls, flops: float, params: float, bits: float, label: str = "") -> "Workload":
        if not bits > 0:
            raise ValueError(f"bits must be positive, got {bits}")
        return cls(flops, params, 2.0**-bits, label)

    @property
    def bits(self) -> float:
        return -math.log2(self.delta)


@dataclass(frozen=True)
class LimCalibration:
    """Calibration constant C linking learning rate to tilt (dE_n >= kT C eps_n).

    ``mode="asymptotic"`` pins C = 1/delta; ``mode="manual"`` uses
    beta * lambda_min * 2^(-2P).
    """

    beta: float = 1.0
    lambda_min: float = 1.0
    precision_bits: float = 0.0
    mode: str = "asymptotic"

    def __post_init__(self):
        if self.mode not in ("asymptotic", "manual"):
            raise ValueError(f"calibration mode must be 'asymptotic' or 'manual', got {self.mode!r}")
        if not (self.beta > 0 and self.lambda_min > 0 and self.precision_bits >= 0):
            raise ValueError("beta and lambda_min must be positive, precision_bits non-negative")

    def c(self, delta: float) -> float:
        if self.mode == "asymptotic":
            return 1.0 / delta
        return self.beta * self.lambda_min * 2.0 ** (-2.0 * self.precision_bits)


ASYMPTOTIC = LimCalibration()


@dataclass(frozen=True)
class EnergyEstimate:
    method: str
    dynamic_kt_per_op: float
    retention_kt: float
    flops: float
    temperature: float = DEFAULT_TEMPERATURE
    diagnostics: tuple[SeriesResult, ...] = ()
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method tag {self.method!r}")

    @property
    def kt(self) -> float:
        return ThermalEnvironment(self.temperature).kt

    @property
    def dynamic_joules(self) -> float:
        return self.flops * self.dynamic_kt_per_op * self.kt

    @property
    def retention_joules(self) -> float:
        return self.retention_kt * self.kt

    @property
    def total_kt(self) -> float:
        return self.flops * self.dynamic_kt_per_op + self.retention_kt

    @property
    def total_joules(self) -> float:
        return self.total_kt * self.kt


def asymptotic_barrier(delta: float) -> float:
    """Retention barrier floor log(1/delta) in kT."""
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    return -math.log(delta)


def _retention(w: Workload) -> float:
    return w.params * asymptotic_barrier(w.delta)


def barrier_profile(
    lr: LearningRateSchedule,
    ur: UpdateRateSchedule,
    delta: float,
    n: int,
    calibration: LimCalibration = ASYMPTOTIC,
) -> float:
    """Minimum barrier E0_n (kT) keeping the update rate at r(n) R_max.

    A negative value marks an infeasible step; it is returned unchanged.
    """
    if n < 1:
        raise ValueError(f"step index must be >= 1, got {n}")
    tilt = calibration.c(delta) * float(lr.value(n))
    return LN2 + float(ur.neg_log_rate(n)) + log_tanh_half(tilt)


def _ratio(num: SeriesResult, den: SeriesResult) -> float:
    return num.value / den.value


def lim_a_numeric(
    w: Workload,
    lr: LearningRateSchedule,
    ur: UpdateRateSchedule,
    temperature: float = DEFAULT_TEMPERATURE,
    calibration: LimCalibration = ASYMPTOTIC,
    rel_tol: float = DEFAULT_REL_TOL,
) -> EnergyEstimate:
    num = sum_weighted(ur, "learning_rate", lr=lr, rel_tol=rel_tol)
    den = sum_weighted(ur, "unit", rel_tol=rel_tol)
    per_op = calibration.c(w.delta) * _ratio(num, den)
    return EnergyEstimate("LIM_A_NUM", per_op, _retention(w), w.flops, temperature, (num, den))


def lim_a_closed_poly(w: Workload, gamma: float, temperature: float = DEFAULT_TEMPERATURE) -> EnergyEstimate:
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    per_op = zeta(2.0 + gamma) / zeta(1.0 + gamma) / w.delta
    return EnergyEstimate("LIM_A_CLOSED", per_op, _retention(w), w.flops, temperature, notes={"gamma": gamma})


def lim_b_numeric(
    w: Workload,
    lr: LearningRateSchedule,
    ur: UpdateRateSchedule,
    temperature: float = DEFAULT_TEMPERATURE,
    calibration: LimCalibration = ASYMPTOTIC,
    rel_tol: float = DEFAULT_REL_TOL,
) -> EnergyEstimate:
    num = sum_weighted(ur, "lim_b_barrier", lr=lr, tilt_scale=calibration.c(w.delta), rel_tol=rel_tol)
    den = sum_weighted(ur, "unit", rel_tol=rel_tol)
    return EnergyEstimate("LIM_B_NUM", _ratio(num, den), _retention(w), w.flops, temperature, (num, den))


def lim_b_upper(w: Workload, temperature: float = DEFAULT_TEMPERATURE) -> EnergyEstimate:
    """Constant-barrier ceiling: every operation pays log(1/delta)."""
    per_op = asymptotic_barrier(w.delta)
    return EnergyEstimate("LIM_B_UB", per_op, _retention(w), w.flops, temperature)


def lim_b_lower_closed(w: Workload, gamma: float, temperature: float = DEFAULT_TEMPERATURE) -> EnergyEstimate:
    """log 2 - gamma zeta'(1+gamma) / zeta(1+gamma); derived for gamma >> 1."""
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    s = 1.0 + gamma
    per_op = LN2 - gamma * zeta_prime(s) / zeta(s)
    notes = {"gamma": gamma, "derivation_regime": "gamma >> 1 and n*delta << 1"}
    return EnergyEstimate("LIM_B_LB_CLOSED", per_op, _retention(w), w.flops, temperature, notes=notes)


def lim_b_lower_finite(
    w: Workload, gamma: float, temperature: float = DEFAULT_TEMPERATURE, n_terms: int | None = None
) -> EnergyEstimate:
    """log 2 + (1+gamma) sum_{n<=N} log(n) n^-(1+gamma) / zeta(1+gamma), N = floor(1/delta) by default.

    Carries the (1+gamma) factor where the closed form carries gamma; both are reported.
    """
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    n_terms = int(math.floor(1.0 / w.delta)) if n_terms is None else int(n_terms)
    if n_terms < 1:
        raise ValueError(f"truncation N must be >= 1, got {n_terms}")
    s = 1.0 + gamma
    per_op = LN2 + s * partial_log_sum(s, n_terms) / zeta(s)
    notes = {"gamma": gamma, "N": n_terms}
    return EnergyEstimate("LIM_B_LB_FINITE", per_op, _retention(w), w.flops, temperature, notes=notes)


def lim_a_exp_closed(w: Workload, gamma: float, temperature: float = DEFAULT_TEMPERATURE) -> EnergyEstimate:
    """(1/delta) (e^gamma - 1) (-log(1 - e^-gamma)) for r(n) = e^(-gamma n)."""
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    per_op = math.expm1(gamma) * -math.log1p(-math.exp(-gamma)) / w.delta
    return EnergyEstimate("LIM_A_EXP_CLOSED", per_op, _retention(w), w.flops, temperature, notes={"gamma": gamma})


def lim_b_exp_closed(w: Workload, gamma: float, temperature: float = DEFAULT_TEMPERATURE) -> EnergyEstimate:
    """log 2 + gamma / (1 - e^-gamma), the tanh-saturated exponential-schedule form."""
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    per_op = LN2 + gamma / -math.expm1(-gamma)
    return EnergyEstimate("LIM_B_EXP_CLOSED", per_op, _retention(w), w.flops, temperature, notes={"gamma": gamma})


def ceb_energy(
    w: Workload,
    e_bit: float | None = None,
    bits: float | None = None,
    temperature: float = DEFAULT_TEMPERATURE,
) -> EnergyEstimate:
    """(#FLOPs + M) x bits x E_bit with a constant barrier per bit.

    ``e_bit`` is in joules; the default is kT log(1/delta) at delta = 2^-bits.
    """
    bits = w.bits if bits is None else bits
    if not bits > 0:
        raise ValueError(f"bits must be positive, got {bits}")
    kt = ThermalEnvironment(temperature).kt
    e_bit_kt = bits * LN2 if e_bit is None else e_bit / kt
    if not e_bit_kt > 0:
        raise ValueError(f"e_bit must be positive, got {e_bit}")
    per_op = bits * e_bit_kt
    notes = {"bits": bits, "e_bit_j": e_bit_kt * kt, "e_bit_source": "default" if e_bit is None else "user"}
    return EnergyEstimate("CEB", per_op, w.params * per_op, w.flops, temperature, notes=notes)


def shannon_capacity(p: float, f_c: float) -> float:
    """Binary symmetric channel capacity f_c [1 + p log2 p + (1-p) log2 (1-p)]."""
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")

    def plogp(x):
        return 0.0 if x == 0 else x * math.log2(x)

    return f_c * (1.0 + plogp(p) + plogp(1.0 - p))


def measurement_energy_per_bit(c_meas: float, w_meas: float, f_c: float, kt: float = 1.0) -> float:
    """P / C at p -> 0.5 for a thermal-noise-limited capacitive readout, in units of kt."""
    power = f_c * 0.5 * c_meas * w_meas**2
    sigma = math.sqrt(kt / c_meas)
    dp = w_meas / (2.0 * math.sqrt(2.0 * math.pi) * sigma)
    capacity = 2.0 / LN2 * f_c * dp**2
    return power / capacity / kt


def measurement_limit_per_bit() -> float:
    """Readout energy floor 2 pi ln2 ~ 4.3552 kT per bit."""
    return measurement_energy_per_bit(1e-15, 1.0, 1e9)


def landauer_measurement_total(
    w: Workload, bits: float | None = None, temperature: float = DEFAULT_TEMPERATURE
) -> EnergyEstimate:
    """(#FLOPs + M) x bits x (log 2 + 2 pi ln 2) kT."""
    bits = w.bits if bits is None else bits
    if not bits > 0:
        raise ValueError(f"bits must be positive, got {bits}")
    per_op = bits * (LN2 + measurement_limit_per_bit())
    return EnergyEstimate("LANDAUER_MEAS", per_op, w.params * per_op, w.flops, temperature, notes={"bits": bits})


@dataclass(frozen=True)
class TrajectoryPoint:
    n: int
    epsilon_n: float
    r_n: float
    tilt_kt: float
    barrier_kt: float
    power_watts: float
    feasible: bool


def trajectory(
    lr: LearningRateSchedule,
    ur: UpdateRateSchedule,
    delta: float = DEFAULT_DELTA,
    r_max: float = DEFAULT_R_MAX,
    n_points: int = 200,
    n_max: int = 10**8,
    temperature: float = DEFAULT_TEMPERATURE,
    calibration: LimCalibration = ASYMPTOTIC,
) -> tuple[list[TrajectoryPoint], dict]:
    """Barrier and instantaneous power E0_n R_max r(n) along the schedule.

    Returns the points and a check dict: ``monotone_barrier`` (only
    meaningful for polynomial schedules with harmonic eps) and
    ``infeasible_steps``.
    """
    if not r_max > 0:
        raise ValueError(f"r_max must be positive, got {r_max}")
    kt = ThermalEnvironment(temperature).kt
    points = []
    for n in log_grid(n_max, n_points):
        n = int(n)
        eps = float(lr.value(n))
        r = float(ur.value(n))
        b = barrier_profile(lr, ur, delta, n, calibration)
        power = b * kt * r_max * r
        points.append(TrajectoryPoint(n, eps, r, calibration.c(delta) * eps, b, power, b >= 0))
    barriers = np.array([p.barrier_kt for p in points])
    checks = {
        "monotone_barrier": bool(np.all(np.diff(barriers) >= 0)),
        "infeasible_steps": [p.n for p in points if not p.feasible],
    }
    return points, checks
