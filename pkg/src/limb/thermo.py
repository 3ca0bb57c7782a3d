"""Bistable-well kinetics and the kT energy scale.

Every energy inside the package is a dimensionless multiple of kT.
Conversion to joules happens only at the output boundary via
:func:`to_joules`.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

BOLTZMANN = 1.380649e-23  # J/K, exact by SI definition
DEFAULT_TEMPERATURE = 300.0  # K
TEMPERATURE_ENV = "LIMB_TEMP_K"

_SMALL_TILT = 1e-8
_LARGE_TILT = 1.0  # above this log(tanh) loses digits as tanh -> 1


def default_temperature() -> float:
    """Default temperature, overridable through ``LIMB_TEMP_K``."""
    raw = os.environ.get(TEMPERATURE_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_TEMPERATURE
    value = float(raw)
    if not value > 0:
        raise ValueError(f"{TEMPERATURE_ENV} must be positive, got {raw!r}")
    return value


@dataclass(frozen=True)
class ThermalEnvironment:
    temperature: float = DEFAULT_TEMPERATURE
    kt: float = field(init=False)

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError(f"temperature must be positive, got {self.temperature}")
        object.__setattr__(self, "kt", BOLTZMANN * self.temperature)


@dataclass(frozen=True)
class BistableCellParams:
    """One memory cell: barrier and tilt in kT units, r_max in 1/s."""

    barrier: float
    tilt: float
    r_max: float

    def __post_init__(self):
        if self.barrier < 0:
            raise ValueError(f"barrier must be >= 0, got {self.barrier}")
        if self.tilt < 0:
            raise ValueError(f"tilt must be >= 0, got {self.tilt}")
        if not self.r_max > 0:
            raise ValueError(f"r_max must be positive, got {self.r_max}")


def p_transition(barrier: float) -> float:
    """Boltzmann hop probability exp(-barrier), i.e. R0 / R_max."""
    if barrier < 0:
        raise ValueError(f"barrier must be >= 0, got {barrier}")
    return math.exp(-barrier)


def log_tanh_half(x: float) -> float:
    """log(tanh(x / 2)) for x > 0, accurate from 1e-10 to 1e10 and beyond."""
    if not x > 0:
        raise ValueError(f"log_tanh_half needs x > 0, got {x}")
    if x >= _LARGE_TILT:
        # tanh(x/2) = (1 - e^-x) / (1 + e^-x)
        t = math.exp(-x)
        return math.log1p(-t) - math.log1p(t)
    if x <= _SMALL_TILT:
        return math.log(x / 2.0) - x * x / 24.0
    return math.log(math.tanh(x / 2.0))


def log_tanh_half_array(x: np.ndarray) -> np.ndarray:
    """Vectorised :func:`log_tanh_half`."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("log_tanh_half needs x > 0")
    out = np.empty_like(x)
    big = x >= _LARGE_TILT
    tiny = x <= _SMALL_TILT
    mid = ~(big | tiny)
    t = np.exp(-x[big])
    out[big] = np.log1p(-t) - np.log1p(t)
    out[tiny] = np.log(x[tiny] / 2.0) - x[tiny] ** 2 / 24.0
    out[mid] = np.log(np.tanh(x[mid] / 2.0))
    return out


def net_update_rate(cell: BistableCellParams) -> float:
    """Net forward rate 2 r_max exp(-E0) tanh(dE / 2).

    Not clipped to r_max; use :func:`is_feasible` on the result.
    """
    return 2.0 * cell.r_max * math.exp(-cell.barrier) * math.tanh(cell.tilt / 2.0)


def barrier_for_rate(rate: float, tilt: float, r_max: float) -> float:
    """Barrier (kT) that yields net update ``rate`` under ``tilt``.

    Negative results mean the rate is unreachable; the caller decides.
    """
    if not rate > 0:
        raise ValueError(f"rate must be positive, got {rate}")
    if not tilt > 0:
        raise ValueError(f"tilt must be positive, got {tilt}")
    if not r_max > 0:
        raise ValueError(f"r_max must be positive, got {r_max}")
    return math.log(2.0 * r_max / rate) + log_tanh_half(tilt)


def is_feasible(rate: float, r_max: float) -> bool:
    return rate <= r_max


def to_joules(value: float, env: ThermalEnvironment) -> float:
    return value * env.kt
