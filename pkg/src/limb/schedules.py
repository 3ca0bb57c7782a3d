"""Learning-rate and update-rate schedule families.

Schedules are closed-form and immutable so the series engine can pick a
family-specific tail bound. Step indices start at n = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

FAMILIES = ("polynomial", "exponential", "exp_unit", "log_poly")


@dataclass(frozen=True)
class LearningRateSchedule:
    """Harmonic learning rate eps_n = 1 / (n + offset)."""

    offset: float = 0.0

    def __post_init__(self):
        if self.offset < 0:
            raise ValueError(f"offset must be >= 0, got {self.offset}")

    def value(self, n):
        return 1.0 / (np.asarray(n, dtype=float) + self.offset)

    def describe(self) -> str:
        return f"harmonic:{self.offset:g}"


@dataclass(frozen=True)
class UpdateRateSchedule:
    """Normalised update rate r(n) = R_n / R_max.

    polynomial   n^-(1+gamma)
    exponential  exp(-gamma n)
    exp_unit     exp(-n)
    log_poly     n^-log(n)
    """

    family: str
    gamma: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown schedule family {self.family!r}; expected one of {FAMILIES}")
        if self.family == "exp_unit":
            object.__setattr__(self, "gamma", 1.0)
        elif self.family == "log_poly":
            object.__setattr__(self, "gamma", 0.0)
        elif not (self.gamma > 0 and math.isfinite(self.gamma)):
            # gamma = 0 makes sum r(n) diverge (zeta pole); probe the limit with small gamma
            raise ValueError(f"{self.family} schedule needs gamma > 0, got {self.gamma}")

    @property
    def exponent(self) -> float:
        """1 + gamma for the polynomial family."""
        return 1.0 + self.gamma

    def neg_log_rate(self, n):
        """-log r(n), continuous in n."""
        x = np.asarray(n, dtype=float)
        if self.family == "polynomial":
            return self.exponent * np.log(x)
        if self.family in ("exponential", "exp_unit"):
            return self.gamma * x
        lx = np.log(x)
        return lx * lx

    def value(self, n):
        return np.exp(-self.neg_log_rate(n))

    def is_geometric(self) -> bool:
        return self.family in ("exponential", "exp_unit")

    def describe(self) -> str:
        return {
            "polynomial": f"poly:{self.gamma:g}",
            "exponential": f"exp:{self.gamma:g}",
            "exp_unit": "expunit",
            "log_poly": "logpoly",
        }[self.family]


def parse_schedule(text: str) -> UpdateRateSchedule:
    """Parse ``poly:G``, ``exp:G``, ``expunit`` or ``logpoly``."""
    raw = text.strip().lower()
    name, _, arg = raw.partition(":")
    if name in ("expunit", "logpoly"):
        if arg:
            raise ValueError(f"schedule {name!r} takes no parameter (got {text!r})")
        return UpdateRateSchedule("exp_unit" if name == "expunit" else "log_poly")
    if name in ("poly", "exp"):
        if not arg:
            raise ValueError(f"schedule {name!r} needs a gamma, e.g. {name}:2.0")
        try:
            gamma = float(arg)
        except ValueError:
            raise ValueError(f"bad gamma in schedule {text!r}") from None
        return UpdateRateSchedule("polynomial" if name == "poly" else "exponential", gamma)
    raise ValueError(f"unknown schedule {text!r}; use poly:G, exp:G, expunit or logpoly")


def _check_step(n) -> None:
    if np.any(np.asarray(n) < 1):
        raise ValueError(f"step index must be >= 1, got {n}")


def eval_learning_rate(s: LearningRateSchedule, n):
    _check_step(n)
    out = s.value(n)
    return float(out) if np.ndim(out) == 0 else out


def eval_update_rate(s: UpdateRateSchedule, n):
    _check_step(n)
    out = s.value(n)
    return float(out) if np.ndim(out) == 0 else out


def log_grid(n_max: int, points: int) -> np.ndarray:
    """Unique integer steps, logarithmically spaced over [1, n_max]."""
    grid = np.unique(np.rint(np.logspace(0.0, math.log10(n_max), points)).astype(np.int64))
    return grid[grid >= 1]


@dataclass(frozen=True)
class ValidationReport:
    rate_bounded: bool
    rate_monotone: bool
    lr_monotone: bool
    lr_divergent: bool
    lr_partial_sum: float
    lr_divergence_floor: float
    rate_summable: bool
    rate_sum: float
    rate_tail_bound: float

    @property
    def ok(self) -> bool:
        return all(
            (self.rate_bounded, self.rate_monotone, self.lr_monotone, self.lr_divergent, self.rate_summable)
        )


def validate_schedules(
    lr: LearningRateSchedule, ur: UpdateRateSchedule, n_max: int = 10**6, points: int = 2000
) -> ValidationReport:
    from .analysis import ConvergenceError, sum_weighted

    grid = log_grid(n_max, points)
    # work in -log r so exp families do not underflow to 0 on the grid
    neg_log_r = ur.neg_log_rate(grid)
    eps = lr.value(grid)

    # exact harmonic partial sum up to n_max
    steps = np.arange(1, n_max + 1, dtype=float)
    partial = math.fsum(lr.value(steps))
    floor = math.log(n_max + 1) - math.log(1 + lr.offset)

    try:
        res = sum_weighted(ur, "unit")
        summable, total, tail = res.converged and math.isfinite(res.value), res.value, res.tail_bound
    except ConvergenceError as exc:
        summable, total, tail = False, exc.partial.value, exc.partial.tail_bound

    return ValidationReport(
        rate_bounded=bool(np.all(np.isfinite(neg_log_r) & (neg_log_r >= 0))),
        rate_monotone=bool(np.all(np.diff(neg_log_r) >= 0)),
        lr_monotone=bool(np.all(np.diff(eps) < 0)),
        lr_divergent=partial >= floor,
        lr_partial_sum=partial,
        lr_divergence_floor=floor,
        rate_summable=summable,
        rate_sum=total,
        rate_tail_bound=tail,
    )
