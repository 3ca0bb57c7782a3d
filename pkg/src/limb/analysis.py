"""Riemann zeta, its derivative, and a truncated-series engine with tail bounds.

``sum_weighted`` evaluates the infinite sums behind every estimator:

    unit            sum r(n)
    learning_rate   sum eps_n r(n)
    lim_b_barrier   sum r(n) [log(2 / r(n)) + log_tanh_half(c eps_n)]

Polynomial and log_poly schedules use Euler-Maclaurin against the tail
integral (integral test plus trapezoid and derivative corrections).
Exponential schedules use a geometric ratio bound.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .schedules import LearningRateSchedule, UpdateRateSchedule
from .thermo import log_tanh_half_array

ZETA_HEAD_TERMS = 50
TERM_CAP = 10**8
CHUNK = 4096
DEFAULT_REL_TOL = 1e-9
TERMS = ("unit", "learning_rate", "lim_b_barrier")

_POLE_GAP = 1e-6
_EPS = np.finfo(float).eps
# B_2k / (2k)! for k = 1..4
_EM_COEFFS = (1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0)


@dataclass(frozen=True)
class SeriesResult:
    value: float
    terms_used: int
    tail_bound: float
    converged: bool

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "terms_used", int(self.terms_used))
        object.__setattr__(self, "tail_bound", float(self.tail_bound))
        object.__setattr__(self, "converged", bool(self.converged))


class ConvergenceError(ArithmeticError):
    """Series could not be certified within the term cap."""

    def __init__(self, message: str, partial: SeriesResult):
        super().__init__(message)
        self.partial = partial


def _check_s(s: float) -> None:
    if not s >= 1.0 + _POLE_GAP:
        raise ValueError(f"s = {s!r} is too close to the pole of zeta at s = 1 (need s >= 1 + 1e-6)")


def _em_tails(s: float, m: int) -> tuple[float, float]:
    """(sum_{n>=m} n^-s, sum_{n>=m} log(n) n^-s) by Euler-Maclaurin."""
    lm = math.log(m)
    sm1 = s - 1.0
    ms = m ** (-s)
    m1s = math.exp(-sm1 * lm)  # m^(1-s), accurate as s -> 1
    tail = m1s / sm1 + 0.5 * ms
    dtail = -m1s * (lm / sm1 + 1.0 / (sm1 * sm1)) - 0.5 * lm * ms
    for k, c in enumerate(_EM_COEFFS, start=1):
        # s (s+1) ... (s + 2k - 2) and its s-derivative
        factors = [s + j for j in range(2 * k - 1)]
        prod = math.prod(factors)
        dprod = prod * sum(1.0 / f for f in factors)
        power = m ** (-s - 2 * k + 1)
        tail += c * prod * power
        dtail += c * (dprod - lm * prod) * power
    return tail, -dtail


def zeta(s: float) -> float:
    """Riemann zeta for real s >= 1 + 1e-6."""
    _check_s(s)
    n = np.arange(1, ZETA_HEAD_TERMS, dtype=float)
    head = math.fsum(n ** (-s))
    tail, _ = _em_tails(s, ZETA_HEAD_TERMS)
    return head + tail


def zeta_prime(s: float) -> float:
    """d zeta / ds = -sum log(n) n^-s."""
    _check_s(s)
    n = np.arange(2, ZETA_HEAD_TERMS, dtype=float)
    head = math.fsum(np.log(n) * n ** (-s))
    _, tail = _em_tails(s, ZETA_HEAD_TERMS)
    return -(head + tail)


def partial_log_sum(s: float, n_max: int) -> float:
    """sum_{n=1}^{n_max} log(n) / n^s."""
    _check_s(s)
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    if n_max <= 1 << 24:
        total = []
        for start in range(2, n_max + 1, CHUNK * 16):
            n = np.arange(start, min(start + CHUNK * 16, n_max + 1), dtype=float)
            total.append(math.fsum(np.log(n) * n ** (-s)))
        return math.fsum(total)
    _, tail = _em_tails(s, n_max + 1)
    return -zeta_prime(s) - tail


# -- integrands ---------------------------------------------------------------


class _Integrand:
    """Continuous extension f(x) of the n-th series term."""

    def __init__(self, schedule, term, lr, tilt_scale):
        self.schedule = schedule
        self.term = term
        self.lr = lr
        self.scale = tilt_scale

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        nlr = self.schedule.neg_log_rate(x)
        r = np.exp(-nlr)
        if self.term == "unit":
            return r
        eps = self.lr.value(x)
        if self.term == "learning_rate":
            return r * eps
        return r * (math.log(2.0) + nlr + log_tanh_half_array(self.scale * eps))

    def barrier(self, x):
        x = np.asarray(x, dtype=float)
        return math.log(2.0) + self.schedule.neg_log_rate(x) + log_tanh_half_array(self.scale * self.lr.value(x))


def _q_of_y(y):
    """log(tanh(y/2) / (y/2)): the part of log_tanh_half beyond its log(y/2) asymptote."""
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    small = y < 1e-3
    ys = y[small] ** 2
    out[small] = -ys / 24.0 + ys * ys / 2880.0 - ys**3 / 181440.0
    yl = y[~small]
    out[~small] = log_tanh_half_array(yl) - np.log(yl / 2.0)
    return out


def _quad1(func, lo, hi, pts=None):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        v, e = integrate.quad(func, lo, hi, epsabs=0.0, epsrel=1e-13, limit=400, points=pts)
    if caught:
        # quad stopped short of its 1e-13 target; do not trust its own estimate below 1e-10
        e = max(e, 1e-10 * abs(v))
    return v, e


def _quad(func, a, b, points=()):
    pts = [p for p in points if a < p < b]
    if math.isinf(b):
        edges = [a, *pts, math.inf]
        parts = [_quad1(func, lo, hi) for lo, hi in zip(edges, edges[1:])]
        return sum(p[0] for p in parts), sum(p[1] for p in parts)
    return _quad1(func, a, b, pts or None)


def _tail_integral(f: _Integrand, n0: int) -> tuple[float, float]:
    """(integral_{n0}^inf f(x) dx, absolute error estimate)."""
    sched = f.schedule
    u0 = math.log(n0)
    offset = f.lr.offset if f.lr is not None else 0.0
    if sched.family == "polynomial" and (f.term == "unit" or offset == 0.0):
        g = sched.gamma
        s = sched.exponent
        if f.term == "unit":
            return math.exp(-g * u0) / g, 0.0
        if f.term == "learning_rate":
            return math.exp(-s * u0) / s, 0.0
        # barrier = log(c) + gamma log x + q(c / x)
        analytic = math.exp(-g * u0) * ((math.log(f.scale) + 1.0) / g + u0)
        uc = math.log(f.scale)
        u1 = max(u0, uc + 20.0)
        far = -(f.scale**2) * math.exp(-(2.0 + g) * u1) / (24.0 * (2.0 + g))
        near, err = 0.0, 0.0
        if u1 > u0:
            near, err = _quad(lambda u: math.exp(-g * u) * float(_q_of_y(np.array([f.scale * math.exp(-u)]))[0]),
                              u0, u1, points=(uc,))
        return analytic + near + far, err

    def in_u(u):
        x = math.exp(u)
        return float(f(np.array([x]))[0]) * x

    points = []
    if f.term == "lim_b_barrier":
        points.append(math.log(f.scale))
    if sched.family == "log_poly":
        hi = max(u0, 1.0) + 40.0
        return _quad(in_u, u0, hi, points=points)
    return _quad(in_u, u0, math.inf, points=points)


def _derivatives(f: _Integrand, x: float) -> tuple[float, float]:
    h = 0.01 * x
    lo, mid, hi = f(np.array([x - h, x, x + h]))
    return (hi - lo) / (2 * h), (hi - 2 * mid + lo) / (h * h)


def _block_sum(f: _Integrand, start: int, stop: int) -> float:
    """Sum f(n) for start <= n < stop in ascending 4096-term chunks."""
    parts = []
    for lo in range(start, stop, CHUNK):
        n = np.arange(lo, min(lo + CHUNK, stop), dtype=float)
        parts.append(math.fsum(f(n)))
    return math.fsum(parts)


def _sum_integral_test(f: _Integrand, rel_tol: float, min_terms: int | None) -> SeriesResult:
    n_cut = 64 if min_terms is None else max(8, int(min_terms))
    head = _block_sum(f, 1, n_cut)
    while True:
        tail_int, quad_err = _tail_integral(f, n_cut)
        fN = float(f(np.array([float(n_cut)]))[0])
        d1, d2 = _derivatives(f, float(n_cut))
        value = head + tail_int + 0.5 * fN - d1 / 12.0
        # EM remainder: |R| <= (sqrt(3)/216) int |f'''| = 0.00802 |f''(N)|; 1/120 plus 1.5x for the FD estimate
        bound = 1.5 * abs(d2) / 120.0 + quad_err + 8 * _EPS * abs(value)
        converged = bound <= rel_tol * abs(value)
        if converged or min_terms is not None:
            return SeriesResult(value, n_cut, bound, converged)
        nxt = n_cut * 4
        if nxt > TERM_CAP:
            partial = SeriesResult(value, n_cut, bound, False)
            raise ConvergenceError(f"tail bound {bound:.3g} above tolerance at the {TERM_CAP:g}-term cap", partial)
        head += _block_sum(f, n_cut, nxt)
        n_cut = nxt


def _geometric_tail(f: _Integrand, n_cut: int) -> float:
    """Upper bound on sum_{n >= n_cut} f(n), or inf if not yet certifiable."""
    g = f.schedule.gamma
    rho = math.exp(-g)
    if f.term == "lim_b_barrier":
        offset = f.lr.offset
        b = float(f.barrier(np.array([float(n_cut)]))[0])
        # barrier is non-decreasing once gamma > 1/(n + offset) and grows by at most gamma per step
        if not (b > 0 and g * (n_cut + offset) > 1.0):
            return math.inf
        rho *= 1.0 + g / b
        if rho >= 1.0:
            return math.inf
    return float(f(np.array([float(n_cut)]))[0]) / (1.0 - rho)


def _sum_geometric(f: _Integrand, rel_tol: float, min_terms: int | None) -> SeriesResult:
    block = CHUNK * 16
    parts = []
    n_cut = 1
    while True:
        stop = n_cut + block if min_terms is None else int(min_terms) + 1
        parts.append(_block_sum(f, n_cut, stop))
        n_cut = stop
        head = math.fsum(parts)
        upper = _geometric_tail(f, n_cut)
        value = head + 0.5 * upper if math.isfinite(upper) else head
        bound = 0.5 * upper + 8 * _EPS * abs(value)
        converged = bound <= rel_tol * abs(value)
        if converged or min_terms is not None:
            return SeriesResult(value, n_cut - 1, bound, converged)
        if n_cut > TERM_CAP:
            raise ConvergenceError(
                f"geometric tail not certified within {TERM_CAP:g} terms", SeriesResult(value, n_cut - 1, bound, False)
            )


def sum_weighted(
    schedule: UpdateRateSchedule,
    term: str,
    *,
    lr: LearningRateSchedule | None = None,
    delta: float | None = None,
    tilt_scale: float | None = None,
    rel_tol: float = DEFAULT_REL_TOL,
    min_terms: int | None = None,
) -> SeriesResult:
    """Sum a registered integrand over n = 1..inf with a certified tail.

    ``tilt_scale`` is the calibration constant C multiplying eps_n in the
    LIM_B barrier; it defaults to 1 / delta. ``min_terms`` fixes the
    explicit head length instead of adapting it (used to probe tail-bound
    soundness); the result is then returned even if not converged.
    """
    if term not in TERMS:
        raise ValueError(f"unknown integrand {term!r}; registered: {TERMS}")
    if not 1e-14 < rel_tol < 1e-3:
        raise ValueError(f"rel_tol must lie in (1e-14, 1e-3), got {rel_tol}")
    if term != "unit" and lr is None:
        lr = LearningRateSchedule()
    if term == "lim_b_barrier":
        if tilt_scale is None:
            if delta is None:
                raise ValueError("lim_b_barrier needs delta or tilt_scale")
            tilt_scale = 1.0 / delta
        if not tilt_scale > 0:
            raise ValueError(f"tilt_scale must be positive, got {tilt_scale}")
    f = _Integrand(schedule, term, lr, tilt_scale)
    if schedule.is_geometric():
        return _sum_geometric(f, rel_tol, min_terms)
    return _sum_integral_test(f, rel_tol, min_terms)
