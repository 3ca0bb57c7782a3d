"""Monte Carlo checks of the bistable-cell kinetics and a quantised descent walk.

Continuous-time hopping is approximated on a fixed step dt. Each
direction fires independently with probability 1 - exp(-rate dt), at most
once per step; keeping that probability <= 0.05 bounds the per-direction
rate bias at about 2.5%.

Generators are numpy PCG64 streams seeded from (seed, trial index), so
results do not depend on the order trials are run in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .estimators import ASYMPTOTIC, DEFAULT_DELTA, LimCalibration, barrier_profile
from .schedules import LearningRateSchedule, UpdateRateSchedule
from .thermo import BistableCellParams, net_update_rate

GENERATOR = "numpy.random.PCG64"
MAX_HOP_PROBABILITY = 0.05
_CHUNK = 1 << 20


class ConfigurationError(ValueError):
    pass


def _rng(seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(stream)])))


def directional_rates(barrier: float, tilt: float, r_max: float) -> tuple[float, float]:
    """Forward and backward rates R0 + R/2 and R0 - R/2."""
    base = r_max * math.exp(-barrier)
    half = 0.5 * net_update_rate(BistableCellParams(barrier, tilt, r_max))
    return base + half, base - half


@dataclass(frozen=True)
class KineticsExperiment:
    cell: BistableCellParams
    steps: int
    dt: float
    seed: int = 0

    def __post_init__(self):
        if self.steps < 1:
            raise ConfigurationError(f"steps must be >= 1, got {self.steps}")
        if not self.dt > 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if self.cell.r_max * self.dt > 0.1:
            raise ConfigurationError(f"r_max * dt = {self.cell.r_max * self.dt:g} exceeds 0.1")
        p_fwd, p_bwd = self.hop_probabilities()
        if max(p_fwd, p_bwd) > MAX_HOP_PROBABILITY:
            raise ConfigurationError(
                f"per-step hop probability {max(p_fwd, p_bwd):.4f} exceeds {MAX_HOP_PROBABILITY}; reduce dt"
            )

    def hop_probabilities(self) -> tuple[float, float]:
        fwd, bwd = directional_rates(self.cell.barrier, self.cell.tilt, self.cell.r_max)
        return -math.expm1(-fwd * self.dt), -math.expm1(-bwd * self.dt)

    def expected_estimate(self) -> float:
        """Mean of :func:`mc_estimate_net_rate` under the discretisation."""
        p_fwd, p_bwd = self.hop_probabilities()
        return (p_fwd - p_bwd) / self.dt


@dataclass(frozen=True)
class RateEstimate:
    rate: float
    std_error: float
    forward_hops: int
    backward_hops: int


def mc_estimate_net_rate(exp: KineticsExperiment) -> RateEstimate:
    """Simulate forward/backward hops step by step and return the net rate."""
    p_fwd, p_bwd = exp.hop_probabilities()
    rng = _rng(exp.seed)
    fwd = bwd = 0
    left = exp.steps
    while left > 0:
        k = min(left, _CHUNK)
        u = rng.random((k, 2))
        fwd += int(np.count_nonzero(u[:, 0] < p_fwd))
        bwd += int(np.count_nonzero(u[:, 1] < p_bwd))
        left -= k
    total_time = exp.steps * exp.dt
    # per-step net count X = B_f - B_b with independent Bernoulli parts
    var = p_fwd * (1 - p_fwd) + p_bwd * (1 - p_bwd)
    se = math.sqrt(var * exp.steps) / total_time
    return RateEstimate((fwd - bwd) / total_time, se, fwd, bwd)


@dataclass(frozen=True)
class DescentWalkConfig:
    """Quantised 2-D descent on L(w) = 1/2 w^T A w.

    Each axis is a separate bistable cell. Its tilt at step n is
    beta * (loss drop of a one-grid-step downhill move); the barrier
    follows the schedule-driven profile, or ``frozen_barrier`` if set.
    Time is measured in units of 1 / R_max, so the hop probability on an
    axis is 1 - exp(-2 exp(-E0_n) tanh(tilt / 2)).
    """

    loss: tuple[tuple[float, float], tuple[float, float]] = ((1.0, 0.0), (0.0, 1.0))
    grid_step: float = 1.0
    beta: float = 50.0
    lr: LearningRateSchedule = field(default_factory=LearningRateSchedule)
    ur: UpdateRateSchedule = field(default_factory=lambda: UpdateRateSchedule("polynomial", 0.5))
    delta: float = 0.5
    steps: int = 10_000
    trials: int = 200
    seed: int = 0
    start: tuple[int, int] = (10, 10)
    frozen_barrier: float | None = None
    tol: float = 2.0
    calibration: LimCalibration = ASYMPTOTIC
    dims: int = 2

    def __post_init__(self):
        if self.dims != 2:
            raise ConfigurationError("only the 2-D walk is supported")
        a = np.asarray(self.loss, dtype=float)
        if a.shape != (2, 2) or not np.allclose(a, a.T):
            raise ConfigurationError("loss must be a symmetric 2x2 matrix")
        if not np.all(np.linalg.eigvalsh(a) > 0):
            raise ConfigurationError(f"loss matrix is not positive-definite (eigenvalues {np.linalg.eigvalsh(a)})")
        if not (self.grid_step > 0 and self.beta > 0):
            raise ConfigurationError("grid_step and beta must be positive")
        if self.steps < 1 or self.trials < 1:
            raise ConfigurationError("steps and trials must be >= 1")

    @property
    def matrix(self) -> np.ndarray:
        return np.asarray(self.loss, dtype=float)

    def barriers(self) -> np.ndarray:
        """E0_n for n = 1..steps."""
        if self.frozen_barrier is not None:
            return np.full(self.steps, float(self.frozen_barrier))
        return np.array(
            [barrier_profile(self.lr, self.ur, self.delta, n, self.calibration) for n in range(1, self.steps + 1)]
        )


@dataclass
class WalkResult:
    mean_loss: np.ndarray  # index 0 is the start, index n after step n
    final_distance: np.ndarray  # grid units, per trial
    fraction_within_tol: float
    hops: np.ndarray  # hops per trial
    hop_counts_by_step: np.ndarray  # total hops across trials at each step
    dissipation_lim_a: np.ndarray  # kT per trial, sum of tilts at realised hops
    dissipation_lim_b: np.ndarray  # kT per trial, sum of barriers at realised hops
    barriers: np.ndarray
    trajectory: np.ndarray | None = None  # rows: trial, step, wx, wy, loss, hop
    meta: dict = field(default_factory=dict)


def _loss(a: np.ndarray, w: np.ndarray) -> np.ndarray:
    return 0.5 * np.einsum("ti,ij,tj->t", w, a, w)


def mc_descent_walk(cfg: DescentWalkConfig, record_trajectory: bool = False) -> WalkResult:
    a = cfg.matrix
    h = cfg.grid_step
    barriers = cfg.barriers()
    pos = np.tile(np.asarray(cfg.start, dtype=np.int64), (cfg.trials, 1))
    rngs = [_rng(cfg.seed, t) for t in range(cfg.trials)]
    mean_loss = np.empty(cfg.steps + 1)
    mean_loss[0] = _loss(a, pos * h).mean()
    hops = np.zeros(cfg.trials, dtype=np.int64)
    hop_counts = np.zeros(cfg.steps, dtype=np.int64)
    diss_a = np.zeros(cfg.trials)
    diss_b = np.zeros(cfg.trials)
    rows = []
    if record_trajectory:
        rows.append(np.column_stack([np.arange(cfg.trials), np.zeros(cfg.trials), pos * h, _loss(a, pos * h),
                                     np.zeros(cfg.trials)]))
    unit = np.eye(2, dtype=np.int64)

    for block in range(0, cfg.steps, 4096):
        k = min(4096, cfg.steps - block)
        # each trial draws its own block of uniforms: scheduling-order independent
        u = np.stack([g.random((k, 2)) for g in rngs], axis=1)
        for i in range(k):
            n = block + i  # 0-based step index, physical step n + 1
            b = barriers[n]
            w = pos * h
            current = _loss(a, w)
            move = np.zeros_like(pos)
            tilt_used = np.zeros(cfg.trials)
            for axis in (0, 1):
                up = _loss(a, (pos + unit[axis]) * h)
                down = _loss(a, (pos - unit[axis]) * h)
                direction = np.where(up < down, 1, -1)
                drop = current - np.minimum(up, down)
                tilt = cfg.beta * np.maximum(drop, 0.0)
                rate = 2.0 * math.exp(-b) * np.tanh(tilt / 2.0)
                fire = u[i, :, axis] < -np.expm1(-rate)
                move[:, axis] = np.where(fire, direction, 0)
                tilt_used += np.where(fire, tilt, 0.0)
            n_moves = np.count_nonzero(move, axis=1)
            pos += move
            hops += n_moves
            hop_counts[n] = int(n_moves.sum())
            diss_a += tilt_used
            diss_b += n_moves * b
            new_loss = _loss(a, pos * h)
            mean_loss[n + 1] = new_loss.mean()
            if record_trajectory:
                rows.append(np.column_stack([np.arange(cfg.trials), np.full(cfg.trials, n + 1), pos * h, new_loss,
                                             (n_moves > 0).astype(float)]))

    dist = np.linalg.norm(pos.astype(float), axis=1)
    traj = None
    if record_trajectory:
        traj = np.concatenate(rows)
        traj = traj[np.lexsort((traj[:, 1], traj[:, 0]))]
    return WalkResult(
        mean_loss=mean_loss,
        final_distance=dist,
        fraction_within_tol=float(np.mean(dist <= cfg.tol)),
        hops=hops,
        hop_counts_by_step=hop_counts,
        dissipation_lim_a=diss_a,
        dissipation_lim_b=diss_b,
        barriers=barriers,
        trajectory=traj,
        meta={"generator": GENERATOR, "seed": cfg.seed, "trials": cfg.trials, "steps": cfg.steps},
    )


@dataclass(frozen=True)
class EnergyAudit:
    accounting: str
    per_trial_kt: np.ndarray
    mean_kt: float
    std_error_kt: float
    total_hops: int
    mean_per_hop_kt: float
    expected_per_hop_kt: float


def hop_weighted_barrier(hop_counts_by_step: np.ndarray, barriers: np.ndarray) -> float:
    """sum_n c_n E0_n / sum_n c_n for per-step hop counts c_n."""
    counts = np.asarray(hop_counts_by_step, dtype=float)
    total = counts.sum()
    if total == 0:
        return 0.0
    return math.fsum(counts * barriers) / total


def mc_energy_audit(cfg: DescentWalkConfig, accounting: str = "lim_b", walk: WalkResult | None = None) -> EnergyAudit:
    """Dissipation realised by the walk's hops.

    ``lim_a`` charges the tilt of each hop, ``lim_b`` the barrier at the
    hop's step. ``expected_per_hop_kt`` is the barrier profile averaged
    with the realised hop histogram.
    """
    if accounting not in ("lim_a", "lim_b"):
        raise ValueError(f"accounting must be 'lim_a' or 'lim_b', got {accounting!r}")
    walk = mc_descent_walk(cfg) if walk is None else walk
    per_trial = walk.dissipation_lim_a if accounting == "lim_a" else walk.dissipation_lim_b
    total_hops = int(walk.hops.sum())
    se = float(per_trial.std(ddof=1) / math.sqrt(len(per_trial))) if len(per_trial) > 1 else 0.0
    per_hop = float(per_trial.sum() / total_hops) if total_hops else 0.0
    return EnergyAudit(
        accounting=accounting,
        per_trial_kt=per_trial,
        mean_kt=float(per_trial.mean()),
        std_error_kt=se,
        total_hops=total_hops,
        mean_per_hop_kt=per_hop,
        expected_per_hop_kt=hop_weighted_barrier(walk.hop_counts_by_step, walk.barriers),
    )
