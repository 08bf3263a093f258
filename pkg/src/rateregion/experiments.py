"""LoS angle sweeps, scheduling versus spatial multiplexing, and 1/M scaling."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .channels import LoSScenario, los_gain, los_model, threshold
from .convexity import DEFAULT_GRID, check_convexity
from .rate_core import Direction, DomainError, PowerAllocation, rate_pair

DEFAULT_SWEEP_STEP = 0.01
DEFAULT_SUMRATE_STEP = 0.1
LOW_SNR = 0.01


def worker_count() -> int:
    """Thread cap from ``RRA_THREADS`` (default: CPU count)."""
    raw = os.environ.get("RRA_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _ordered_map(fn, items: Sequence, workers: Optional[int] = None) -> list:
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) < 64:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def angle_grid(step_deg: float, stop_deg: float = 90.0) -> np.ndarray:
    """``0, step, 2 step, ...`` up to and including ``stop_deg`` when it lies on the grid."""
    if not step_deg > 0:
        raise DomainError(f"grid step must be > 0, got {step_deg!r}")
    n = int(math.floor(stop_deg / step_deg + 1e-9)) + 1
    return np.arange(n) * step_deg


def grid_fraction(flags: Sequence[bool]) -> float:
    """Fraction of the swept interval covered by flagged grid points.

    Trapezoid weights: interior points stand for a full cell, the two endpoints
    for half a cell each. A one-point grid is its own fraction.
    """
    flags = np.asarray(flags, dtype=float)
    if flags.size == 1:
        return float(flags[0])
    return float((flags.sum() - 0.5 * (flags[0] + flags[-1])) / (flags.size - 1))


def count_runs(flags: Iterable[bool]) -> int:
    """Number of maximal contiguous runs of True."""
    flags = np.asarray(list(flags), dtype=bool)
    if flags.size == 0:
        return 0
    return int(flags[0]) + int(np.count_nonzero(flags[1:] & ~flags[:-1]))


@dataclass
class CrossValidation:
    checked: int = 0
    agreed: int = 0
    marginal: int = 0
    mismatches: List[float] = field(default_factory=list)

    @property
    def all_agree(self) -> bool:
        return not self.mismatches


@dataclass
class AngleSweepResult:
    M: int
    snr: float
    theta1: float
    direction: str
    theta2: np.ndarray
    g: np.ndarray
    convex: np.ndarray
    threshold: float
    nonconvex_fraction: float
    nonconvex_interval_count: int
    nonconvex_count: int
    cross_validation: Optional[CrossValidation] = None

    @property
    def grid_size(self) -> int:
        return len(self.theta2)

    @property
    def grid(self) -> List[Tuple[float, float, bool]]:
        return list(zip(self.theta2.tolist(), self.g.tolist(), self.convex.tolist()))


def numeric_verdicts(
    M: int,
    snr: float,
    theta2: np.ndarray,
    direction: Direction,
    theta1: float = 0.0,
    dH: float = 0.5,
    grid_n: int = DEFAULT_GRID,
    workers: Optional[int] = None,
):
    """Analytic-derivative verdicts on the compiled equal-gain LoS model at each angle."""

    def one(t2):
        s = LoSScenario.equal_gain(M, snr, theta1, float(t2), direction, dH)
        return check_convexity(los_model(s), grid_n)

    return _ordered_map(one, list(theta2), workers)


def angle_sweep(
    M: int,
    snr: float,
    direction=Direction.DL,
    grid_step: float = DEFAULT_SWEEP_STEP,
    theta1: float = 0.0,
    dH: float = 0.5,
    cross_stride: Optional[int] = 10,
    grid_n: int = DEFAULT_GRID,
) -> AngleSweepResult:
    """Sweep ``theta2`` over ``[0, 90]`` degrees (step ``grid_step``) with ``theta1`` fixed.

    Convexity at each angle is decided by comparing the LoS gain with the
    closed-form equal-gain threshold. Every ``cross_stride``-th point is also
    run through the numeric checker; disagreements on non-marginal points are
    recorded in ``cross_validation.mismatches`` (``theta2`` in radians). Pass
    ``cross_stride=None`` to skip this.
    """
    direction = Direction.parse(direction)
    theta2 = np.radians(angle_grid(grid_step))
    g = los_gain(theta1, theta2, M, dH)
    g = np.atleast_1d(g)
    limit = threshold(M, snr, direction)
    convex = g <= limit
    xval = None
    if cross_stride:
        xval = CrossValidation()
        idx = np.arange(0, len(theta2), int(cross_stride))
        for i, v in zip(idx, numeric_verdicts(M, snr, theta2[idx], direction, theta1, dH, grid_n)):
            xval.checked += 1
            if v.marginal:
                xval.marginal += 1
            elif v.convex == bool(convex[i]):
                xval.agreed += 1
            else:
                xval.mismatches.append(float(theta2[i]))
    return AngleSweepResult(
        M=int(M),
        snr=float(snr),
        theta1=float(theta1),
        direction=direction.value,
        theta2=theta2,
        g=g,
        convex=convex,
        threshold=limit,
        nonconvex_fraction=grid_fraction(~convex),
        nonconvex_interval_count=count_runs(~convex),
        nonconvex_count=int(np.count_nonzero(~convex)),
        cross_validation=xval,
    )


def _require_dl(s: LoSScenario):
    if s.direction is not Direction.DL:
        raise DomainError("sum-rate comparison is defined for downlink scenarios")


def sum_rate_multiplexing(s: LoSScenario) -> float:
    """Sum rate with both users served at once on an equal split of the DL budget."""
    _require_dl(s)
    r1, r2 = rate_pair(los_model(s), PowerAllocation(0.5, 0.5))
    return r1 + r2


def sum_rate_scheduling(s: LoSScenario) -> float:
    """Sum rate when each user gets half the resources, full power and no interference."""
    _require_dl(s)
    a1 = s.M * s.rho * s.beta1
    a2 = s.M * s.rho * s.beta2
    return 0.5 * (math.log2(1.0 + a1) + math.log2(1.0 + a2))


def scheduling_gain(s: LoSScenario) -> float:
    mux = sum_rate_multiplexing(s)
    if mux == 0.0:
        raise DomainError("multiplexing sum rate is zero (zero transmit power)")
    return sum_rate_scheduling(s) / mux


@dataclass
class SumRateComparison:
    M: int
    snr: float
    separations: np.ndarray  # degrees
    multiplexing: np.ndarray
    scheduling: np.ndarray
    crossover_separations: List[float]

    @property
    def grid(self) -> List[Tuple[float, float, float]]:
        return list(zip(self.separations.tolist(), self.multiplexing.tolist(), self.scheduling.tolist()))

    @property
    def gain(self) -> np.ndarray:
        return self.scheduling / self.multiplexing


def sum_rate_comparison(
    M: int,
    snr: float,
    separation_grid: Sequence[float],
    dH: float = 0.5,
    beta1: float = 1.0,
    beta2: float = 1.0,
) -> SumRateComparison:
    """Both policies across ``|theta1 - theta2|`` (degrees) with ``theta1 = 0``.

    ``crossover_separations`` lists each grid separation at which the better
    policy differs from the one at the preceding grid point.
    """
    seps = np.asarray(list(separation_grid), dtype=float)
    if seps.size == 0:
        raise DomainError("separation grid is empty")
    mux = np.empty_like(seps)
    sched = np.empty_like(seps)
    for i, sep in enumerate(seps):
        s = LoSScenario(M, dH, snr, beta1, beta2, 0.0, math.radians(sep), Direction.DL)
        mux[i] = sum_rate_multiplexing(s)
        sched[i] = sum_rate_scheduling(s)
    scheduling_wins = sched > mux
    flips = np.nonzero(scheduling_wins[1:] != scheduling_wins[:-1])[0] + 1
    return SumRateComparison(int(M), float(snr), seps, mux, sched, seps[flips].tolist())


def scaling_check(
    M_list: Sequence[int],
    snr: float = LOW_SNR,
    direction=Direction.DL,
    grid_step: float = DEFAULT_SWEEP_STEP,
    dH: float = 0.5,
) -> List[Tuple[int, float, float]]:
    """``(M, nonconvex_fraction, nonconvex_fraction * M)`` per antenna count.

    At low SNR the product should be roughly constant across ``M``.
    """
    rows = []
    for M in M_list:
        res = angle_sweep(M, snr, direction, grid_step, dH=dH, cross_stride=None)
        rows.append((int(M), res.nonconvex_fraction, res.nonconvex_fraction * M))
    return rows


def relative_spread(values: Sequence[float]) -> float:
    """``(max - min) / mean``; zero for fewer than two values."""
    values = np.asarray(list(values), dtype=float)
    if values.size < 2:
        return 0.0
    return float((values.max() - values.min()) / values.mean())
