"""Convexity of two-user rate regions.

Two independent routes are provided:

* an analytic checker that evaluates ``d^2 R1 / d R2^2`` along each boundary
  segment from closed-form derivatives of the linear-fractional rate forms,
  plus (uplink) the slope ordering at the corner where the two segments meet;
* a chord oracle that works from the definition: the region is convex iff no
  chord between two boundary points leaves it.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np

from .rate_core import (
    LN2,
    SEGMENTS,
    ArrayLike,
    Direction,
    DomainError,
    GeneralRateModel,
    LinearFractional,
    RateRegionError,
    SelectorError,
    as_linear_fractional,
    sample_boundary,
)

ZETA = 1.0 / LN2

TOL_CONVEX = 1e-9
DEFAULT_GRID = 1001
MARGINAL_FACTOR = 10.0

DEFAULT_RESOLUTION = 512
TOL_ORACLE = 1e-12


class SingularParametrizationError(RateRegionError):
    """The x-coordinate of a parametric curve is stationary; dy/dx is undefined."""


@dataclass(frozen=True)
class DerivativeBundle:
    d1: ArrayLike
    d2: ArrayLike


def lf_derivatives(lf: LinearFractional, eta: ArrayLike) -> DerivativeBundle:
    """First and second derivative of ``log2(lf(eta))`` with respect to ``eta``."""
    num = lf.numerator(eta)
    den = lf.denominator(eta)
    if np.any(np.asarray(den) <= 0.0) or np.any(np.asarray(num) <= 0.0):
        raise DomainError("linear-fractional map is not positive on the requested points")
    a = lf.p / num
    b = lf.r / den
    return DerivativeBundle(ZETA * (a - b), ZETA * (b * b - a * a))


def parametric_second_derivative(f1: ArrayLike, f2: ArrayLike, g1: ArrayLike, g2: ArrayLike) -> ArrayLike:
    """``d^2 y / d x^2`` of the curve ``(x, y) = (g(u), f(u))``.

    ``f1, f2`` and ``g1, g2`` are the first and second derivatives of ``f`` and
    ``g`` with respect to ``u``.
    """
    g1 = np.asarray(g1, dtype=float)
    if np.any(g1 == 0.0):
        raise SingularParametrizationError("g'(u) = 0: the curve has a vertical tangent")
    out = (np.asarray(f2) * g1 - np.asarray(f1) * np.asarray(g2)) / g1 ** 3
    return float(out) if out.ndim == 0 else out


@dataclass
class SegmentDiagnostics:
    segment: str
    parameter: str
    # Max over the grid of d^2 R1 / d R2^2; None for a straight segment.
    worst: Optional[float]
    location: Optional[float]
    straight: bool = False


@dataclass
class ConvexityVerdict:
    convex: bool
    method: str
    direction: str
    worst_second_derivative: Optional[float] = None
    worst_location: Optional[float] = None
    worst_segment: Optional[str] = None
    kink_margin: Optional[float] = None
    marginal: bool = False
    degenerate: bool = False
    segments: List[SegmentDiagnostics] = field(default_factory=list)
    # Chord oracle only: largest amount by which a chord midpoint exceeds the boundary.
    max_excess: Optional[float] = None
    oracle_agrees: Optional[bool] = None

    def as_dict(self) -> dict:
        return asdict(self)


def _segment_curvature(model: GeneralRateModel, sel1, sel2, eta: np.ndarray):
    """Return ``(values, straight)`` for d^2 R1 / d R2^2 along one segment."""
    lf1 = as_linear_fractional(model, sel1)
    lf2 = as_linear_fractional(model, sel2)
    if lf1.constant or lf2.constant:
        # Horizontal or vertical line in the rate plane: contributes no curvature.
        return None, True
    f = lf_derivatives(lf1, eta)
    g = lf_derivatives(lf2, eta)
    return parametric_second_derivative(f.d1, f.d2, g.d1, g.d2), False


def _segment_diagnostics(model: GeneralRateModel, grid_n: int) -> List[SegmentDiagnostics]:
    if int(grid_n) != grid_n or grid_n < 2:
        raise DomainError(f"grid_n must be an integer >= 2, got {grid_n!r}")
    eta = np.linspace(0.0, 1.0, int(grid_n))
    out = []
    for name, param, sel1, sel2 in SEGMENTS[model.direction]:
        values, straight = _segment_curvature(model, sel1, sel2, eta)
        if straight:
            out.append(SegmentDiagnostics(name, param, None, None, True))
            continue
        i = int(np.argmax(values))
        out.append(SegmentDiagnostics(name, param, float(values[i]), float(eta[i])))
    return out


def _degenerate_verdict(model: GeneralRateModel) -> ConvexityVerdict:
    # One user can never transmit: the region is an interval on one axis.
    return ConvexityVerdict(True, "analytic", model.direction.value, degenerate=True)


def _worst(segments: List[SegmentDiagnostics]):
    curved = [s for s in segments if not s.straight]
    if not curved:
        return None
    return max(curved, key=lambda s: s.worst)


def dl_convexity(model: GeneralRateModel, grid_n: int = DEFAULT_GRID, tol: float = TOL_CONVEX) -> ConvexityVerdict:
    """Downlink region is convex iff ``d^2 R1 / d R2^2 <= 0`` along the whole boundary."""
    if model.direction is not Direction.DL:
        raise SelectorError("dl_convexity needs a downlink model")
    if model.degenerate:
        return _degenerate_verdict(model)
    segments = _segment_diagnostics(model, grid_n)
    worst = _worst(segments)
    verdict = ConvexityVerdict(True, "analytic", "dl", segments=segments)
    if worst is not None:
        verdict.worst_second_derivative = worst.worst
        verdict.worst_location = worst.location
        verdict.worst_segment = worst.segment
        verdict.convex = worst.worst <= tol
        verdict.marginal = abs(worst.worst) <= MARGINAL_FACTOR * tol
    return verdict


def _junction_slopes(model: GeneralRateModel):
    lfs = {sel: as_linear_fractional(model, sel) for _, _, s1, s2 in SEGMENTS[Direction.UL] for sel in (s1, s2)}
    slopes = []
    for _, _, sel1, sel2 in SEGMENTS[Direction.UL]:
        d1 = lf_derivatives(lfs[sel1], 1.0).d1
        d2 = lf_derivatives(lfs[sel2], 1.0).d1
        if d2 == 0.0:
            raise SingularParametrizationError(
                f"dR2/d{sel2.value} vanishes at the corner: the segment is vertical there"
            )
        slopes.append(d1 / d2)
    return slopes


def kink_condition(model: GeneralRateModel) -> float:
    """Slope ``dR1/dR2`` just left of the uplink corner minus the slope just right of it.

    Segment ``bd1`` (``eta_1 = 1``) covers small ``R2`` and ``bd2`` covers large
    ``R2``, so a concave boundary needs the left slope to be no smaller than
    the right one: the corner is convex iff the margin is ``>= 0``.
    """
    if model.direction is not Direction.UL:
        raise SelectorError("kink_condition needs an uplink model")
    left, right = _junction_slopes(model)
    return float(left - right)


def ul_convexity(model: GeneralRateModel, grid_n: int = DEFAULT_GRID, tol: float = TOL_CONVEX) -> ConvexityVerdict:
    """Uplink region is convex iff both segments are concave and the corner slopes are ordered."""
    if model.direction is not Direction.UL:
        raise SelectorError("ul_convexity needs an uplink model")
    if model.degenerate:
        return _degenerate_verdict(model)
    segments = _segment_diagnostics(model, grid_n)
    try:
        margin = kink_condition(model)
    except SingularParametrizationError:
        # bd2 is vertical (mu21 = 0): the right slope is -inf and the corner is convex.
        margin = math.inf
    worst = _worst(segments)
    verdict = ConvexityVerdict(True, "analytic", "ul", kink_margin=margin, segments=segments)
    curvature_ok = True
    if worst is not None:
        verdict.worst_second_derivative = worst.worst
        verdict.worst_location = worst.location
        verdict.worst_segment = worst.segment
        curvature_ok = worst.worst <= tol
        verdict.marginal = abs(worst.worst) <= MARGINAL_FACTOR * tol
    verdict.marginal = verdict.marginal or abs(margin) <= MARGINAL_FACTOR * tol
    verdict.convex = curvature_ok and margin >= -tol
    return verdict


def check_convexity(model: GeneralRateModel, grid_n: int = DEFAULT_GRID, tol: float = TOL_CONVEX) -> ConvexityVerdict:
    if model.direction is Direction.DL:
        return dl_convexity(model, grid_n, tol)
    return ul_convexity(model, grid_n, tol)


def _sinr_from_rate(rate: np.ndarray) -> np.ndarray:
    return np.expm1(rate * LN2)


def _boundary_r1_at(model: GeneralRateModel, r2: np.ndarray, r2_corner: float) -> np.ndarray:
    """Boundary R1 at given R2 values, by inverting the R2 rate equation in closed form."""
    a1, a2 = model.alpha1, model.alpha2
    m11, m12, m21, m22 = model.mu11, model.mu12, model.mu21, model.mu22
    c = _sinr_from_rate(r2)
    if model.direction is Direction.DL:
        eta1 = np.clip((a2 - c * (m22 + 1.0)) / (a2 + c * (m21 - m22)), 0.0, 1.0)
        eta2 = 1.0 - eta1
    else:
        on_first = r2 <= r2_corner
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = c * (m21 + 1.0) / (a2 - c * m22)
            t2 = (a2 / c - m22 - 1.0) / m21 if m21 > 0.0 else np.ones_like(c)
        eta1 = np.where(on_first, 1.0, np.clip(np.nan_to_num(t2, nan=1.0), 0.0, 1.0))
        eta2 = np.where(on_first, np.clip(np.nan_to_num(t1, nan=0.0), 0.0, 1.0), 1.0)
    sinr1 = a1 * eta1 / (m11 * eta1 + m12 * eta2 + 1.0)
    return np.log1p(sinr1) / LN2


def chord_oracle(
    model: GeneralRateModel, resolution: int = DEFAULT_RESOLUTION, tol: float = TOL_ORACLE
) -> ConvexityVerdict:
    """Definition-based convexity check.

    Samples ``resolution`` points per boundary segment and, for every pair of
    samples, tests whether the chord midpoint lies on or below the boundary
    (boundary ``R1`` at the midpoint's ``R2``, found by exact inversion of the
    ``R2`` rate equation). The region is declared convex iff no midpoint
    exceeds the boundary by more than ``tol`` bits/s/Hz.
    """
    if int(resolution) != resolution or resolution < 16:
        raise DomainError(f"resolution must be an integer >= 16, got {resolution!r}")
    direction = model.direction.value
    if model.degenerate:
        return ConvexityVerdict(True, "oracle", direction, degenerate=True, max_excess=0.0)
    boundary = sample_boundary(model, int(resolution))
    r1 = np.concatenate([s.r1 for s in boundary.segments])
    r2 = np.concatenate([s.r2 for s in boundary.segments])
    r2_corner = float(boundary.segments[0].r2[-1])
    iu, ju = np.triu_indices(len(r1), k=1)
    mid_r1 = 0.5 * (r1[iu] + r1[ju])
    mid_r2 = 0.5 * (r2[iu] + r2[ju])
    excess = mid_r1 - _boundary_r1_at(model, mid_r2, r2_corner)
    max_excess = float(np.max(excess))
    return ConvexityVerdict(max_excess <= tol, "oracle", direction, max_excess=max_excess)


def cross_check(
    model: GeneralRateModel,
    grid_n: int = DEFAULT_GRID,
    resolution: int = DEFAULT_RESOLUTION,
    tol: float = TOL_CONVEX,
) -> ConvexityVerdict:
    """Analytic verdict with the chord oracle's agreement recorded on it."""
    verdict = check_convexity(model, grid_n, tol)
    oracle = chord_oracle(model, resolution)
    verdict.max_excess = oracle.max_excess
    verdict.oracle_agrees = oracle.convex == verdict.convex
    return verdict

