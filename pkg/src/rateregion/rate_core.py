"""General two-user rate model and its Pareto-boundary parametrizations.

Both users' rates share the form

    R_k = log2(1 + alpha_k * eta_k / (mu_k1 * eta_1 + mu_k2 * eta_2 + 1))

with the noise power normalized to one. The downlink budget is joint
(``eta_1 + eta_2 <= 1``) so its Pareto boundary is the single line
``eta_2 = 1 - eta_1``; the uplink budget is per user so its boundary is made
of two segments, ``eta_1 = 1`` (``bd1``) and ``eta_2 = 1`` (``bd2``), meeting
at the corner ``eta_1 = eta_2 = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Tuple, Union

import numpy as np

ArrayLike = Union[float, np.ndarray]

LN2 = math.log(2.0)
DEFAULT_SAMPLES = 201


class RateRegionError(ValueError):
    """Base class for invalid inputs to the rate-region routines."""


class ConstraintViolation(RateRegionError):
    """A power allocation violates the power constraint of its link direction."""


class DomainError(RateRegionError):
    """A parameter lies outside the domain of the requested function."""


class SelectorError(RateRegionError):
    """A boundary-rate selector does not match the model's direction."""


class Direction(str, Enum):
    DL = "dl"
    UL = "ul"

    @classmethod
    def parse(cls, value: Union[str, "Direction"]) -> "Direction":
        if isinstance(value, Direction):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise RateRegionError(f"direction must be 'dl' or 'ul', got {value!r}") from None


class BoundaryRate(str, Enum):
    """The six boundary rate functions, each a function of one power coefficient."""

    DL_R1 = "dl_r1"
    DL_R2 = "dl_r2"
    UL1_R1 = "ul1_r1"
    UL1_R2 = "ul1_r2"
    UL2_R1 = "ul2_r1"
    UL2_R2 = "ul2_r2"

    @property
    def direction(self) -> Direction:
        return Direction.DL if self.value.startswith("dl") else Direction.UL


COEFFICIENTS = ("alpha1", "alpha2", "mu11", "mu12", "mu21", "mu22")


@dataclass(frozen=True)
class GeneralRateModel:
    """Six nonnegative rate coefficients plus the link direction.

    ``alpha_k`` is the effective channel gain of user ``k``; ``mu_kj`` scales
    the interference that user ``j``'s power causes at user ``k`` (``mu_kk``
    is self-interference from imperfect CSI).
    """

    alpha1: float
    alpha2: float
    mu11: float
    mu12: float
    mu21: float
    mu22: float
    direction: Direction = Direction.DL

    def __post_init__(self):
        for name in COEFFICIENTS:
            value = getattr(self, name)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise RateRegionError(f"{name} must be a real number, got {value!r}") from None
            if not math.isfinite(value) or value < 0.0:
                raise RateRegionError(f"{name} must be finite and >= 0, got {value!r}")
            object.__setattr__(self, name, value)
        object.__setattr__(self, "direction", Direction.parse(self.direction))

    @property
    def degenerate(self) -> bool:
        """True when one user has zero gain and the region collapses onto an axis."""
        return self.alpha1 == 0.0 or self.alpha2 == 0.0

    def swapped(self) -> "GeneralRateModel":
        """The same physical system with the user labels exchanged."""
        return GeneralRateModel(
            self.alpha2, self.alpha1, self.mu22, self.mu21, self.mu12, self.mu11, self.direction
        )

    def with_direction(self, direction: Union[str, Direction]) -> "GeneralRateModel":
        return GeneralRateModel(
            self.alpha1, self.alpha2, self.mu11, self.mu12, self.mu21, self.mu22, direction
        )

    def as_dict(self) -> dict:
        d = {name: getattr(self, name) for name in COEFFICIENTS}
        d["direction"] = self.direction.value
        return d


@dataclass(frozen=True)
class PowerAllocation:
    eta1: float
    eta2: float

    def validate(self, direction: Union[str, Direction]) -> None:
        """Raise :class:`ConstraintViolation` naming the first violated constraint."""
        for name in ("eta1", "eta2"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ConstraintViolation(f"{name} = {value!r} violates 0 <= {name} <= 1")
        if Direction.parse(direction) is Direction.DL and self.eta1 + self.eta2 > 1.0 + 1e-12:
            raise ConstraintViolation(
                f"eta1 + eta2 = {self.eta1 + self.eta2!r} violates the downlink budget eta1 + eta2 <= 1"
            )


def _log2_1p(x: ArrayLike) -> ArrayLike:
    return np.log1p(x) / LN2


def _rates(model: GeneralRateModel, eta1: ArrayLike, eta2: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    # No validation: callers guarantee feasibility. Works elementwise on arrays.
    sinr1 = model.alpha1 * eta1 / (model.mu11 * eta1 + model.mu12 * eta2 + 1.0)
    sinr2 = model.alpha2 * eta2 / (model.mu21 * eta1 + model.mu22 * eta2 + 1.0)
    return _log2_1p(sinr1), _log2_1p(sinr2)


def rate_pair(model: GeneralRateModel, alloc: PowerAllocation) -> Tuple[float, float]:
    """Rates ``(R1, R2)`` in bits/s/Hz for a feasible power allocation."""
    alloc.validate(model.direction)
    r1, r2 = _rates(model, alloc.eta1, alloc.eta2)
    return float(r1), float(r2)


def _check_unit(name: str, value: ArrayLike) -> None:
    arr = np.asarray(value, dtype=float)
    if not np.all((arr >= 0.0) & (arr <= 1.0)):
        raise DomainError(f"{name} must lie in [0, 1], got {value!r}")


def _require(model: GeneralRateModel, direction: Direction) -> None:
    if model.direction is not direction:
        raise SelectorError(
            f"operation needs a {direction.value} model, got {model.direction.value}"
        )


def dl_boundary(model: GeneralRateModel, eta1: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """Downlink boundary point at ``eta_1``, with ``eta_2 = 1 - eta_1``.

    Accepts scalars or arrays.
    """
    _require(model, Direction.DL)
    _check_unit("eta1", eta1)
    eta1 = np.asarray(eta1, dtype=float)
    r1, r2 = _rates(model, eta1, 1.0 - eta1)
    if r1.ndim == 0:
        return float(r1), float(r2)
    return r1, r2


def ul_boundary_segment(
    model: GeneralRateModel, segment: int, t: ArrayLike
) -> Tuple[ArrayLike, ArrayLike]:
    """Uplink boundary point on segment 1 (``eta_1 = 1, eta_2 = t``) or 2 (``eta_2 = 1, eta_1 = t``)."""
    _require(model, Direction.UL)
    if segment not in (1, 2):
        raise DomainError(f"segment must be 1 or 2, got {segment!r}")
    _check_unit("t", t)
    t = np.asarray(t, dtype=float)
    ones = np.ones_like(t)
    if segment == 1:
        r1, r2 = _rates(model, ones, t)
    else:
        r1, r2 = _rates(model, t, ones)
    if r1.ndim == 0:
        return float(r1), float(r2)
    return r1, r2


@dataclass(frozen=True)
class LinearFractional:
    """The map ``eta -> (p*eta + q) / (r*eta + s)`` whose log2 is a boundary rate."""

    p: float
    q: float
    r: float
    s: float

    def numerator(self, eta: ArrayLike) -> ArrayLike:
        return self.p * eta + self.q

    def denominator(self, eta: ArrayLike) -> ArrayLike:
        return self.r * eta + self.s

    def __call__(self, eta: ArrayLike) -> ArrayLike:
        return self.numerator(eta) / self.denominator(eta)

    def rate(self, eta: ArrayLike) -> ArrayLike:
        """``log2`` of the map, evaluated as ``log1p`` of the excess over one."""
        excess = ((self.p - self.r) * eta + (self.q - self.s)) / self.denominator(eta)
        return _log2_1p(excess)

    @property
    def constant(self) -> bool:
        """True when the map does not depend on ``eta`` (a flat boundary rate)."""
        return self.p * self.s == self.q * self.r

    def check_domain(self) -> None:
        """Raise :class:`DomainError` unless the invariants hold on ``[0, 1]``.

        Both numerator and denominator are affine, so checking the endpoints suffices.
        """
        for eta in (0.0, 1.0):
            den = self.denominator(eta)
            if den <= 0.0:
                raise DomainError(f"denominator {den!r} <= 0 at eta={eta}")
            if self.numerator(eta) < den * (1.0 - 1e-12):
                raise DomainError(f"map drops below 1 at eta={eta}: rate would be negative")


def as_linear_fractional(model: GeneralRateModel, which: Union[str, BoundaryRate]) -> LinearFractional:
    """Canonical ``(p, q, r, s)`` form of one of the six boundary rate functions."""
    which = BoundaryRate(which)
    if which.direction is not model.direction:
        raise SelectorError(
            f"selector {which.value} needs a {which.direction.value} model, "
            f"got {model.direction.value}"
        )
    a1, a2 = model.alpha1, model.alpha2
    m11, m12, m21, m22 = model.mu11, model.mu12, model.mu21, model.mu22
    if which is BoundaryRate.DL_R1:
        return LinearFractional(a1 + m11 - m12, m12 + 1.0, m11 - m12, m12 + 1.0)
    if which is BoundaryRate.DL_R2:
        return LinearFractional(m21 - m22 - a2, m22 + 1.0 + a2, m21 - m22, m22 + 1.0)
    if which is BoundaryRate.UL1_R1:
        return LinearFractional(m12, m11 + 1.0 + a1, m12, m11 + 1.0)
    if which is BoundaryRate.UL1_R2:
        return LinearFractional(a2 + m22, m21 + 1.0, m22, m21 + 1.0)
    if which is BoundaryRate.UL2_R1:
        return LinearFractional(a1 + m11, m12 + 1.0, m11, m12 + 1.0)
    return LinearFractional(m21, m22 + 1.0 + a2, m21, m22 + 1.0)


# (segment id, parameter name, R1 selector, R2 selector) per direction
SEGMENTS = {
    Direction.DL: (("bd", "eta1", BoundaryRate.DL_R1, BoundaryRate.DL_R2),),
    Direction.UL: (
        ("bd1", "eta2", BoundaryRate.UL1_R1, BoundaryRate.UL1_R2),
        ("bd2", "eta1", BoundaryRate.UL2_R1, BoundaryRate.UL2_R2),
    ),
}


@dataclass
class BoundarySegment:
    segment: str
    parameter: str
    eta: np.ndarray
    r1: np.ndarray
    r2: np.ndarray

    def __len__(self):
        return len(self.eta)


@dataclass
class ParetoBoundary:
    direction: Direction
    segments: List[BoundarySegment] = field(default_factory=list)

    def __len__(self):
        return sum(len(s) for s in self.segments)

    def rows(self):
        """Yield ``(segment, eta, R1, R2)`` in segment order."""
        for seg in self.segments:
            for eta, r1, r2 in zip(seg.eta, seg.r1, seg.r2):
                yield seg.segment, float(eta), float(r1), float(r2)


def sample_boundary(model: GeneralRateModel, n: int = DEFAULT_SAMPLES) -> ParetoBoundary:
    """Sample each boundary segment at ``n`` uniformly spaced power coefficients.

    The uplink corner ``eta_1 = eta_2 = 1`` appears once in each segment.
    """
    if int(n) != n or n < 2:
        raise DomainError(f"n must be an integer >= 2, got {n!r}")
    eta = np.linspace(0.0, 1.0, int(n))
    boundary = ParetoBoundary(model.direction)
    if model.direction is Direction.DL:
        r1, r2 = dl_boundary(model, eta)
        boundary.segments.append(BoundarySegment("bd", "eta1", eta, r1, r2))
    else:
        for k, (name, param, _, _) in enumerate(SEGMENTS[Direction.UL], start=1):
            r1, r2 = ul_boundary_segment(model, k, eta)
            boundary.segments.append(BoundarySegment(name, param, eta.copy(), r1, r2))
    return boundary
