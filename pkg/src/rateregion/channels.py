"""Physical channel scenarios compiled to :class:`GeneralRateModel` coefficients.

Two scenarios are supported, both with maximum-ratio (MR) processing at an
``M``-antenna base station: ergodic i.i.d. Rayleigh fading with imperfect CSI
and deterministic line-of-sight (LoS) to a uniform linear array. For LoS with
equal user gains the convexity conditions reduce to closed-form thresholds
on the array gain ``g(theta_1, theta_2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .rate_core import ArrayLike, Direction, DomainError, GeneralRateModel, RateRegionError

# |sin(theta_k) - sin(theta_j)| below this is treated as coincident users (g = M);
# below SERIES_BAND the gain is evaluated from its Taylor expansion.
EQUAL_SINE_TOL = 1e-12
SERIES_BAND = 1e-8


class ScenarioError(RateRegionError):
    """Scenario parameters violate their invariants."""


def _positive(name, value, strict=True):
    value = float(value)
    if not math.isfinite(value) or value < 0.0 or (strict and value == 0.0):
        bound = "> 0" if strict else ">= 0"
        raise ScenarioError(f"{name} must be finite and {bound}, got {value!r}")
    return value


def _antennas(M):
    if isinstance(M, bool) or int(M) != M or M < 1:
        raise ScenarioError(f"M must be a positive integer, got {M!r}")
    return int(M)


@dataclass(frozen=True)
class RayleighScenario:
    """i.i.d. Rayleigh fading, MR precoding (DL) or combining (UL).

    ``rho`` is the total DL power or the per-user UL power, normalized by the
    noise power. ``gamma_k`` is the mean square of user ``k``'s channel
    estimate and cannot exceed the channel gain ``beta_k``.
    """

    M: int
    rho: float
    beta1: float
    beta2: float
    gamma1: float
    gamma2: float
    direction: Direction = Direction.DL

    def __post_init__(self):
        object.__setattr__(self, "M", _antennas(self.M))
        object.__setattr__(self, "rho", _positive("rho", self.rho, strict=False))
        for k in (1, 2):
            beta = _positive(f"beta{k}", getattr(self, f"beta{k}"))
            gamma = _positive(f"gamma{k}", getattr(self, f"gamma{k}"))
            if gamma > beta:
                raise ScenarioError(f"gamma{k} = {gamma} exceeds beta{k} = {beta}")
            object.__setattr__(self, f"beta{k}", beta)
            object.__setattr__(self, f"gamma{k}", gamma)
        object.__setattr__(self, "direction", Direction.parse(self.direction))


@dataclass(frozen=True)
class LoSScenario:
    """Line-of-sight to a uniform linear array with spacing ``dH`` wavelengths.

    Angles are in radians.
    """

    M: int
    dH: float
    rho: float
    beta1: float
    beta2: float
    theta1: float
    theta2: float
    direction: Direction = Direction.DL

    def __post_init__(self):
        object.__setattr__(self, "M", _antennas(self.M))
        dH = _positive("dH", self.dH)
        if dH > 0.5:
            raise ScenarioError(f"dH must satisfy 0 < dH <= 1/2, got {dH!r}")
        object.__setattr__(self, "dH", dH)
        object.__setattr__(self, "rho", _positive("rho", self.rho, strict=False))
        object.__setattr__(self, "beta1", _positive("beta1", self.beta1))
        object.__setattr__(self, "beta2", _positive("beta2", self.beta2))
        for name in ("theta1", "theta2"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ScenarioError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        object.__setattr__(self, "direction", Direction.parse(self.direction))

    @classmethod
    def equal_gain(cls, M, snr, theta1, theta2, direction=Direction.DL, dH=0.5) -> "LoSScenario":
        """Both users with ``rho * beta = snr`` (``beta_1 = beta_2 = 1``)."""
        return cls(M, dH, snr, 1.0, 1.0, theta1, theta2, direction)

    @property
    def gain(self) -> float:
        return float(los_gain(self.theta1, self.theta2, self.M, self.dH))


def rayleigh_model(s: RayleighScenario) -> GeneralRateModel:
    a1 = s.M * s.rho * s.gamma1
    a2 = s.M * s.rho * s.gamma2
    b1 = s.rho * s.beta1
    b2 = s.rho * s.beta2
    if s.direction is Direction.DL:
        # Each user's interference comes from the total transmitted power through its own gain.
        return GeneralRateModel(a1, a2, b1, b1, b2, b2, Direction.DL)
    # UL: each user's power leaks into both receivers through its own gain.
    return GeneralRateModel(a1, a2, b1, b2, b1, b2, Direction.UL)


def _sinc_ratio_series(x, M):
    # sin(M x) / (M sin x) for small x, to fourth order.
    mx2 = (M * x) ** 2
    x2 = x * x
    num = 1.0 - mx2 / 6.0 + mx2 * mx2 / 120.0
    inv_sinc = 1.0 + x2 / 6.0 + 7.0 * x2 * x2 / 360.0
    return num * inv_sinc


def los_gain(theta_k: ArrayLike, theta_j: ArrayLike, M: int, dH: float = 0.5) -> ArrayLike:
    """Dirichlet-kernel interference gain between two ULA steering vectors.

    ``sin^2(pi dH M D) / (M sin^2(pi dH D))`` with ``D = sin(theta_k) - sin(theta_j)``,
    extended continuously by ``M`` where the denominator vanishes. Vectorized
    over the angles.
    """
    M = _antennas(M)
    if not 0.0 < dH <= 0.5:
        raise DomainError(f"dH must satisfy 0 < dH <= 1/2, got {dH!r}")
    delta = np.sin(np.asarray(theta_k, dtype=float)) - np.sin(np.asarray(theta_j, dtype=float))
    u = dH * delta
    # sin^2 has period 1 in u; measure the distance to the nearest grating lobe.
    u_red = u - np.round(u)
    dist = np.abs(u_red) / dH
    x = math.pi * u_red
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = np.sin(M * x) ** 2 / (M * np.sin(x) ** 2)
    series = M * _sinc_ratio_series(x, M) ** 2
    g = np.where(dist < EQUAL_SINE_TOL, float(M), np.where(dist < SERIES_BAND, series, direct))
    g = np.clip(g, 0.0, float(M))
    return float(g) if g.ndim == 0 else g


def los_model(s: LoSScenario) -> GeneralRateModel:
    """Perfect CSI, so there is no self-interference (``mu11 = mu22 = 0``)."""
    g = s.gain
    a1 = s.M * s.rho * s.beta1
    a2 = s.M * s.rho * s.beta2
    if s.direction is Direction.DL:
        return GeneralRateModel(a1, a2, 0.0, g * s.rho * s.beta1, g * s.rho * s.beta2, 0.0, Direction.DL)
    return GeneralRateModel(a1, a2, 0.0, g * s.rho * s.beta2, g * s.rho * s.beta1, 0.0, Direction.UL)


def _snr(snr):
    snr = float(snr)
    if not math.isfinite(snr) or snr <= 0.0:
        raise DomainError(f"snr must be finite and > 0, got {snr!r}")
    return snr


def _m(M):
    try:
        return _antennas(M)
    except ScenarioError as exc:
        raise DomainError(str(exc)) from None


def dl_threshold(M: int, snr: float) -> float:
    """Largest array gain for which the equal-gain DL LoS region is convex.

    Written as ``M / (sqrt(M snr + 1) + 1)``, algebraically equal to
    ``(sqrt(M snr + 1) - 1) / snr`` but free of cancellation as ``snr -> 0``.
    """
    M, snr = _m(M), _snr(snr)
    return M / (math.sqrt(M * snr + 1.0) + 1.0)


def ul_threshold(M: int, snr: float) -> float:
    """UL counterpart of :func:`dl_threshold`: ``(sqrt(2 M snr + 1) - 1) / (2 snr)``."""
    M, snr = _m(M), _snr(snr)
    return M / (math.sqrt(2.0 * M * snr + 1.0) + 1.0)


def dl_special_case_condition(alpha1: float, mu12: float) -> bool:
    """Equal-gain DL LoS convexity: ``alpha1 >= mu12 (2 + mu12)``."""
    return alpha1 >= mu12 * (2.0 + mu12)


def ul_concavity_lhs(alpha1: ArrayLike, mu12: ArrayLike, eta2: ArrayLike) -> ArrayLike:
    """Left-hand side of the equal-gain UL concavity condition on segment ``bd1``.

    The segment is concave at ``eta2`` iff this is ``<= 0``; it increases in
    ``eta2`` on ``[0, 1]``, so ``eta2 = 1`` is the binding point.
    """
    return (
        -alpha1 ** 2
        + 2.0 * mu12 * (1.0 + mu12) * (1.0 + mu12 * eta2)
        + alpha1 * (-1.0 + mu12 + mu12 ** 2 * (1.0 + eta2 ** 2))
    )


def ul_special_case_condition(alpha1: float, mu12: float) -> bool:
    """Equal-gain UL LoS convexity: ``alpha1 >= 2 mu12 (1 + mu12)``."""
    return alpha1 >= 2.0 * mu12 * (1.0 + mu12)


def threshold(M: int, snr: float, direction: Union[str, Direction]) -> float:
    if Direction.parse(direction) is Direction.DL:
        return dl_threshold(M, snr)
    return ul_threshold(M, snr)
