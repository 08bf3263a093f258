"""Achievable rate regions of two-user Massive MIMO systems and when they are convex."""

__version__ = "0.1.0"

from .channels import (
    LoSScenario,
    RayleighScenario,
    dl_threshold,
    los_gain,
    los_model,
    rayleigh_model,
    ul_threshold,
)
from .convexity import (
    ConvexityVerdict,
    check_convexity,
    chord_oracle,
    dl_convexity,
    kink_condition,
    ul_convexity,
)
from .rate_core import (
    BoundaryRate,
    Direction,
    GeneralRateModel,
    LinearFractional,
    PowerAllocation,
    as_linear_fractional,
    dl_boundary,
    rate_pair,
    sample_boundary,
    ul_boundary_segment,
)
