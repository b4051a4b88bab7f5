"""Numerical laboratory for curve shortening flow of closed curves in R^n."""

from .curves import (
    CircleFit,
    Curve,
    curvature_vector,
    fit_circle,
    project_xy,
    resample_equal_arclength,
    smooth_length,
    total_turning,
    turning_angle,
)
from .flow import (
    RescaledState,
    Trajectory,
    TypeIReport,
    estimate_extinction,
    evolve,
    graphical_rescaled_step,
    rescale,
    rescale_at_tau,
    shrinker_energy,
    step_csf,
    type_I_report,
)
from .projection import (
    BranchSplit,
    MinPointTrack,
    ProjectionReport,
    branch_split,
    linear_scale,
    min_point_track,
    projection_report,
)

__all__ = [
    "BranchSplit", "CircleFit", "Curve", "MinPointTrack", "ProjectionReport",
    "RescaledState", "Trajectory", "TypeIReport", "branch_split",
    "curvature_vector", "estimate_extinction", "evolve", "fit_circle",
    "graphical_rescaled_step", "linear_scale", "min_point_track", "project_xy",
    "projection_report", "rescale", "rescale_at_tau", "resample_equal_arclength",
    "shrinker_energy", "smooth_length", "step_csf", "total_turning",
    "turning_angle", "type_I_report",
]

__version__ = "0.1.0"
