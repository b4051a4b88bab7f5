"""Batch figure rendering for curve-flow trajectory directories."""

from .render import PlotSpec, TrajectoryData, load_spec, load_trajectory, render

__all__ = ["PlotSpec", "TrajectoryData", "load_spec", "load_trajectory", "render"]

__version__ = "0.1.0"
