"""Spin-field fronts driven by mean curvature: control maps, profiles and solvers."""

__version__ = "0.1.0"
