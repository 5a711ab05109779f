"""Null-space beamforming for SWIPT downlinks with a nonlinear energy harvester."""

__version__ = "0.1.0"
