"""Measurable pass/fail experiments built on the solver and norm machinery."""

from .inequalities import inequality_suite
from .ladders import (compute_2d_ladder, ladder_hooks_2d, run_2d_ladder,
                      run_3d_phi, smallness_sweep_3d)
from .scaling import verify_scaling_invariance
from .stability import osgood_mode, stability_experiment

__all__ = [
    "inequality_suite",
    "compute_2d_ladder", "ladder_hooks_2d", "run_2d_ladder",
    "run_3d_phi", "smallness_sweep_3d",
    "verify_scaling_invariance",
    "stability_experiment", "osgood_mode",
]
