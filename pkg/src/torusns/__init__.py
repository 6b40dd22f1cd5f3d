"""torusns: a pseudo-spectral laboratory for variable-density incompressible
flow on the periodic torus, with the critical-regularity norm machinery
(dyadic Besov norms, Lorentz time norms, Stokes maximal regularity checks,
time-weighted decay ladders, and twin-run stability functionals)."""

__version__ = "0.1.0"

from .grid import PeriodicGrid, ScalarField, VectorField
from .operators import (divergence, gradient, heat_semigroup_step,
                        helmholtz_decompose, laplacian, leray_project)
from .dyadic import (BesovNormSpec, besov_norm, besov_norm_report,
                     bony_decompose, log_product_h_minus_one, lp_block,
                     lp_lowpass, sobolev_norm)
from .lorentz import (TimeTrace, decreasing_rearrangement, lorentz_norm,
                      mixed_time_norm)
from .solver import (MaterialDiagnostics, NonContractionError, SolverState,
                     StepParams, advance_step, material_derivatives,
                     run_simulation)
from .advection import CFLError, advect_density

__all__ = [
    "PeriodicGrid", "ScalarField", "VectorField",
    "gradient", "divergence", "laplacian", "helmholtz_decompose",
    "leray_project", "heat_semigroup_step",
    "BesovNormSpec", "besov_norm", "besov_norm_report", "lp_block",
    "lp_lowpass", "sobolev_norm", "bony_decompose", "log_product_h_minus_one",
    "TimeTrace", "decreasing_rearrangement", "lorentz_norm", "mixed_time_norm",
    "SolverState", "StepParams", "advance_step", "run_simulation",
    "material_derivatives", "MaterialDiagnostics", "NonContractionError",
    "CFLError", "advect_density",
]
