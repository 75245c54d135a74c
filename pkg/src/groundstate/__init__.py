"""Ground states of coupled NLS systems with local and convolution nonlinearities."""

from .energy import EnergyBreakdown, energy, gradient, n_functional
from .grid import Grid, build_grid
from .minimizer import GroundStateResult, MinimizeOptions, minimize, multiplier_sign_check
from .model import (
    ModelSpec,
    Potential,
    RadialKernel,
    builtin_power_model,
    classify_criticality,
    cubic_nls_model,
    validate_hypotheses,
)

__version__ = "0.1.0"

__all__ = [
    "EnergyBreakdown",
    "GroundStateResult",
    "Grid",
    "MinimizeOptions",
    "ModelSpec",
    "Potential",
    "RadialKernel",
    "build_grid",
    "builtin_power_model",
    "classify_criticality",
    "cubic_nls_model",
    "energy",
    "gradient",
    "minimize",
    "multiplier_sign_check",
    "n_functional",
    "validate_hypotheses",
]
