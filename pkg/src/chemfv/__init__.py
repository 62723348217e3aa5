"""2D finite-volume simulator for logistic chemotaxis with weak singular
sensitivity (taxis coefficient chi / v**k, 0 < k < 1), with runtime
monitoring of the solution functionals that govern boundedness."""

from . import backends
from .core import (
    Grid,
    InitialData,
    ModelParameters,
    ScalarField,
    SimState,
    integrate,
    validate_initial_data,
    validate_parameters,
)
from .stepping import RunSummary, StepControl, StepOutcome, StepStatus, run, step

__version__ = "0.1.0"

__all__ = [
    "Grid", "InitialData", "ModelParameters", "ScalarField", "SimState",
    "integrate", "validate_initial_data", "validate_parameters",
    "RunSummary", "StepControl", "StepOutcome", "StepStatus", "run", "step",
    "backends", "__version__",
]
