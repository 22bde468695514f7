"""Spin winding in the Jaynes-Cummings model with Stark coupling."""
from .errors import (BoundaryAbsent, BracketError, CapacityError, InconsistencyError,
                     JCStarkError, ModelDomainError, NumericalError, ParameterError,
                     RefinementError)
from .model import ModelParams, EigenState, eigenstate, ground_state, spectrum

__version__ = "0.1.0"

__all__ = [
    "BoundaryAbsent", "BracketError", "CapacityError", "InconsistencyError", "JCStarkError",
    "ModelDomainError", "NumericalError", "ParameterError", "RefinementError",
    "ModelParams", "EigenState", "eigenstate", "ground_state", "spectrum",
]
