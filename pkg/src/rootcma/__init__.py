"""Blind multi-user separation on a uniform linear array.

Constant-modulus adaptive filtering, DSFT analysis of array responses,
root-polynomial DOA and model-order estimation, and the LMS preconditioner
that initialises a CMA array on one user.
"""

__version__ = "0.1.0"

from .array_model import (  # noqa: E402
    ArrayGeometry,
    Scenario,
    SignalMatrix,
    SnapshotMatrix,
    SourceConfig,
    generate_cm_signals,
    spatial_frequency,
    steering_matrix,
    steering_vector,
    synthesize,
)
from .errors import RootCmaError  # noqa: E402

__all__ = [
    "ArrayGeometry",
    "RootCmaError",
    "Scenario",
    "SignalMatrix",
    "SnapshotMatrix",
    "SourceConfig",
    "generate_cm_signals",
    "spatial_frequency",
    "steering_matrix",
    "steering_vector",
    "synthesize",
]
