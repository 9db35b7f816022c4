"""Legged locomotion environments with gait-shaped rewards.

Public entry points re-exported here form the stable surface; module
internals may move between releases.
"""

from .errors import (
    DimensionMismatch,
    GaitforgeError,
    InvalidInput,
    NotReset,
    NumericalBlowup,
    ProtocolError,
    SchemaMismatch,
    UnknownMorphology,
    ValidationError,
)
from .model import (
    BUILTIN_NAMES,
    BodyDef,
    CpgParams,
    MorphologySpec,
    RewardWeights,
    load_config,
    load_morphology,
    save_config,
    spec_hash,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_NAMES",
    "BodyDef",
    "CpgParams",
    "DimensionMismatch",
    "GaitforgeError",
    "InvalidInput",
    "MorphologySpec",
    "NotReset",
    "NumericalBlowup",
    "ProtocolError",
    "RewardWeights",
    "SchemaMismatch",
    "UnknownMorphology",
    "ValidationError",
    "__version__",
    "load_config",
    "load_morphology",
    "save_config",
    "spec_hash",
    "validate",
]
