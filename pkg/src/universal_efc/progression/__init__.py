"""Activity progression network: Assist Matrix, BiCM null and link validation."""
from .assist import AssistMatrix, assist_array, assist_matrix
from .bicm import BicmModel, bicm_fit, bicm_sample
from .validation import (
    DEFAULT_ENSEMBLE,
    DEFAULT_MAX_DELTA,
    DEFAULT_PERCENTILE,
    GLOBAL,
    MIN_ENSEMBLE,
    PER_LINK,
    ProgressionNetwork,
    progression_network,
    validate_delta,
)

__all__ = [
    "AssistMatrix", "assist_array", "assist_matrix",
    "BicmModel", "bicm_fit", "bicm_sample",
    "DEFAULT_ENSEMBLE", "DEFAULT_MAX_DELTA", "DEFAULT_PERCENTILE", "GLOBAL", "MIN_ENSEMBLE",
    "PER_LINK", "ProgressionNetwork", "progression_network", "validate_delta",
]
