"""HTTP sidecar serving per-token log-probabilities from a causal checkpoint."""

from .model import CausalScorer, CheckpointError, OverLengthError
from .service import ServiceConfig, make_server

__version__ = "0.1.0"

__all__ = ["CausalScorer", "CheckpointError", "OverLengthError",
           "ServiceConfig", "make_server", "__version__"]
