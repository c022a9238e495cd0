"""Reset-model Lindbladians: steady states, entropy production, perturbative
expansions, and scenario sweeps."""

from . import affine, entropy, matops, models, qrm, tripartite
from .errors import (
    AssumptionError,
    ConfigError,
    ContractError,
    DegeneracyError,
    DimensionError,
    PositivityError,
    QrmlabError,
    VerificationError,
)

__version__ = "0.1.0"

__all__ = [
    "affine",
    "entropy",
    "matops",
    "models",
    "qrm",
    "tripartite",
    "AssumptionError",
    "ConfigError",
    "ContractError",
    "DegeneracyError",
    "DimensionError",
    "PositivityError",
    "QrmlabError",
    "VerificationError",
    "__version__",
]
