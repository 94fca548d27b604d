"""
popcap - couplages populaires, Pareto-optimaux et parfaits dans les marchés
plusieurs-à-un, avec optimisation des capacités des maisons
"""

__version__ = "1.0.0"
__license__ = "MIT"

from .errors import (
    ContractViolation,
    InfeasibleError,
    InternalInconsistency,
    ParseError,
    PopcapError,
    TooLargeError,
    UnsupportedRegime,
    ValidationError,
)
from .model import CapacityChange, Instance, Matching, PopularityNotion

__all__ = [
    "CapacityChange",
    "ContractViolation",
    "InfeasibleError",
    "Instance",
    "InternalInconsistency",
    "Matching",
    "ParseError",
    "PopcapError",
    "PopularityNotion",
    "TooLargeError",
    "UnsupportedRegime",
    "ValidationError",
]
