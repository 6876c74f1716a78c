"""Open quantum dynamics of two laser-driven, cross-coupled atomic ensembles."""

from .fock import HPOrder, MixParams, ModeSpec
from .model import GeneratorParts, apply_rhs, build_generator, phase

__version__ = "0.1.0"

__all__ = [
    "HPOrder",
    "MixParams",
    "ModeSpec",
    "GeneratorParts",
    "apply_rhs",
    "build_generator",
    "phase",
]
