"""Independent reference solvers used to cross-check the bosonized model."""

from .dicke import DickeLiouvillian, ResourceGuardExceeded, SpinSpace, dicke_evolve
from .moments import MomentClosureError, MomentState, moment_evolve, moment_rhs

__all__ = [
    "DickeLiouvillian",
    "MomentClosureError",
    "MomentState",
    "ResourceGuardExceeded",
    "SpinSpace",
    "dicke_evolve",
    "moment_evolve",
    "moment_rhs",
]
