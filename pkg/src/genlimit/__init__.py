"""Simulation lab for language generation in the limit over an exact cofinite set algebra."""

from .collection import CollectionName, TellTaleKind, builtin
from .core_sets import FMS, FiniteSet, fms, fms_relate
from .generators import GeneratorKind, make_generator
from .sim import DuelConfig, run_duel

__all__ = [
    "CollectionName",
    "DuelConfig",
    "FMS",
    "FiniteSet",
    "GeneratorKind",
    "TellTaleKind",
    "builtin",
    "fms",
    "fms_relate",
    "make_generator",
    "run_duel",
]
__version__ = "0.1.0"
