"""Exact computation of motivic Serre invariants of snc models and their lift mod (L-1)^2."""

__version__ = "0.1.0"

from .blowup import Center, InadmissibleCenter, blow_up, exceptional_multiplicity, fiber_stratum_class
from .invariant import euler_part, serre, serre_tilde, specialize
from .model import ConstructibleDatum, SncModel, datum_disjoint_union, full_fiber_datum, validate
from .ring import FormalClass, LPoly, TruncatedClass, TruncatedFormalClass, formal_truncate, truncate

__all__ = [
    "Center", "ConstructibleDatum", "FormalClass", "InadmissibleCenter", "LPoly", "SncModel",
    "TruncatedClass", "TruncatedFormalClass", "blow_up", "datum_disjoint_union", "euler_part",
    "exceptional_multiplicity", "fiber_stratum_class", "formal_truncate", "full_fiber_datum",
    "serre", "serre_tilde", "specialize", "truncate", "validate",
]
