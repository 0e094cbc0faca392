"""The motivic Serre invariant and its lift modulo (L-1)^2.

``serre`` sums the classes of the multiplicity-one open strata modulo L-1.
``serre_tilde`` adds, for every pair of components with coprime
multiplicities, the class of their open intersection scaled by
``(1 - L) / (a_i a_j)``, modulo ``(L-1)^n``.  Only ``n = 2`` carries model
independence; larger ``n`` evaluates the same expression for experiments.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Mapping, Union

from .model import ConstructibleDatum, SncModel, check_datum, full_fiber_datum
from .ring import (ONE_MINUS_L, FormalClass, LPoly, TruncatedClass, TruncatedFormalClass,
                   format_rational, formal_truncate, truncate)

SymbolAssignment = Mapping[str, Union[LPoly, int, Fraction]]


class SpecializationError(ValueError):
    pass


def serre_formal(model: SncModel, datum: ConstructibleDatum | None = None) -> FormalClass:
    """Untruncated sum of ``[C ∩ D_i°]`` over components of multiplicity one."""
    if datum is None:
        datum = full_fiber_datum(model)
    check_datum(model, datum)
    total = FormalClass()
    for H, cls in datum.on_strata.items():
        if len(H) == 1 and model.components[next(iter(H))] == 1:
            total = total + cls
    return total


def serre_tilde_formal(model: SncModel, datum: ConstructibleDatum | None = None) -> FormalClass:
    """Untruncated representative of the refined invariant."""
    if datum is None:
        datum = full_fiber_datum(model)
    total = serre_formal(model, datum)
    for H, cls in datum.on_strata.items():
        if len(H) != 2:
            continue
        i, j = sorted(H)
        ai, aj = model.components[i], model.components[j]
        if gcd(ai, aj) == 1:
            total = total + cls * ONE_MINUS_L * Fraction(1, ai * aj)
    return total


def serre(model: SncModel, datum: ConstructibleDatum | None = None) -> TruncatedFormalClass:
    return formal_truncate(serre_formal(model, datum), 1)


def serre_tilde(model: SncModel, datum: ConstructibleDatum | None = None,
                n: int = 2) -> TruncatedFormalClass:
    return formal_truncate(serre_tilde_formal(model, datum), n)


def substitute(value: TruncatedFormalClass, assign: SymbolAssignment) -> TruncatedClass:
    """Replace every symbol by its assigned class and collapse to Q[L]/(L-1)^n."""
    n = value.n
    missing = sorted(value.symbols() - set(assign))
    if missing:
        raise SpecializationError(f"no value assigned to symbol(s) {', '.join(missing)}")
    images = {s: truncate(p if isinstance(p, LPoly) else LPoly([p]), n) for s, p in assign.items()}
    total = TruncatedClass(n)
    for mono, coeff in value.items():
        term = coeff
        for s in mono:
            term = term * images[s]
        total = total + term
    return total


def euler_part(value: TruncatedFormalClass, assign: SymbolAssignment) -> list[Fraction]:
    return list(substitute(value, assign).coeffs)


@dataclass(frozen=True)
class Specialization:
    modulus_power: int
    q: int
    value: Fraction
    residue: int | None  # class mod q-1, only when modulus_power == 1
    canonical: bool

    def describe(self) -> str:
        if self.residue is not None:
            return f"{self.residue} mod {self.q - 1}"
        return (f"{format_rational(self.value)} (exact value at L={self.q}; "
                f"no canonical residue mod (q-1)^{self.modulus_power})")


def specialize(value: TruncatedFormalClass, assign: SymbolAssignment, q: int) -> Specialization:
    """Evaluate at ``L = q`` after substituting symbols.

    At modulus power 1 this is Serre's invariant in Z/(q-1); every denominator
    must then be invertible mod q-1.  At higher powers only the exact rational
    value of the canonical lift is returned.
    """
    if isinstance(q, bool) or not isinstance(q, int) or q < 2:
        raise SpecializationError(f"q must be an integer >= 2, got {q!r}")
    t = substitute(value, assign)
    if value.n > 1:
        return Specialization(value.n, q, t.evaluate(q), None, False)
    c0 = t.coeffs[0]
    m = q - 1
    if m == 1:
        return Specialization(1, q, c0, 0, True)
    if gcd(c0.denominator, m) != 1:
        raise SpecializationError(
            f"{c0.denominator} not invertible modulo {m} (coefficient {format_rational(c0)})")
    residue = c0.numerator * pow(c0.denominator, -1, m) % m
    return Specialization(1, q, c0, residue, True)
