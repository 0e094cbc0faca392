"""Blowups along centers having normal crossings with the special fibre.

A center ``Z`` is described by the set ``contains`` of components containing
it, its codimension ``codim`` in the total space and the classes
``[Z ∩ D_H°]`` of its traces on the strata (only ``H ⊇ contains`` can occur).

Over a point of ``Z ∩ D_H°`` the exceptional divisor is a projective space of
dimension ``codim - 1`` whose homogeneous coordinates are the ``codim`` local
equations of ``Z``.  The strict transform ``E_i`` cuts it along the hyperplane
of its own coordinate when ``i in contains`` and contains it entirely when
``i in H - contains``.  Every stratum class of the blowup is therefore a trace
class times the class of a coordinate-subspace locus; :func:`fiber_stratum_class`
returns that locus class.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Mapping

from .model import (ConstructibleDatum, ModelError, SncModel, check_datum, format_key,
                    strata_from_json, strata_to_json)
from .ring import L, L_MINUS_1, FormalClass, LPoly, ParseError, projective_space


class InadmissibleCenter(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class Center:
    contains: frozenset
    codim: int
    traces: Mapping[frozenset, FormalClass] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "contains", frozenset(self.contains))
        object.__setattr__(self, "traces", {
            frozenset(k): v for k, v in sorted(self.traces.items(), key=lambda kv: sorted(kv[0]))})

    def trace(self, H) -> FormalClass:
        return self.traces.get(frozenset(H), FormalClass())

    def __hash__(self):
        return hash((self.contains, self.codim,
                     tuple((tuple(sorted(k)), v) for k, v in self.traces.items())))


@dataclass(frozen=True)
class MoveLog:
    contains: frozenset
    codim: int
    a0: int
    exceptional_id: int = 0

    def to_json(self) -> dict:
        return {"contains": sorted(self.contains), "codim": self.codim, "a0": self.a0,
                "exceptional_id": self.exceptional_id}


@dataclass(frozen=True)
class BlowupResult:
    new_model: SncModel
    transported_datum: ConstructibleDatum | None
    move_log: MoveLog

    @property
    def exceptional_id(self) -> int:
        return self.move_log.exceptional_id


def center_violations(model: SncModel, center: Center) -> list[str]:
    J, c, m = center.contains, center.codim, model.fiber_dim
    problems = []
    if not J:
        problems.append("center must lie in some component (contains is empty)")
    unknown = sorted(i for i in J if i not in model.components)
    if unknown:
        problems.append(f"contains refers to unknown component id(s) {unknown}")
    if not isinstance(c, int) or isinstance(c, bool):
        return problems + [f"codim must be an integer, got {c!r}"]
    if c < 2:
        problems.append(f"codim >= 2 required (got {c})")
    if c < len(J):
        problems.append(f"codim {c} smaller than #contains = {len(J)}")
    if c > m + 1:
        problems.append(f"codim {c} exceeds fiber_dim+1 = {m + 1}")
    for H in center.traces:
        problems += _trace_key_violations(model, center, H, "trace")
    return problems


def _trace_key_violations(model, center, H, what) -> list[str]:
    J, c = center.contains, center.codim
    label = format_key(H)
    out = []
    if not J <= H:
        out.append(f"{what} key {label} does not contain {format_key(J)}")
    if H not in model.strata:
        out.append(f"{what} key {label} is not a stratum of the model")
    # Z ∩ D_H has codimension c + #(H - J) in the total space
    if J <= H and c + len(H - J) > model.fiber_dim + 1:
        out.append(f"{what} key {label}: codim {c} + {len(H - J)} exceeds fiber_dim+1 = "
                   f"{model.fiber_dim + 1}")
    return out


def check_center(model: SncModel, center: Center) -> None:
    problems = center_violations(model, center)
    if problems:
        raise InadmissibleCenter(problems)


def exceptional_multiplicity(model: SncModel, center: Center) -> int:
    """Multiplicity of the exceptional divisor: sum of a_i over components containing Z."""
    check_center(model, center)
    return sum(model.components[i] for i in center.contains)


def fiber_stratum_class(H, Hp, center: Center, exceptional_id: int = 0) -> LPoly:
    """Class of the fibre of ``E_{Hp}°`` over a point of ``Z ∩ D_H°``.

    ``Hp`` must contain ``exceptional_id``.  The result vanishes unless
    ``H = contains ∪ (Hp - {exceptional_id})``.
    """
    H, Hp, J, c = frozenset(H), frozenset(Hp), center.contains, center.codim
    if not J <= H:
        raise ValueError(f"{format_key(H)} does not contain {format_key(J)}")
    if exceptional_id not in Hp:
        raise ValueError(f"{format_key(Hp)} does not contain the exceptional id {exceptional_id}")
    old = Hp - {exceptional_id}
    if not (old <= H and H - J <= Hp):
        return LPoly()
    return _locus_class(c, len(Hp & J), len(J - Hp))


@lru_cache(maxsize=None)
def _locus_class(c: int, vanishing: int, s: int) -> LPoly:
    if s == 0:
        return projective_space(c - 1 - vanishing)
    # fix one nonvanishing coordinate: G_m^(s-1) x A^(c - vanishing - s)
    return L ** (c - vanishing - s) * L_MINUS_1 ** (s - 1)


def _new_keys(H, J, e):
    """All new stratum keys containing e that sit over D_H° (H ⊇ J)."""
    base = (H - J) | {e}
    for r in range(len(J) + 1):
        for T in combinations(sorted(J), r):
            yield base | frozenset(T)


def _transform(table, traces, center, e):
    out = {}
    for H, v in table.items():
        out[H] = v - traces.get(H, FormalClass())
    for H, t in traces.items():
        if H not in out:
            out[H] = -t
    for H, t in traces.items():
        if not t:
            continue
        for Hp in _new_keys(H, center.contains, e):
            fib = fiber_stratum_class(H, Hp, center, e)
            if fib:
                out[Hp] = out.get(Hp, FormalClass()) + t * fib
    return out


def blow_up(model: SncModel, center: Center, datum: ConstructibleDatum | None = None,
            exceptional_id: int | None = None) -> BlowupResult:
    """Blow up ``model`` along ``center`` and transport ``datum`` to the preimage.

    The exceptional divisor gets id 0 unless 0 is taken, in which case it gets
    ``max(ids) + 1``.
    """
    check_center(model, center)
    if datum is not None:
        check_datum(model, datum)
        if datum.on_center is None:
            raise ModelError("datum has no on_center table; it cannot be transported")
        problems = []
        for H in datum.on_center:
            problems += _trace_key_violations(model, center, H, "on_center")
            if not center.trace(H):
                problems.append(f"on_center key {format_key(H)}: the center has no trace there")
        if problems:
            raise ModelError("; ".join(problems))
    e = exceptional_id
    if e is None:
        e = 0 if 0 not in model.components else max(model.components) + 1
    if e in model.components:
        raise ValueError(f"exceptional id {e} already used")
    a0 = sum(model.components[i] for i in center.contains)

    strata = _transform(model.strata, center.traces, center, e)
    # keep the nerve closed under singletons so the new model validates
    for Hp in [H for H, v in strata.items() if v]:
        for i in Hp:
            strata.setdefault(frozenset([i]), FormalClass())
    strata.setdefault(frozenset([e]), FormalClass())
    new_model = SncModel(model.fiber_dim, {**model.components, e: a0}, strata)

    transported = None
    if datum is not None:
        transported = ConstructibleDatum(_transform(datum.on_strata, datum.on_center, center, e))
    return BlowupResult(new_model, transported, MoveLog(center.contains, center.codim, a0, e))


def center_to_json(center: Center) -> dict:
    return {"contains": sorted(center.contains), "codim": center.codim,
            "traces": strata_to_json(center.traces)}


def center_from_json(obj) -> Center:
    if not isinstance(obj, dict):
        raise ParseError("center: expected an object")
    for k in ("contains", "codim"):
        if k not in obj:
            raise ParseError(f"center: missing key {k!r}")
    ids = obj["contains"]
    if not isinstance(ids, list) or not all(isinstance(i, int) and not isinstance(i, bool) for i in ids):
        raise ParseError("center: 'contains' must be a list of integers")
    c = obj["codim"]
    if not isinstance(c, int) or isinstance(c, bool):
        raise ParseError("center: 'codim' must be an integer")
    return Center(frozenset(ids), c, strata_from_json(obj.get("traces", []), "traces"))
