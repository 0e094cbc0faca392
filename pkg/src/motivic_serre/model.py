"""Combinatorial snc models and constructible data on their special fibres.

A model records the components ``D_i`` of the special fibre with their
multiplicities ``a_i`` and, for each nonempty set ``H`` of component ids, the
class of the open stratum ``D_H°`` (points lying on exactly the ``D_h``,
``h in H``).  Absent keys stand for empty strata.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

from .ring import FormalClass, ParseError, class_from_json, class_to_json

StratumKey = frozenset


class ModelError(ValueError):
    """A model or datum violates a structural invariant."""


def key(*ids: int) -> frozenset:
    return frozenset(ids)


def format_key(k) -> str:
    return "{" + ",".join(str(i) for i in sorted(k)) + "}"


@dataclass(frozen=True)
class SncModel:
    fiber_dim: int
    components: Mapping[int, int]
    strata: Mapping[frozenset, FormalClass] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "components", dict(sorted(self.components.items())))
        object.__setattr__(self, "strata",
                           {frozenset(k): v for k, v in sorted(self.strata.items(), key=lambda kv: sorted(kv[0]))})

    def multiplicity(self, i: int) -> int:
        return self.components[i]

    def stratum(self, H) -> FormalClass:
        return self.strata.get(frozenset(H), FormalClass())

    def __eq__(self, other):
        if not isinstance(other, SncModel):
            return NotImplemented
        return (self.fiber_dim == other.fiber_dim and self.components == other.components
                and self.strata == other.strata)

    def __hash__(self):
        return hash((self.fiber_dim, tuple(self.components.items()),
                     tuple((tuple(sorted(k)), v) for k, v in self.strata.items())))


@dataclass(frozen=True)
class ConstructibleDatum:
    """Classes ``[C ∩ D_H°]`` and, optionally, ``[C ∩ Z ∩ D_H°]`` for a center Z."""

    on_strata: Mapping[frozenset, FormalClass] = field(default_factory=dict)
    on_center: Mapping[frozenset, FormalClass] | None = None

    def __post_init__(self):
        object.__setattr__(self, "on_strata", _canonical_table(self.on_strata))
        if self.on_center is not None:
            object.__setattr__(self, "on_center", _canonical_table(self.on_center))

    def get(self, H) -> FormalClass:
        return self.on_strata.get(frozenset(H), FormalClass())

    def __eq__(self, other):
        if not isinstance(other, ConstructibleDatum):
            return NotImplemented
        return self.on_strata == other.on_strata and self.on_center == other.on_center

    def __hash__(self):
        oc = None if self.on_center is None else tuple(
            (tuple(sorted(k)), v) for k, v in self.on_center.items())
        return hash((tuple((tuple(sorted(k)), v) for k, v in self.on_strata.items()), oc))


def _canonical_table(table) -> dict:
    # zero entries carry no information in a datum
    return {frozenset(k): v for k, v in sorted(table.items(), key=lambda kv: sorted(kv[0])) if v}


def validate(model: SncModel) -> list[str]:
    """Return the violated invariants of ``model``; an empty list means valid."""
    problems = []
    if not isinstance(model.fiber_dim, int) or model.fiber_dim < 0:
        problems.append(f"fiber_dim must be a non-negative integer, got {model.fiber_dim!r}")
        return problems
    for i, a in model.components.items():
        if not isinstance(a, int) or isinstance(a, bool) or a < 1:
            problems.append(f"component {i}: multiplicity must be an integer >= 1, got {a!r}")
    for H, cls in model.strata.items():
        label = format_key(H)
        if not H:
            problems.append("empty stratum key")
            continue
        unknown = sorted(i for i in H if i not in model.components)
        if unknown:
            problems.append(f"stratum {label}: unknown component id(s) {unknown}")
        if len(H) > model.fiber_dim + 1:
            problems.append(f"stratum {label}: {len(H)} components exceeds fiber_dim+1 = "
                            f"{model.fiber_dim + 1} (#H <= m+1)")
        if cls and len(H) > 1:
            missing = sorted(i for i in H if frozenset([i]) not in model.strata)
            if missing:
                problems.append(f"stratum {label}: nonzero but singleton stratum missing for "
                                f"component(s) {missing} (downward closure)")
    return problems


def check_datum(model: SncModel, datum: ConstructibleDatum) -> None:
    """Raise :class:`ModelError` if ``datum`` mentions strata the model lacks."""
    stray = [format_key(H) for H in datum.on_strata if H not in model.strata]
    if datum.on_center:
        stray += [format_key(H) for H in datum.on_center if H not in model.strata]
    if stray:
        raise ModelError(f"datum refers to strata absent from the model: {', '.join(sorted(set(stray)))}")


def full_fiber_datum(model: SncModel) -> ConstructibleDatum:
    """The datum of C = whole special fibre."""
    return ConstructibleDatum(dict(model.strata))


def datum_disjoint_union(c1: ConstructibleDatum, c2: ConstructibleDatum) -> ConstructibleDatum:
    return ConstructibleDatum(
        _add_tables(c1.on_strata, c2.on_strata),
        None if c1.on_center is None and c2.on_center is None
        else _add_tables(c1.on_center or {}, c2.on_center or {}),
    )


def _add_tables(a, b) -> dict:
    out = dict(a)
    for H, v in b.items():
        out[H] = out.get(H, FormalClass()) + v
    return out


# -- JSON ------------------------------------------------------------------------

def strata_to_json(table) -> list:
    return [{"components": sorted(H), "class": class_to_json(v)} for H, v in table.items()]


def strata_from_json(obj, where="strata") -> dict:
    if not isinstance(obj, list):
        raise ParseError(f"{where}: expected a list")
    out: dict = {}
    for n, entry in enumerate(obj):
        loc = f"{where}[{n}]"
        if not isinstance(entry, dict) or "components" not in entry or "class" not in entry:
            raise ParseError(f"{loc}: expected keys 'components' and 'class'")
        ids = entry["components"]
        if not isinstance(ids, list) or not all(_is_int(i) for i in ids):
            raise ParseError(f"{loc}: 'components' must be a list of integers")
        H = frozenset(ids)
        if len(H) != len(ids):
            raise ParseError(f"{loc}: repeated component id")
        try:
            cls = class_from_json(entry["class"])
        except ParseError as exc:
            raise ParseError(f"{loc}: {exc}") from None
        out[H] = out.get(H, FormalClass()) + cls
    return out


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def model_to_json(model: SncModel) -> dict:
    return {
        "fiber_dim": model.fiber_dim,
        "components": [{"id": i, "multiplicity": a} for i, a in model.components.items()],
        "strata": strata_to_json(model.strata),
    }


def model_from_json(obj) -> SncModel:
    if not isinstance(obj, dict):
        raise ParseError("model: expected an object")
    for k in ("fiber_dim", "components", "strata"):
        if k not in obj:
            raise ParseError(f"model: missing key {k!r}")
    if not _is_int(obj["fiber_dim"]):
        raise ParseError("model: 'fiber_dim' must be an integer")
    comps = {}
    if not isinstance(obj["components"], list):
        raise ParseError("model: 'components' must be a list")
    for n, c in enumerate(obj["components"]):
        if not isinstance(c, dict) or not _is_int(c.get("id")) or not _is_int(c.get("multiplicity")):
            raise ParseError(f"components[{n}]: expected integer 'id' and 'multiplicity'")
        if c["id"] in comps:
            raise ParseError(f"components[{n}]: duplicate id {c['id']}")
        comps[c["id"]] = c["multiplicity"]
    return SncModel(obj["fiber_dim"], comps, strata_from_json(obj["strata"]))


def datum_to_json(datum: ConstructibleDatum) -> dict:
    return {
        "on_strata": strata_to_json(datum.on_strata),
        "on_center": None if datum.on_center is None else strata_to_json(datum.on_center),
    }


def datum_from_json(obj) -> ConstructibleDatum:
    if not isinstance(obj, dict) or "on_strata" not in obj:
        raise ParseError("datum: expected an object with 'on_strata'")
    oc = obj.get("on_center")
    return ConstructibleDatum(
        strata_from_json(obj["on_strata"], "on_strata"),
        None if oc is None else strata_from_json(oc, "on_center"),
    )


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def dump_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")
