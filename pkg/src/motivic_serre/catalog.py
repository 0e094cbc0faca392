"""Kodaira-type degenerations of elliptic curves with snc special fibre.

Each fixture is a model of relative dimension 1 whose components are rational
curves.  Strata classes are multiples of the point symbol ``pt``: a component
meeting ``k`` others in ``k`` distinct points has open part ``[pt](L + 1 - k)``
and each intersection point contributes ``[pt]``.
"""

from __future__ import annotations

import re
from collections import Counter

from .model import SncModel
from .ring import FormalClass, LPoly

POINT = "pt"

# Star-shaped types: central multiplicity and arms listed from the center outwards.
_STARS = {
    "IV*": (3, [(2, 1), (2, 1), (2, 1)]),
    "III*": (4, [(3, 2, 1), (3, 2, 1), (2,)]),
    "II*": (6, [(5, 4, 3, 2, 1), (4, 2), (3,)]),
}

TYPES = ("I_n", "I0*", "In*", "IV*", "III*", "II*")


class CatalogError(ValueError):
    pass


def _from_graph(mults: dict, edges: list) -> SncModel:
    degree = Counter()
    points = Counter()
    for i, j in edges:
        degree[i] += 1
        degree[j] += 1
        points[frozenset((i, j))] += 1
    strata = {}
    for i in mults:
        strata[frozenset([i])] = FormalClass.symbol(POINT, LPoly([1 - degree[i], 1]))
    for H, count in points.items():
        strata[H] = FormalClass.symbol(POINT, count)
    return SncModel(1, mults, strata)


def cycle(n: int) -> SncModel:
    if n < 2:
        raise CatalogError("I_n needs n >= 2 (I_1 is not snc)")
    mults = {i: 1 for i in range(1, n + 1)}
    edges = [(i, i % n + 1) for i in range(1, n + 1)]
    return _from_graph(mults, edges)


def dihedral_star(n: int) -> SncModel:
    """I_n^*: chain of n+1 double components with two simple leaves at each end."""
    if n < 0:
        raise CatalogError("In* needs n >= 0")
    chain = list(range(1, n + 2))
    mults = {i: 2 for i in chain}
    leaves = list(range(n + 2, n + 6))
    mults.update({i: 1 for i in leaves})
    edges = [(chain[k], chain[k + 1]) for k in range(n)]
    edges += [(chain[0], leaves[0]), (chain[0], leaves[1]),
              (chain[-1], leaves[2]), (chain[-1], leaves[3])]
    return _from_graph(mults, edges)


def star(name: str) -> SncModel:
    center_mult, arms = _STARS[name]
    mults = {1: center_mult}
    edges = []
    nxt = 2
    for arm in arms:
        prev = 1
        for a in arm:
            mults[nxt] = a
            edges.append((prev, nxt))
            prev = nxt
            nxt += 1
    return _from_graph(mults, edges)


def catalog(name: str, param: int | None = None) -> SncModel:
    """Model for Kodaira type ``name``; ``I_n`` and ``In*`` take ``param``."""
    key = name.replace("_", "").replace(" ", "")
    if re.fullmatch(r"I\d+", key) and key != "I0":
        return cycle(int(key[1:]))
    if key in ("In", "I"):
        if param is None:
            raise CatalogError("I_n requires --param n")
        return cycle(param)
    if key == "I0*":
        return dihedral_star(0)
    if key == "In*":
        if param is None:
            raise CatalogError("In* requires --param n")
        return dihedral_star(param)
    if key in _STARS:
        return star(key)
    raise CatalogError(f"unknown type {name!r}; available: {', '.join(TYPES)}")


def dual_graph_edges(model: SncModel) -> list:
    """Pairs of components that meet, with the number of intersection points."""
    out = []
    for H, cls in model.strata.items():
        if len(H) == 2:
            out.append((tuple(sorted(H)), cls.terms.get((POINT,), LPoly()).coeffs[0]))
    return out
