"""Randomized and closed-form checks of blowup invariance, plus coefficient solvers.

Random instances are drawn from ``numpy.random.default_rng(seed)`` (PCG64), so an
instance is reproducible from ``(seed, params)``.  Class-level consistency of
traces is built in: every stratum class is generated as ``trace + remainder``
with a fresh remainder symbol, so ``[Z ∩ D_H°]`` is always a summand of
``[D_H°]`` and likewise for constructible data.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from importlib import resources
from itertools import combinations, combinations_with_replacement
from math import gcd
from typing import Iterable, Sequence

import numpy as np

from .blowup import Center, MoveLog, blow_up, center_from_json, center_to_json
from .invariant import serre_tilde_formal
from .linsolve import Solution, solve
from .model import (ConstructibleDatum, SncModel, datum_from_json, datum_to_json, model_from_json,
                    model_to_json)
from .ring import (ONE_MINUS_L, FormalClass, LPoly, TruncatedFormalClass, format_rational,
                   formal_truncate, truncated_to_json)

MAX_RETRIES = 50


@dataclass(frozen=True)
class Params:
    max_components: int = 4
    max_multiplicity: int = 12
    max_codim: int = 5
    symbol_budget: int = 64
    max_degree: int = 4

    def __post_init__(self):
        if not 1 <= self.max_components <= 8:
            raise ValueError("max_components must be in 1..8")
        if not 1 <= self.max_multiplicity <= 30:
            raise ValueError("max_multiplicity must be in 1..30")
        if not 2 <= self.max_codim <= 8:
            raise ValueError("max_codim must be in 2..8")
        if self.symbol_budget < 1 or self.max_degree < 0:
            raise ValueError("symbol_budget must be >= 1 and max_degree >= 0")


DEFAULT_PARAMS = Params()


@dataclass(frozen=True)
class TestInstance:
    model: SncModel
    center: Center
    datum: ConstructibleDatum
    seed: int | None = None
    params: Params | None = None
    label: str = ""

    __test__ = False  # not a pytest class


@dataclass(frozen=True)
class Move:
    center: Center
    on_center: dict = field(default_factory=dict)


@dataclass(frozen=True)
class InvarianceReport:
    lhs: TruncatedFormalClass
    rhs: TruncatedFormalClass
    modulus_power: int
    move_log: MoveLog

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs

    def to_json(self) -> dict:
        return {"modulus_power": self.modulus_power, "equal": self.equal,
                "move_log": self.move_log.to_json(),
                "lhs": truncated_to_json(self.lhs), "rhs": truncated_to_json(self.rhs)}


class ChainError(ValueError):
    def __init__(self, step: int, cause: Exception):
        self.step = step
        super().__init__(f"move {step}: {cause}")


# -- generation -----------------------------------------------------------------

class _Gen:
    def __init__(self, rng: np.random.Generator, params: Params):
        self.rng = rng
        self.params = params
        self.pool: list[str] = []
        self.remainders = 0

    def _int(self, lo, hi) -> int:
        """Uniform integer in [lo, hi]."""
        return int(self.rng.integers(lo, hi + 1))

    def chance(self, p) -> bool:
        return bool(self.rng.random() < p)

    def symbol(self) -> str:
        if len(self.pool) < self.params.symbol_budget:
            name = f"s{len(self.pool)}"
            self.pool.append(name)
            return name
        return self.pool[self._int(0, len(self.pool) - 1)]

    def remainder(self) -> str:
        self.remainders += 1
        return f"r{self.remainders - 1}"

    def multiplicity(self) -> int:
        if self.chance(0.4):
            return 1
        return self._int(1, self.params.max_multiplicity)

    def lpoly(self) -> LPoly:
        while True:
            deg = self._int(0, self.params.max_degree)
            p = LPoly([Fraction(self._int(-5, 5), self._int(1, 4)) for _ in range(deg + 1)])
            if p:
                return p

    def cls(self, name: str | None = None) -> FormalClass:
        out = FormalClass.symbol(name or self.symbol(), self.lpoly())
        if self.chance(0.2) and self.pool:
            mono = (self.pool[self._int(0, len(self.pool) - 1)], self.symbol())
            out = out + FormalClass({mono: self.lpoly()})
        return out

    def subset(self, items, p=0.5, nonempty=True) -> frozenset:
        items = sorted(items)
        while True:
            pick = frozenset(i for i in items if self.chance(p))
            if pick or not nonempty or not items:
                return pick


def _random_nerve(gen: _Gen, ids, max_size) -> list[frozenset]:
    nerve = {frozenset([i]) for i in ids}
    for r in range(2, min(len(ids), max_size) + 1):
        p = 0.7 if r == 2 else 0.45
        for H in combinations(ids, r):
            H = frozenset(H)
            if all(H - {i} in nerve for i in H) and gen.chance(p):
                nerve.add(H)
    return sorted(nerve, key=lambda H: (len(H), sorted(H)))


def _eligible_trace_keys(model: SncModel, J, c) -> list[frozenset]:
    return [H for H in model.strata if J <= H and c + len(H - J) <= model.fiber_dim + 1]


def random_center(gen: _Gen, model: SncModel, keys: Iterable[frozenset] | None = None):
    """Random admissible (contains, codim, trace keys) or None if none was found."""
    m = model.fiber_dim
    if keys is None:
        keys = [H for H, v in model.strata.items() if v] or list(model.strata)
    keys = list(keys)
    if not keys or m < 1:
        return None
    # favour deep strata so that multi-component centers are common
    weights = np.array([3.0 ** len(H) for H in keys])
    order = gen.rng.choice(len(keys), size=len(keys), replace=False, p=weights / weights.sum())
    for idx in order:
        H0 = keys[int(idx)]
        J = gen.subset(H0, 0.75)
        lo, hi = max(2, len(J)), m + 1
        if lo > hi:
            continue
        c = gen._int(lo, hi)
        eligible = [H for H in _eligible_trace_keys(model, J, c) if H in set(keys)]
        if not eligible:
            continue
        chosen = [H for H in eligible if gen.chance(0.6)]
        if not chosen:
            chosen = [eligible[gen._int(0, len(eligible) - 1)]]
        return J, c, chosen
    return None


def random_instance(seed: int, params: Params = DEFAULT_PARAMS) -> TestInstance:
    """A valid model, an admissible center and a transportable datum, all from ``seed``."""
    gen = _Gen(np.random.default_rng(seed), params)
    for _ in range(MAX_RETRIES):
        k = gen._int(1, params.max_components)
        m = gen._int(1, params.max_codim - 1)
        ids = list(range(1, k + 1))
        comps = {i: gen.multiplicity() for i in ids}
        nerve = _random_nerve(gen, ids, m + 1)
        skeleton = SncModel(m, comps, {H: FormalClass() for H in nerve})
        pick = random_center(gen, skeleton, nerve)
        if pick is None:
            continue
        J, c, trace_keys = pick
        traces = {H: gen.cls() for H in trace_keys}
        strata = {H: traces.get(H, FormalClass()) + gen.cls(gen.remainder()) for H in nerve}
        model = SncModel(m, comps, strata)
        center = Center(J, c, traces)
        if gen.chance(0.25):
            datum = ConstructibleDatum(dict(strata), dict(traces))
        else:
            on_center = {H: gen.cls() for H in trace_keys if gen.chance(0.7)}
            on_strata = {H: on_center.get(H, FormalClass()) + gen.cls(gen.remainder())
                         for H in nerve if H in on_center or gen.chance(0.6)}
            datum = ConstructibleDatum(on_strata, on_center)
        return TestInstance(model, center, datum, seed, params, f"seed={seed}")
    raise RuntimeError(f"no admissible instance for seed {seed} after {MAX_RETRIES} attempts")


def random_chain(seed: int, length: int, params: Params = DEFAULT_PARAMS):
    """Start instance and ``length`` moves; move 0 is the instance's own center.

    Later moves pick a random admissible center on the current blowup, with
    fresh trace symbols and fresh ``[C ∩ Z ∩ D_H°]`` symbols.
    """
    inst = random_instance(seed, params)
    if length == 0:
        return inst, []
    gen = _Gen(np.random.default_rng([seed, length]), params)
    moves = [Move(inst.center, dict(inst.datum.on_center))]
    model, datum = inst.model, inst.datum
    for step in range(1, length):
        res = blow_up(model, moves[-1].center,
                      ConstructibleDatum(datum.on_strata, moves[-1].on_center))
        model, datum = res.new_model, res.transported_datum
        pick = random_center(gen, model)
        if pick is None:
            raise RuntimeError(f"seed {seed}: no admissible center at move {step}")
        J, c, keys = pick
        traces = {H: gen.cls(f"z{step}_{n}") for n, H in enumerate(keys)}
        on_center = {H: gen.cls(f"w{step}_{n}") for n, H in enumerate(keys) if gen.chance(0.7)}
        moves.append(Move(Center(J, c, traces), on_center))
    return inst, moves


def local_instance(multiplicities: Sequence[int], contains: Iterable[int], codim: int,
                   support: Iterable[int] | None = None, symbol: str = "C") -> TestInstance:
    """Chart-local instance: components 1..d, C = Z ∩ D_H° with class [symbol].

    ``support`` is the set H of components through C (default: all of them).
    """
    d = len(multiplicities)
    comps = {i + 1: a for i, a in enumerate(multiplicities)}
    J = frozenset(contains)
    H = frozenset(support) if support is not None else frozenset(comps)
    m = max(d - 1, codim + len(H - J) - 1)
    C = FormalClass.symbol(symbol)
    strata = {frozenset([i]): FormalClass() for i in comps}
    strata[H] = C
    model = SncModel(m, comps, strata)
    center = Center(J, codim, {H: C})
    datum = ConstructibleDatum({H: C}, {H: C})
    label = f"a={tuple(multiplicities)} J={sorted(J)} c={codim} H={sorted(H)}"
    return TestInstance(model, center, datum, label=label)


def deep_family(sizes=(3, 4, 5), max_multiplicity: int = 3) -> list[TestInstance]:
    """C in the deepest stratum of d' >= 3 components, codim >= d'."""
    out = []
    for d in sizes:
        for mults in combinations_with_replacement(range(1, max_multiplicity + 1), d):
            for r in range(1, d + 1):
                for J in combinations(range(1, d + 1), r):
                    for c in range(max(2, d), d + 2):
                        out.append(local_instance(mults, J, c))
    return out


# -- invariance -------------------------------------------------------------------

def _sides(instance: TestInstance):
    res = blow_up(instance.model, instance.center, instance.datum)
    return (serre_tilde_formal(instance.model, instance.datum),
            serre_tilde_formal(res.new_model, res.transported_datum), res.move_log)


def check_invariance(instance: TestInstance, n: int = 2) -> InvarianceReport:
    lhs, rhs, log = _sides(instance)
    return InvarianceReport(formal_truncate(lhs, n), formal_truncate(rhs, n), n, log)


def check_invariance_multi(instance: TestInstance, powers: Iterable[int]) -> dict:
    lhs, rhs, log = _sides(instance)
    return {n: InvarianceReport(formal_truncate(lhs, n), formal_truncate(rhs, n), n, log)
            for n in powers}


def chain_blowups(start, moves: Sequence[Move], n: int = 2) -> list[InvarianceReport]:
    """Apply ``moves`` in order starting from ``start.model`` / ``start.datum``."""
    model, on_strata = start.model, start.datum.on_strata
    reports = []
    for step, move in enumerate(moves):
        datum = ConstructibleDatum(on_strata, move.on_center)
        try:
            res = blow_up(model, move.center, datum)
        except ValueError as exc:
            raise ChainError(step, exc) from exc
        lhs = formal_truncate(serre_tilde_formal(model, datum), n)
        rhs = formal_truncate(serre_tilde_formal(res.new_model, res.transported_datum), n)
        reports.append(InvarianceReport(lhs, rhs, n, res.move_log))
        model, on_strata = res.new_model, res.transported_datum.on_strata
    return reports


def chain_is_constant(reports: Sequence[InvarianceReport]) -> bool:
    if not reports:
        return True
    first = reports[0].lhs
    return all(r.lhs == first and r.rhs == first for r in reports)


def trial_record(instance: TestInstance, n: int = 2) -> dict:
    reps = check_invariance_multi(instance, sorted({1, 2, n}))
    return {
        "seed": instance.seed,
        "label": instance.label,
        "params": asdict(instance.params) if instance.params else None,
        "modulus_power": n,
        "equal": reps[n].equal,
        "equal_n1": reps[1].equal,
        "equal_n2": reps[2].equal,
        "a0": reps[n].move_log.a0,
        "lhs": truncated_to_json(reps[n].lhs),
        "rhs": truncated_to_json(reps[n].rhs),
    }


def published_seeds(kind: str = "single") -> list[int]:
    """The checked-in acceptance seeds: ``"single"`` (1000) or ``"chains"`` (100)."""
    data = json.loads(resources.files("motivic_serre").joinpath("data/published_seeds.json").read_text())
    return data[kind]


def instance_to_json(instance: TestInstance) -> dict:
    return {
        "seed": instance.seed,
        "params": asdict(instance.params) if instance.params else None,
        "label": instance.label,
        "model": model_to_json(instance.model),
        "center": center_to_json(instance.center),
        "datum": datum_to_json(instance.datum),
    }


def instance_from_json(obj) -> TestInstance:
    params = obj.get("params")
    return TestInstance(model_from_json(obj["model"]), center_from_json(obj["center"]),
                        datum_from_json(obj["datum"]), obj.get("seed"),
                        Params(**params) if params else None, obj.get("label", ""))


# -- coefficient systems ------------------------------------------------------------

@dataclass
class Equation:
    coeffs: dict
    rhs: Fraction
    source: str

    def holds(self, assignment) -> bool:
        return sum((c * assignment[u] for u, c in self.coeffs.items()), Fraction(0)) == self.rhs


@dataclass
class CoefficientSystem:
    unknowns: list
    equations: list
    solution: Solution | None
    certificate: list | None = None  # labels of a minimal infeasible set of instances

    @property
    def status(self) -> str:
        if self.solution is None or not self.solution.consistent:
            return "inconsistent"
        return "unique" if self.solution.unique else "family"

    @property
    def determined(self) -> dict:
        return {} if self.solution is None else dict(self.solution.determined)

    def satisfied_by(self, assignment) -> list:
        """Equations violated by ``assignment`` (an empty list means all hold)."""
        return [e for e in self.equations if not e.holds(assignment)]

    def to_json(self) -> dict:
        sol = self.solution
        return {
            "status": self.status,
            "unknowns": [unknown_name(u) for u in self.unknowns],
            "equations": [{"coeffs": {unknown_name(u): format_rational(c) for u, c in e.coeffs.items()},
                           "rhs": format_rational(e.rhs), "source": e.source} for e in self.equations],
            "determined": {unknown_name(u): format_rational(v) for u, v in self.determined.items()},
            "free": [unknown_name(u) for u in sol.free] if sol and sol.consistent else [],
            "certificate": self.certificate,
        }

    def describe(self) -> str:
        lines = [f"status: {self.status}",
                 f"unknowns: {len(self.unknowns)}, equations: {len(self.equations)}"]
        if self.status == "inconsistent":
            lines.append("minimal infeasible set of instances:")
            lines += [f"  {s}" for s in self.certificate or []]
        else:
            for u in self.unknowns:
                if u in self.determined:
                    lines.append(f"{unknown_name(u)}={format_rational(self.determined[u])}")
                else:
                    lines.append(f"{unknown_name(u)} free")
        return "\n".join(lines)


def unknown_name(u) -> str:
    return "c(" + ",".join(str(a) for a in u) + ")"


def _extended_invariant(model: SncModel, datum: ConstructibleDatum, n: int,
                        pair_unknowns: bool, triple_unknowns: bool) -> dict:
    """Invariant with unknown coefficients, as {unknown or None: TruncatedFormalClass}."""
    parts: dict = defaultdict(FormalClass)
    for H, cls in datum.on_strata.items():
        a = tuple(sorted(model.components[i] for i in H))
        if len(H) == 1 and a[0] == 1:
            parts[None] += cls
        elif len(H) == 2 and gcd(*a) == 1:
            if pair_unknowns:
                parts[a] += cls * ONE_MINUS_L
            else:
                parts[None] += cls * ONE_MINUS_L * Fraction(1, a[0] * a[1])
        elif len(H) == 3 and triple_unknowns:
            parts[a] += cls * ONE_MINUS_L ** 2
    return {u: formal_truncate(v, n) for u, v in parts.items()}


def _move_equations(instance: TestInstance, n: int, pair_unknowns: bool,
                    triple_unknowns: bool) -> list[Equation]:
    res = blow_up(instance.model, instance.center, instance.datum)
    before = _extended_invariant(instance.model, instance.datum, n, pair_unknowns, triple_unknowns)
    after = _extended_invariant(res.new_model, res.transported_datum, n, pair_unknowns,
                                triple_unknowns)
    rows: dict = defaultdict(lambda: [defaultdict(Fraction), Fraction(0)])
    for sign, side in ((1, after), (-1, before)):
        for u, val in side.items():
            for mono, t in val.items():
                for k, c in enumerate(t.coeffs):
                    if not c:
                        continue
                    row = rows[(mono, k)]
                    if u is None:
                        row[1] -= sign * c
                    else:
                        row[0][u] += sign * c
    out = []
    for (mono, k), (coeffs, rhs) in sorted(rows.items()):
        coeffs = {u: c for u, c in coeffs.items() if c}
        if coeffs or rhs:
            out.append(Equation(coeffs, rhs, instance.label))
    return out


def _build_system(instances, n, pair_unknowns, triple_unknowns, unknowns=None):
    equations = []
    for inst in instances:
        equations += _move_equations(inst, n, pair_unknowns, triple_unknowns)
    if unknowns is None:
        unknowns = sorted({u for e in equations for u in e.coeffs})
    return unknowns, equations


def _feasible(unknowns, equations) -> bool:
    return solve(unknowns, [(e.coeffs, e.rhs) for e in equations]).consistent


def _minimal_infeasible(unknowns, equations) -> list[str]:
    """Deletion filter over instance labels."""
    by_source: dict = defaultdict(list)
    for e in equations:
        by_source[e.source].append(e)
    labels = list(by_source)
    # shortest infeasible prefix first
    prefix = []
    for lab in labels:
        prefix.append(lab)
        if not _feasible(unknowns, [e for s in prefix for e in by_source[s]]):
            break
    core = list(prefix)
    for lab in list(prefix):
        trial = [s for s in core if s != lab]
        if not _feasible(unknowns, [e for s in trial for e in by_source[s]]):
            core = trial
    return core


def _finish(unknowns, equations) -> CoefficientSystem:
    sol = solve(unknowns, [(e.coeffs, e.rhs) for e in equations])
    cert = None if sol.consistent else _minimal_infeasible(unknowns, equations)
    return CoefficientSystem(unknowns, equations, sol, cert)


def pair_move_family(bound: int) -> list[TestInstance]:
    """The normalization move and the splitting moves generating the pair relations."""
    family = [local_instance([1], [1], 2)]
    for a in range(1, bound + 1):
        for b in range(a, bound + 1 - a):
            if gcd(a, b) == 1:
                family.append(local_instance([a, b], [1, 2], 2))
    return family


def solve_pair_coefficients(bound: int) -> CoefficientSystem:
    """Solve for pair coefficients c(a,b), gcd(a,b)=1, a <= b <= bound, from blowup relations.

    Relations come from running the blowup engine on the normalization move (one
    component of multiplicity 1) and on splitting moves with Z in D_1 ∩ D_2.
    """
    if bound < 1:
        raise ValueError("bound must be >= 1")
    unknowns = [(a, b) for a in range(1, bound + 1) for b in range(a, bound + 1) if gcd(a, b) == 1]
    _, equations = _build_system(pair_move_family(bound), 2, True, False, unknowns)
    return _finish(unknowns, equations)


@dataclass(frozen=True)
class RefineFamily:
    """Chart-local instances for the mod (L-1)^3 probe.

    Components ``sizes``; multiplicity multisets up to ``max_multiplicity``;
    every nonempty ``contains``; codim from ``max(2, #contains)`` up to
    ``#contains + extra_codim`` but never above ``max_fiber_dim + 1``.
    """
    sizes: tuple = (3,)
    max_multiplicity: int = 3
    extra_codim: int = 1
    max_fiber_dim: int = 4
    supports: str = "all"  # "all": C over every H ⊇ contains; "deepest": H = all components

    def instances(self) -> list[TestInstance]:
        if max(self.sizes) > 4:
            raise ValueError("refine family is bounded to at most 4 components")
        out = []
        for d in self.sizes:
            ids = range(1, d + 1)
            for mults in combinations_with_replacement(range(1, self.max_multiplicity + 1), d):
                for r in range(1, d + 1):
                    for J in combinations(ids, r):
                        for c in range(max(2, r), r + self.extra_codim + 1):
                            for H in self._supports(ids, J):
                                if max(d - 1, c + len(H) - r - 1) > self.max_fiber_dim:
                                    continue
                                out.append(local_instance(mults, J, c, H))
        return out

    def _supports(self, ids, J):
        if self.supports == "deepest":
            return [frozenset(ids)]
        rest = sorted(set(ids) - set(J))
        return [frozenset(J) | frozenset(extra)
                for r in range(len(rest) + 1) for extra in combinations(rest, r)]


def refine_search(n: int = 3, family: RefineFamily = RefineFamily()) -> CoefficientSystem:
    """Look for triple-stratum coefficients making the extended invariant blowup-invariant mod (L-1)^n.

    Pair coefficients stay at 1/(ab).  The outcome is reported, never asserted.
    """
    unknowns, equations = _build_system(family.instances(), n, False, True)
    return _finish(unknowns, equations)
