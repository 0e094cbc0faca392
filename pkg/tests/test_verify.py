import json
from fractions import Fraction
from math import gcd

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from motivic_serre.blowup import Center
from motivic_serre.linsolve import solve
from motivic_serre.model import validate
from motivic_serre.ring import L, FormalClass, TruncatedClass, TruncatedFormalClass, formal_truncate, projective_space
from motivic_serre.verify import (ChainError, Move, Params, RefineFamily, _feasible, chain_blowups,
                                  chain_is_constant, check_invariance, check_invariance_multi,
                                  instance_from_json, instance_to_json, local_instance,
                                  published_seeds, random_chain, random_instance, refine_search,
                                  deep_family, solve_pair_coefficients, trial_record)


def C_class(n, *coeffs):
    return TruncatedFormalClass(n, {("C",): TruncatedClass(n, coeffs)})


def test_published_seeds():
    assert len(published_seeds()) == 1000 and len(set(published_seeds())) == 1000
    assert len(published_seeds("chains")) == 100


def test_random_instance_contract():
    params = Params(max_components=2, max_multiplicity=3, max_codim=3)
    inst = random_instance(0, params)
    assert validate(inst.model) == []
    assert len(inst.model.components) <= 2 and max(inst.model.components.values()) <= 3
    assert 2 <= inst.center.codim <= 3
    assert random_instance(0, params) == inst


@pytest.mark.parametrize("seed", published_seeds()[:100])
def test_random_instance_determinism_and_a0(seed):
    inst = random_instance(seed)
    assert random_instance(seed) == inst
    rep = check_invariance(inst)
    assert rep.move_log.a0 >= max(inst.model.components[i] for i in inst.center.contains) >= 1
    assert set(inst.datum.on_center) <= set(inst.center.traces)


def test_params_bounds():
    for bad in ({"max_components": 9}, {"max_multiplicity": 31}, {"max_codim": 9}, {"max_codim": 1}):
        with pytest.raises(ValueError):
            Params(**bad)


@pytest.mark.parametrize("c", range(2, 9))
def test_single_reduced_component(c):
    inst = local_instance([1], [1], c)
    rep = check_invariance(inst)
    assert rep.lhs == rep.rhs == C_class(2, 1)
    # before truncation the right side is [C](L^(c-1) + [P^(c-2)](1 - L)), which is [C] exactly
    assert L ** (c - 1) + projective_space(c - 2) * (1 - L) == 1


@pytest.mark.parametrize("a1, a2", [(1, 1), (1, 2), (2, 3), (3, 7), (2, 4), (6, 9)])
@pytest.mark.parametrize("c", [2, 3, 5])
def test_two_component_instances(a1, a2, c):
    expected = C_class(2, 0, Fraction(-1, a1 * a2)) if gcd(a1, a2) == 1 else TruncatedFormalClass(2)
    for J in ([1, 2], [1], [2]):
        rep = check_invariance(local_instance([a1, a2], J, c))
        assert rep.lhs == rep.rhs == expected


def test_deep_instances_vanish():
    for inst in deep_family(sizes=(3, 4), max_multiplicity=2):
        rep = check_invariance(inst)
        assert rep.lhs.is_zero() and rep.rhs.is_zero(), inst.label


@pytest.mark.parametrize("seed", published_seeds()[:200])
def test_random_invariance_n1_n2(seed):
    reps = check_invariance_multi(random_instance(seed), [1, 2])
    assert reps[1].equal and reps[2].equal


def test_report_recomputation_from_serialized_instance():
    for seed in published_seeds()[:30]:
        inst = random_instance(seed)
        again = instance_from_json(json.loads(json.dumps(instance_to_json(inst))))
        assert again == inst
        for n in (1, 2, 3):
            assert check_invariance(again, n).equal == check_invariance(inst, n).equal


def test_trial_record_shape():
    rec = trial_record(random_instance(published_seeds()[0]))
    assert {"seed", "params", "equal_n1", "equal_n2", "a0", "lhs", "rhs"} <= set(rec)
    json.dumps(rec)


def test_chain_length_zero():
    inst, moves = random_chain(published_seeds("chains")[0], 0)
    assert moves == [] and chain_blowups(inst, moves) == [] and chain_is_constant([])


@pytest.mark.parametrize("seed", published_seeds("chains")[:20])
def test_random_chains(seed):
    inst, moves = random_chain(seed, 3)
    assert len(moves) == 3
    for n in (1, 2):
        reps = chain_blowups(inst, moves, n)
        assert all(r.equal for r in reps) and chain_is_constant(reps)


def test_chain_error_names_step():
    inst, moves = random_chain(published_seeds("chains")[1], 2)
    bad = moves + [Move(Center(frozenset([1]), 1), {})]
    with pytest.raises(ChainError) as err:
        chain_blowups(inst, bad)
    assert err.value.step == 2


# -- coefficient solvers -----------------------------------------------------------

def test_pair_bound_1():
    system = solve_pair_coefficients(1)
    assert system.status == "unique"
    assert system.determined == {(1, 1): 1}


def test_pair_bound_5_against_sympy():
    system = solve_pair_coefficients(5)
    names = {u: sympy.Symbol(f"c_{u[0]}_{u[1]}") for u in system.unknowns}
    eqs = [sum(sympy.Rational(c.numerator, c.denominator) * names[u] for u, c in e.coeffs.items())
           - sympy.Rational(e.rhs.numerator, e.rhs.denominator) for e in system.equations]
    sol = sympy.solve(eqs, list(names.values()), dict=True)[0]
    determined = {u: Fraction(str(sol[s])) for u, s in names.items() if s in sol and not sol[s].free_symbols}
    assert determined == system.determined
    for (a, b), v in determined.items():
        assert v == Fraction(1, a * b)
    a, b = sympy.symbols("a b", positive=True)
    assert sympy.simplify(1 / ((a + b) * a) + 1 / ((a + b) * b) - 1 / (a * b)) == 0


def test_pair_relations_have_declared_form():
    system = solve_pair_coefficients(12)
    norm, *rest = system.equations
    assert set(norm.coeffs) == {(1, 1)}
    for e in rest:
        parent = min(e.coeffs)  # the pair with the smallest entries
        a, b = parent
        children = {tuple(sorted((a, a + b))), tuple(sorted((b, a + b)))}
        assert set(e.coeffs) == {parent} | children
        assert e.rhs == 0
        scale = e.coeffs[parent]
        for ch in children:
            assert e.coeffs[ch] == -scale * (2 if len(children) == 1 else 1)


def test_pair_reciprocal_substitution_bound_30():
    system = solve_pair_coefficients(30)
    assert system.satisfied_by({u: Fraction(1, u[0] * u[1]) for u in system.unknowns}) == []


@given(st.lists(st.lists(st.integers(-3, 3), min_size=4, max_size=4), min_size=1, max_size=5))
def test_linsolve_against_sympy(rows):
    variables = ["x0", "x1", "x2"]
    eqs = [({v: Fraction(r[k]) for k, v in enumerate(variables)}, Fraction(r[3])) for r in rows]
    ours = solve(variables, eqs)
    syms = sympy.symbols("x0 x1 x2")
    theirs = sympy.linsolve([sum(r[k] * syms[k] for k in range(3)) - r[3] for r in rows], syms)
    assert ours.consistent == (theirs != sympy.EmptySet)
    if ours.consistent:
        point = next(iter(theirs))
        for k, v in enumerate(variables):
            fixed = not point[k].free_symbols
            assert (v in ours.determined) == fixed
            if fixed:
                assert ours.determined[v] == Fraction(str(point[k]))
        # the particular solution satisfies the system
        for coeffs, rhs in eqs:
            assert sum(c * ours.particular[v] for v, c in coeffs.items()) == rhs


def test_refine_curve_moves_need_no_correction():
    # on curves no triple strata exist, so every row is already balanced with all c_H = 0
    system = refine_search(3, RefineFamily(sizes=(1, 2), max_fiber_dim=1))
    assert system.unknowns == [] and system.equations == []


def test_refine_rows_without_unknowns_flag_true_failures():
    system = refine_search(3, RefineFamily(sizes=(3,), max_multiplicity=2))
    zero = {u: Fraction(0) for u in system.unknowns}
    constant_rows = [e for e in system.equations if not e.coeffs]
    assert all(not e.holds(zero) for e in constant_rows)
    failures = [i for i in deep_family(sizes=(3,), max_multiplicity=2) if not check_invariance(i, 3).equal]
    assert failures


def test_refine_certificate_well_formed():
    system = refine_search(3, RefineFamily(sizes=(1, 2), max_multiplicity=3))
    assert system.status in ("inconsistent", "unique", "family")
    if system.status == "inconsistent":
        cert = system.certificate
        assert cert
        chosen = [e for e in system.equations if e.source in cert]
        assert not _feasible(system.unknowns, chosen)
        for label in cert:
            assert _feasible(system.unknowns, [e for e in chosen if e.source != label])
    json.dumps(system.to_json())
