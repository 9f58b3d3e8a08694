import random

import pytest

from conftest import Z3_BACKEND, requires_z3
from entailment_engine import match_fn, match_guard, prove, unfold_update, well_formed
from formulas import (EMP, TRUE, Entailment, Lseg, Next, SpatialConj, Stack, Var, conj_union,
                      eval_pure)
from semantics_oracle import (OracleBounds, enumerate_heaps, enumerate_stacks, satisfiable_within,
                              satisfies)
from theory_backend import Sat, check_formula
from worked_examples import (disagreements, entailment_family, fuzz, random_entailment,
                             spatial_families)

NAMES = [Var(n) for n in 'abcd']


def _random_atom(rng, names=NAMES, emp=True):
    kinds = (Next, Lseg, Lseg, 'emp') if emp else (Next, Lseg)
    kind = rng.choice(kinds)
    if kind == 'emp':
        return EMP
    return kind(rng.choice(names), rng.choice(names))


def _random_conj(rng, size, names=NAMES):
    return SpatialConj(tuple(_random_atom(rng, names) for _ in range(size)))


def _random_stack(rng, names=NAMES):
    return Stack({v.name: rng.randrange(len(names)) for v in names})


def _sigma_bounds(sigma):
    return OracleBounds(len(NAMES) + 1, 3, max(2 * len(sigma) + 2, 1))


def _check_well_formedness_characterisation(sigma):
    symbolic = isinstance(check_formula(well_formed(sigma)), Sat)
    concrete = satisfiable_within(sigma, _sigma_bounds(sigma)) is not None
    assert symbolic == concrete, sigma


def test_well_formedness_decides_satisfiability():
    checked = 0
    for (sigma,) in spatial_families(4, 4):
        _check_well_formedness_characterisation(sigma)
        checked += 1
    assert checked > 1000


def test_families_are_canonical_up_to_renaming():
    assert len(list(spatial_families(2, 1))) == 5
    assert len(list(entailment_family(1, 1))) == 9
    sides = [tuple(str(c) for c in pair) for pair in spatial_families(2, 2, sides=2)]
    assert len(sides) == len(set(sides))


def test_match_step_bound():
    rng = random.Random(10000)
    calls = 0
    while calls < 10000:
        sigma = _random_conj(rng, rng.randint(0, 4))
        sigma_p = _random_conj(rng, rng.randint(0, 4))
        s = _random_stack(rng)
        if not eval_pure(s, well_formed(sigma)):
            continue
        outcome = match_fn(s, sigma, sigma, sigma_p)
        assert outcome.calls <= len(sigma) + len(sigma_p) + 1
        assert len(outcome.trace) == outcome.calls
        calls += 1


def _guard_dichotomy(rng, names):
    sigma = _random_conj(rng, rng.randint(1, 3), names)
    sigma_p = _random_conj(rng, rng.randint(1, 3), names)
    s = _random_stack(rng, names)
    if not eval_pure(s, well_formed(sigma)):
        return
    guard = match_fn(s, sigma, sigma, sigma_p).guard
    e = Entailment(TRUE, sigma, TRUE, sigma_p)
    bounds = OracleBounds(len(names) + 1, 3, 2 * (len(sigma) + len(sigma_p)) + 2)
    if eval_pure(s, guard):
        for other in enumerate_stacks(e, bounds):
            if not eval_pure(other, guard):
                continue
            for h in enumerate_heaps(other, sigma, bounds):
                assert satisfies(other, h, sigma_p), (sigma, sigma_p, other, h)
    else:
        assert any(not satisfies(s, h, sigma_p) for h in enumerate_heaps(s, sigma, bounds)), \
            (sigma, sigma_p, s)


def test_guard_certifies_or_refutes():
    rng = random.Random(7)
    for _ in range(150):
        _guard_dichotomy(rng, NAMES[:3])


def test_matching_step_is_sound():
    rng = random.Random(21)
    checked = 0
    for _ in range(3000):
        step = _random_atom(rng, emp=False)
        step_p = type(_random_atom(rng, emp=False))(step.src, rng.choice(NAMES))
        rest = _random_conj(rng, rng.randint(0, 2))
        other = _random_conj(rng, rng.randint(0, 1))
        sigma_i = SpatialConj((step,) + rest.atoms)
        s = _random_stack(rng)
        if not eval_pure(s, well_formed(sigma_i)) or not eval_pure(s, match_guard(sigma_i, step, step_p)):
            continue
        replaced = conj_union(other, SpatialConj((step,)), unfold_update(step, step_p))
        original = other.add(step_p)
        for h in enumerate_heaps(s, sigma_i, _sigma_bounds(sigma_i)):
            if satisfies(s, h, replaced):
                assert satisfies(s, h, original), (sigma_i, step, step_p, s, h)
                checked += 1
    assert checked > 0


def test_prove_agrees_with_oracle():
    assert fuzz(200, seed=3) == []


def test_prove_agrees_with_oracle_around_nil():
    rng = random.Random(17)
    cases = [random_entailment(rng, pure_atoms=2, nil_rate=0.4) for _ in range(150)]
    assert disagreements(cases) == []


def test_prove_agrees_with_oracle_on_two_variable_family():
    assert disagreements(entailment_family(2, 2)) == []


@pytest.mark.slow
def test_prove_agrees_with_oracle_on_three_variable_family():
    assert disagreements(entailment_family(3, 2)) == []


@pytest.mark.slow
def test_prove_agrees_with_oracle_extended():
    assert fuzz(1000, seed=11) == []


@requires_z3
@pytest.mark.smtlib
def test_external_backend_gives_same_verdicts():
    rng = random.Random(100)
    for _ in range(100):
        e = random_entailment(rng)
        internal = prove(e, 'internal', counterexample=False).valid
        external = prove(e, Z3_BACKEND, counterexample=False).valid
        assert internal == external
