import itertools
import random

import pytest

from formulas import (FALSE, TRUE, Add, And, Implies, IntLit, Not, Or, Rel, Stack, Sub, Var, eq,
                      eval_pure, neq)
from internal_solver import (DiffAtom, EqAtom, InternalSolver, UnionFind, UnsupportedFragmentError,
                             bellman_ford, encode_relation, minimal_conflict, solve_theory, to_nnf)

x, y, z, w = Var('x'), Var('y'), Var('z'), Var('w')


def _solve(*formulas, names=('x', 'y', 'z', 'w')):
    solver = InternalSolver()
    for n in names:
        solver.declare(n)
    for f in formulas:
        solver.add_formula(f)
    return solver.solve()


def test_encode_relation_canonical_forms():
    assert encode_relation(eq(x, y)) == (EqAtom('x', 'y', 0), True)
    assert encode_relation(eq(y, x)) == (EqAtom('x', 'y', 0), True)
    assert encode_relation(neq(x, y)) == (EqAtom('x', 'y', 0), False)
    assert encode_relation(Rel('<', x, y)) == (DiffAtom('x', 'y', -1), True)
    # y - x <= -1 is the complement of x - y <= 0
    assert encode_relation(Rel('>', x, y)) == (DiffAtom('x', 'y', 0), False)
    assert encode_relation(Rel('<=', x, IntLit(3))) == (DiffAtom('', 'x', -4), False)


def test_ground_relations_fold():
    assert encode_relation(eq(x, x)) is True
    assert encode_relation(Rel('<', IntLit(1), IntLit(0))) is False
    assert encode_relation(Rel('<=', Add(x, IntLit(1)), Add(x, IntLit(2)))) is True


def test_outside_difference_logic():
    with pytest.raises(UnsupportedFragmentError):
        encode_relation(eq(Add(x, y), z))
    with pytest.raises(UnsupportedFragmentError):
        encode_relation(Rel('<', Add(x, x), y))


def test_nnf_pushes_negation_to_relations():
    f = to_nnf(Not(And((eq(x, y), Implies(Rel('<', x, z), FALSE)))))
    assert f == Or((neq(x, y), And((Rel('<', x, z), TRUE))))


def test_union_find():
    uf = UnionFind()
    assert uf.union('a', 'b')
    assert uf.union('c', 'b')
    assert not uf.union('a', 'c')
    assert uf.find('a') == uf.find('c')
    assert uf.find('d') == 'd'


def test_bellman_ford_negative_cycle():
    assert bellman_ford([('x', 'y', -1), ('y', 'x', -1)]) is None
    d = bellman_ford([('x', 'y', -1), ('y', 'z', 2)])
    assert d['x'] <= d['y'] - 1 and d['y'] <= d['z'] + 2


def test_solve_theory_model_completion():
    values = solve_theory([(EqAtom('x', 'y', 0), True)], order=['x', 'y', 'z', 'w'])
    assert values['x'] == values['y']
    assert len({values['x'], values['z'], values['w']}) == 3
    assert values == {'x': 0, 'y': 0, 'z': 1, 'w': 2}


def test_solve_theory_splits_disequalities():
    lits = [(DiffAtom('x', 'y', 0), True), (DiffAtom('x', 'y', -1), False), (EqAtom('x', 'y', 0), False)]
    # x - y <= 0, x - y >= 0, x != y
    assert solve_theory(lits) is None
    lits = [(DiffAtom('x', 'y', 1), True), (DiffAtom('x', 'y', -2), False), (EqAtom('x', 'y', 0), False)]
    values = solve_theory(lits)
    assert values['x'] - values['y'] in (-1, 1)


def test_minimal_conflict():
    lits = [(EqAtom('x', 'y', 0), True), (EqAtom('z', 'w', 0), True),
            (EqAtom('y', 'z', 0), True), (EqAtom('x', 'z', 0), False)]
    core = minimal_conflict(lits)
    assert len(core) == 3
    assert (EqAtom('z', 'w', 0), True) not in core


def test_unsat_equalities():
    assert _solve(eq(x, y), neq(x, y)) is None
    assert _solve(eq(x, y), eq(y, z), neq(x, z)) is None


def test_order_antisymmetry():
    assert _solve(Rel('<', x, y), Rel('<', y, x)) is None
    model = _solve(Rel('<', x, y))
    assert model['x'] < model['y']


def test_literals_pin_values():
    model = _solve(eq(x, IntLit(5)), Rel('>', y, Add(x, IntLit(1))), neq(z, IntLit(0)))
    assert model['x'] == 5 and model['y'] > 6 and model['z'] != 0


def test_disjunction_forces_search():
    model = _solve(Or((eq(x, y), eq(x, z))), neq(x, y), Implies(eq(x, z), eq(z, w)))
    assert model['x'] == model['z'] == model['w'] != model['y']


def test_incremental_lemmas_survive():
    solver = InternalSolver()
    for n in 'xyz':
        solver.declare(n)
    solver.add_formula(Or((eq(x, y), eq(y, z))))
    assert solver.solve() is not None
    solver.add_formula(neq(x, y))
    solver.add_formula(neq(y, z))
    assert solver.solve() is None
    assert solver.solve() is None


def test_unconstrained_variables_are_distinct():
    model = _solve(TRUE)
    assert sorted(model.values()) == [0, 1, 2, 3]


def _random_formula(rng, names, depth):
    if depth == 0 or rng.random() < 0.3:
        left, right = Var(rng.choice(names)), Var(rng.choice(names))
        if rng.random() < 0.2:
            right = Sub(right, IntLit(rng.randint(-2, 2)))
        return Rel(rng.choice(('=', '!=', '<', '<=', '>', '>=')), left, right)
    kind = rng.choice((And, Or, Not, Implies))
    if kind is Not:
        return Not(_random_formula(rng, names, depth - 1))
    if kind is Implies:
        return Implies(_random_formula(rng, names, depth - 1), _random_formula(rng, names, depth - 1))
    return kind(tuple(_random_formula(rng, names, depth - 1) for _ in range(rng.randint(1, 3))))


def _brute_force_sat(formulas, names, lo=-3, hi=6):
    for values in itertools.product(range(lo, hi), repeat=len(names)):
        s = Stack(dict(zip(names, values)))
        if all(eval_pure(s, f) for f in formulas):
            return True
    return False


def test_models_satisfy_random_assertions():
    names = ['x', 'y', 'z']
    for seed in range(150):
        rng = random.Random(seed)
        formulas = [_random_formula(rng, names, 3) for _ in range(rng.randint(1, 3))]
        model = _solve(*formulas, names=names)
        if model is not None:
            s = Stack(model)
            assert all(eval_pure(s, f) for f in formulas), seed
        else:
            assert not _brute_force_sat(formulas, names), seed
