"""
Internal desk-scale satisfiability solver for pure formulas.

Boolean skeleton search (DPLL with occurrence-list unit propagation) over a
Tseitin encoding, with a theory check that merges zero-offset equalities in
a union-find, detects negative cycles among difference constraints
(x - y <= c) with Bellman-Ford, and splits violated disequalities into two
strict order constraints. Theory conflicts are shrunk to a minimal literal
set and kept as lemma clauses.

Fragment: every relation must normalise to `x - y op c`, `x op c` or a
ground comparison, i.e. difference logic over the integers.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from formulas import (Add, And, FalseFormula, Implies, IntLit, Not, Or, PureFormula, Rel,
                      Sub, Term, TrueFormula, Var)

logger = logging.getLogger(__name__)

ZERO = ''  # pseudo-variable pinned to the value 0

NEGATED_OP = {'=': '!=', '!=': '=', '<': '>=', '>=': '<', '<=': '>', '>': '<='}


class SolverError(Exception):
    pass


class UnsupportedFragmentError(SolverError):
    pass


@dataclass(frozen=True)
class DiffAtom:
    """x - y <= bound"""
    x: str
    y: str
    bound: int


@dataclass(frozen=True)
class EqAtom:
    """x - y == offset"""
    x: str
    y: str
    offset: int


TheoryAtom = Union[DiffAtom, EqAtom]
TheoryLiteral = Tuple[TheoryAtom, bool]
Edge = Tuple[str, str, int]  # (x, y, c): x - y <= c


# ------------------------------------------------------------ normalising

def linearize(t: Term) -> Tuple[Dict[str, int], int]:
    if isinstance(t, Var):
        return {t.name: 1}, 0
    if isinstance(t, IntLit):
        return {}, t.value
    if isinstance(t, (Add, Sub)):
        sign = 1 if isinstance(t, Add) else -1
        lc, lk = linearize(t.left)
        rc, rk = linearize(t.right)
        coeffs = dict(lc)
        for name, c in rc.items():
            coeffs[name] = coeffs.get(name, 0) + sign * c
        return coeffs, lk + sign * rk
    raise UnsupportedFragmentError(f"not a term: {t!r}")


def _eq_atom(a: str, b: str, c: int) -> TheoryLiteral:
    if a > b:
        return EqAtom(b, a, -c), True
    return EqAtom(a, b, c), True


def _le_atom(a: str, b: str, c: int) -> TheoryLiteral:
    # a - b <= c, or its complement b - a <= -c - 1 negated
    if a < b:
        return DiffAtom(a, b, c), True
    return DiffAtom(b, a, -c - 1), False


_GROUND = {
    '=': lambda k: k == 0, '!=': lambda k: k != 0, '<': lambda k: k < 0,
    '<=': lambda k: k <= 0, '>': lambda k: k > 0, '>=': lambda k: k >= 0,
}


def encode_relation(rel: Rel) -> Union[bool, TheoryLiteral]:
    """Map `left op right` to a canonical theory literal, or a constant."""
    coeffs, const = linearize(Sub(rel.left, rel.right))
    coeffs = {name: c for name, c in coeffs.items() if c}
    if not coeffs:
        return _GROUND[rel.op](const)
    pos = [name for name, c in coeffs.items() if c == 1]
    neg = [name for name, c in coeffs.items() if c == -1]
    if len(pos) + len(neg) != len(coeffs) or len(pos) > 1 or len(neg) > 1:
        raise UnsupportedFragmentError(
            f"relation outside difference logic: {coeffs} {rel.op} {-const}")
    p = pos[0] if pos else ZERO
    n = neg[0] if neg else ZERO
    # rel is  p - n + const  op  0
    if rel.op == '=':
        return _eq_atom(p, n, -const)
    if rel.op == '!=':
        atom, _ = _eq_atom(p, n, -const)
        return atom, False
    if rel.op == '<=':
        return _le_atom(p, n, -const)
    if rel.op == '<':
        return _le_atom(p, n, -const - 1)
    if rel.op == '>=':
        return _le_atom(n, p, const)
    return _le_atom(n, p, const - 1)


def to_nnf(f: PureFormula, positive: bool = True) -> PureFormula:
    if isinstance(f, TrueFormula):
        return f if positive else FalseFormula()
    if isinstance(f, FalseFormula):
        return f if positive else TrueFormula()
    if isinstance(f, Rel):
        return f if positive else Rel(NEGATED_OP[f.op], f.left, f.right)
    if isinstance(f, Not):
        return to_nnf(f.item, not positive)
    if isinstance(f, Implies):
        return to_nnf(Or((Not(f.lhs), f.rhs)), positive)
    items = tuple(to_nnf(i, positive) for i in f.items)
    if isinstance(f, And):
        return And(items) if positive else Or(items)
    if isinstance(f, Or):
        return Or(items) if positive else And(items)
    raise SolverError(f"not a pure formula: {f!r}")


# --------------------------------------------------------------- theory

class UnionFind:
    def __init__(self) -> None:
        self.p: Dict[str, str] = {}
        self.r: Dict[str, int] = {}

    def find(self, x: str) -> str:
        p = self.p
        if x not in p:
            p[x] = x
            self.r[x] = 0
            return x
        # path halving
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a: str, b: str) -> bool:
        pa, pb = self.find(a), self.find(b)
        if pa == pb:
            return False
        ra, rb = self.r[pa], self.r[pb]
        if ra < rb:
            self.p[pa] = pb
        elif rb < ra:
            self.p[pb] = pa
        else:
            self.p[pb] = pa
            self.r[pa] = ra + 1
        return True


def bellman_ford(edges: Sequence[Edge]) -> Optional[Dict[str, int]]:
    """Potentials d with d[x] <= d[y] + c for every edge; None on a negative cycle."""
    dist: Dict[str, int] = {}
    for x, y, _ in edges:
        dist[x] = 0
        dist[y] = 0
    for _ in range(len(dist) + 1):
        changed = False
        for x, y, c in edges:
            if dist[y] + c < dist[x]:
                dist[x] = dist[y] + c
                changed = True
        if not changed:
            return dist
    return None


def solve_theory(literals: Iterable[TheoryLiteral],
                 order: Sequence[str] = ()) -> Optional[Dict[str, int]]:
    """Integer values satisfying every literal, or None when inconsistent.

    Classes not touched by any order constraint get distinct small
    non-negative values, ascending by their first variable in `order`.
    """
    uf = UnionFind()
    for name in order:
        uf.find(name)
    edges: List[Edge] = []
    diseqs: List[Edge] = []
    for atom, value in literals:
        uf.find(atom.x)
        uf.find(atom.y)
        if isinstance(atom, EqAtom):
            if not value:
                diseqs.append((atom.x, atom.y, atom.offset))
            elif atom.offset == 0:
                uf.union(atom.x, atom.y)
            else:
                edges.append((atom.x, atom.y, atom.offset))
                edges.append((atom.y, atom.x, -atom.offset))
        elif value:
            edges.append((atom.x, atom.y, atom.bound))
        else:
            edges.append((atom.y, atom.x, -atom.bound - 1))
    for x, y, c in diseqs:
        if c == 0 and uf.find(x) == uf.find(y):
            return None
    return _solve_split(uf, edges, diseqs, order)


def _solve_split(uf: UnionFind, edges: List[Edge], diseqs: List[Edge],
                 order: Sequence[str]) -> Optional[Dict[str, int]]:
    rep_edges = [(uf.find(x), uf.find(y), c) for x, y, c in edges]
    for x, y, c in rep_edges:
        if x == y and c < 0:
            return None
    potentials = bellman_ford([e for e in rep_edges if e[0] != e[1]])
    if potentials is None:
        return None
    values = _assign_values(uf, potentials, order)
    for i, (x, y, c) in enumerate(diseqs):
        if values[x] - values[y] != c:
            continue
        rest = diseqs[:i] + diseqs[i + 1:]
        below = _solve_split(uf, edges + [(x, y, c - 1)], rest, order)
        if below is not None:
            return below
        return _solve_split(uf, edges + [(y, x, -c - 1)], rest, order)
    values.pop(ZERO, None)
    return values


def _assign_values(uf: UnionFind, potentials: Dict[str, int],
                   order: Sequence[str]) -> Dict[str, int]:
    zero_rep = uf.find(ZERO) if ZERO in uf.p else None
    rep_val: Dict[str, int] = {}
    if potentials:
        if zero_rep is not None and zero_rep in potentials:
            shift = -potentials[zero_rep]
        elif zero_rep is not None:
            shift = 1 - min(potentials.values())
        else:
            shift = -min(potentials.values())
        rep_val = {r: p + shift for r, p in potentials.items()}
    if zero_rep is not None and zero_rep not in rep_val:
        rep_val[zero_rep] = 0
    used = set(rep_val.values())
    nxt = 0
    names = list(order) + sorted(n for n in uf.p if n not in set(order))
    for name in names:
        rep = uf.find(name)
        if rep not in rep_val:
            while nxt in used:
                nxt += 1
            rep_val[rep] = nxt
            used.add(nxt)
    return {name: rep_val[uf.find(name)] for name in uf.p}


def minimal_conflict(literals: Sequence[TheoryLiteral]) -> List[TheoryLiteral]:
    """Deletion-based shrinking of an inconsistent literal set."""
    core = list(literals)
    i = 0
    while i < len(core):
        trial = core[:i] + core[i + 1:]
        if solve_theory(trial) is None:
            core = trial
        else:
            i += 1
    return core


# ------------------------------------------------------------- skeleton

@dataclass
class _Level:
    trail_len: int
    lit: int
    flipped: bool = False


class InternalSolver:
    """Append-only DPLL(T) over Tseitin clauses.

    Clauses and learned theory lemmas persist across `solve` calls, which
    only ever see more assertions.
    """

    def __init__(self):
        self.variables: List[str] = []
        self.num_vars = 0
        self.clauses: List[List[int]] = []
        self.occurs: Dict[int, List[int]] = defaultdict(list)
        self.atom_var: Dict[TheoryAtom, int] = {}
        self.var_atom: Dict[int, TheoryAtom] = {}
        self.gates: Dict[Tuple, int] = {}
        self.inconsistent = False
        self.lemma_count = 0
        self.decisions = 0

    def declare(self, name: str):
        self.variables.append(name)

    # -- encoding

    def _new_var(self) -> int:
        self.num_vars += 1
        return self.num_vars

    def _atom_lit(self, atom: TheoryAtom, value: bool) -> int:
        v = self.atom_var.get(atom)
        if v is None:
            v = self._new_var()
            self.atom_var[atom] = v
            self.var_atom[v] = atom
        return v if value else -v

    def _add_clause(self, lits: Sequence[int]):
        clause = list(dict.fromkeys(lits))
        if any(-l in clause for l in clause):
            return
        if not clause:
            self.inconsistent = True
            return
        idx = len(self.clauses)
        self.clauses.append(clause)
        for l in clause:
            self.occurs[l].append(idx)
        return idx

    def _encode(self, f: PureFormula) -> Union[bool, int]:
        """Literal for an NNF formula; True/False when it folds to a constant."""
        if isinstance(f, TrueFormula):
            return True
        if isinstance(f, FalseFormula):
            return False
        if isinstance(f, Rel):
            enc = encode_relation(f)
            if isinstance(enc, bool):
                return enc
            return self._atom_lit(*enc)
        is_and = isinstance(f, And)
        lits = []
        for item in f.items:
            lit = self._encode(item)
            if lit is (not is_and):
                return lit
            if lit is is_and:
                continue
            lits.append(lit)
        lits = list(dict.fromkeys(lits))
        if not lits:
            return is_and
        if len(lits) == 1:
            return lits[0]
        key = ('and' if is_and else 'or', tuple(sorted(lits)))
        if key in self.gates:
            return self.gates[key]
        g = self._new_var()
        self.gates[key] = g
        if is_and:
            for l in lits:
                self._add_clause([-g, l])
            self._add_clause([g] + [-l for l in lits])
        else:
            self._add_clause([-g] + lits)
            for l in lits:
                self._add_clause([g, -l])
        return g

    def add_formula(self, f: PureFormula):
        f = to_nnf(f)
        conjuncts = f.items if isinstance(f, And) else (f,)
        for conj in conjuncts:
            if isinstance(conj, And):
                self.add_formula(conj)
                continue
            if isinstance(conj, Or):
                lits = []
                satisfied = False
                for item in conj.items:
                    lit = self._encode(item)
                    if lit is True:
                        satisfied = True
                        break
                    if lit is not False:
                        lits.append(lit)
                if not satisfied:
                    self._add_clause(lits)
                continue
            lit = self._encode(conj)
            if lit is False:
                self.inconsistent = True
            elif lit is not True:
                self._add_clause([lit])

    # -- search

    def solve(self) -> Optional[Dict[str, int]]:
        if self.inconsistent:
            return None
        assign: Dict[int, bool] = {}
        trail: List[int] = []
        levels: List[_Level] = []

        def value(lit: int) -> Optional[bool]:
            v = assign.get(abs(lit))
            if v is None:
                return None
            return v if lit > 0 else not v

        def enqueue(lit: int):
            assign[abs(lit)] = lit > 0
            trail.append(lit)

        def propagate(qhead: int, pending: List[int]) -> Tuple[int, bool]:
            while True:
                while pending:
                    clause = self.clauses[pending.pop()]
                    free = None
                    n_free = 0
                    for l in clause:
                        v = value(l)
                        if v is True:
                            break
                        if v is None:
                            n_free += 1
                            free = l
                    else:
                        if n_free == 0:
                            pending.clear()
                            return qhead, False
                        if n_free == 1:
                            enqueue(free)
                if qhead == len(trail):
                    return qhead, True
                lit = trail[qhead]
                qhead += 1
                pending.extend(self.occurs.get(-lit, ()))

        qhead = 0
        pending = list(range(len(self.clauses)))
        while True:
            qhead, ok = propagate(qhead, pending)
            lemma = None
            if ok:
                lits = [(self.var_atom[v], val) for v, val in assign.items() if v in self.var_atom]
                if solve_theory(lits, self.variables) is None:
                    ok = False
                    core = minimal_conflict(lits)
                    lemma = self._add_clause([-self._atom_lit(a, val) for a, val in core])
                    self.lemma_count += 1
                    logger.debug(f"theory lemma over {len(core)} literals")
            if not ok:
                while levels and levels[-1].flipped:
                    levels.pop()
                if not levels:
                    return None
                top = levels[-1]
                for lit in trail[top.trail_len:]:
                    del assign[abs(lit)]
                del trail[top.trail_len:]
                top.flipped = True
                enqueue(-top.lit)
                qhead = top.trail_len
                pending = [lemma] if lemma is not None else []
                continue
            var = self._pick(assign)
            if var is None:
                lits = [(self.var_atom[v], val) for v, val in assign.items() if v in self.var_atom]
                values = solve_theory(lits, self.variables)
                return {name: values[name] for name in self.variables}
            self.decisions += 1
            levels.append(_Level(len(trail), -var))
            enqueue(-var)

    def _pick(self, assign: Dict[int, bool]) -> Optional[int]:
        for v in self.var_atom:
            if v not in assign:
                return v
        for v in range(1, self.num_vars + 1):
            if v not in assign:
                return v
        return None
