"""
Formula core for the list-segment prover
Terms, pure formulas, spatial atoms, entailments, stacks and heaps
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from types import MappingProxyType
from typing import Dict, Iterable, Iterator, List, Mapping, Tuple, Union

logger = logging.getLogger(__name__)

NIL_NAME = 'nil'
REL_OPS = ('=', '!=', '<', '<=', '>', '>=')


class FormulaError(Exception):
    pass


class UnboundVariableError(FormulaError):
    def __init__(self, name: str):
        super().__init__(f"variable '{name}' is not bound in the stack")
        self.name = name


class AtomNotPresentError(FormulaError):
    pass


# ---------------------------------------------------------------- terms

@dataclass(frozen=True)
class Var:
    name: str

    def __post_init__(self):
        if self.name == NIL_NAME:
            raise FormulaError("'nil' is the literal 0, not a variable")


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class Add:
    left: 'Term'
    right: 'Term'


@dataclass(frozen=True)
class Sub:
    left: 'Term'
    right: 'Term'


Term = Union[Var, IntLit, Add, Sub]
NIL = IntLit(0)


def var(name: str) -> Term:
    """Surface-level variable constructor: `nil` becomes the literal 0."""
    return NIL if name == NIL_NAME else Var(name)


# -------------------------------------------------------- pure formulas

@dataclass(frozen=True)
class TrueFormula:
    pass


@dataclass(frozen=True)
class FalseFormula:
    pass


TRUE = TrueFormula()
FALSE = FalseFormula()


@dataclass(frozen=True)
class Rel:
    op: str
    left: Term
    right: Term

    def __post_init__(self):
        if self.op not in REL_OPS:
            raise FormulaError(f"unknown relation '{self.op}'")


@dataclass(frozen=True)
class And:
    items: Tuple['PureFormula', ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'items', tuple(self.items))


@dataclass(frozen=True)
class Or:
    items: Tuple['PureFormula', ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'items', tuple(self.items))


@dataclass(frozen=True)
class Not:
    item: 'PureFormula'


@dataclass(frozen=True)
class Implies:
    lhs: 'PureFormula'
    rhs: 'PureFormula'


PureFormula = Union[TrueFormula, FalseFormula, Rel, And, Or, Not, Implies]


def eq(a: Term, b: Term) -> Rel:
    return Rel('=', a, b)


def neq(a: Term, b: Term) -> Rel:
    return Rel('!=', a, b)


def conjoin(items: Iterable[PureFormula]) -> PureFormula:
    """And() that drops True conjuncts and collapses on False."""
    kept: List[PureFormula] = []
    for item in items:
        if isinstance(item, TrueFormula):
            continue
        if isinstance(item, FalseFormula):
            return FALSE
        kept.append(item)
    if not kept:
        return TRUE
    if len(kept) == 1:
        return kept[0]
    return And(tuple(kept))


def disjoin(items: Iterable[PureFormula]) -> PureFormula:
    kept: List[PureFormula] = []
    for item in items:
        if isinstance(item, FalseFormula):
            continue
        if isinstance(item, TrueFormula):
            return TRUE
        kept.append(item)
    if not kept:
        return FALSE
    if len(kept) == 1:
        return kept[0]
    return Or(tuple(kept))


def negate(item: PureFormula) -> PureFormula:
    if isinstance(item, TrueFormula):
        return FALSE
    if isinstance(item, FalseFormula):
        return TRUE
    return Not(item)


# -------------------------------------------------------- spatial atoms

@dataclass(frozen=True)
class Emp:
    pass


@dataclass(frozen=True)
class Next:
    src: Term
    dst: Term


@dataclass(frozen=True)
class Lseg:
    src: Term
    dst: Term


SpatialAtom = Union[Emp, Next, Lseg]
EMP = Emp()


@dataclass(frozen=True)
class SpatialConj:
    """Multiset of spatial atoms; the tuple keeps textual order for determinism."""
    atoms: Tuple[SpatialAtom, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'atoms', tuple(self.atoms))

    def __iter__(self) -> Iterator[SpatialAtom]:
        return iter(self.atoms)

    def __len__(self) -> int:
        return len(self.atoms)

    def __contains__(self, atom: object) -> bool:
        return atom in self.atoms

    def size(self) -> int:
        return len(self.atoms)

    def is_empty(self) -> bool:
        return not self.atoms

    def remove(self, atom: SpatialAtom) -> 'SpatialConj':
        return conj_remove(self, atom)

    def add(self, *atoms: SpatialAtom) -> 'SpatialConj':
        return SpatialConj(self.atoms + tuple(atoms))

    def same_multiset(self, other: 'SpatialConj') -> bool:
        return Counter(self.atoms) == Counter(other.atoms)

    def includes(self, other: 'SpatialConj') -> bool:
        """Multiset inclusion `other ⊆ self`."""
        mine = Counter(self.atoms)
        return all(mine[a] >= n for a, n in Counter(other.atoms).items())


def conj_remove(conj: SpatialConj, atom: SpatialAtom) -> SpatialConj:
    """Σ \\ S: drop exactly one occurrence (the leftmost) of `atom`."""
    for i, candidate in enumerate(conj.atoms):
        if candidate == atom:
            return SpatialConj(conj.atoms[:i] + conj.atoms[i + 1:])
    raise AtomNotPresentError(f"{atom} does not occur in the spatial conjunction")


def conj_union(*conjs: SpatialConj) -> SpatialConj:
    atoms: Tuple[SpatialAtom, ...] = ()
    for c in conjs:
        atoms += c.atoms
    return SpatialConj(atoms)


# ----------------------------------------------------------- entailment

@dataclass(frozen=True)
class Entailment:
    ante_pure: PureFormula
    ante_spatial: SpatialConj
    cons_pure: PureFormula
    cons_spatial: SpatialConj


# ---------------------------------------------------------- stack, heap

class Stack:
    """Total finite map variable -> integer. Immutable."""

    __slots__ = ('_bindings',)

    def __init__(self, bindings: Mapping[str, int] = None):
        object.__setattr__(self, '_bindings', MappingProxyType(dict(bindings or {})))

    def __setattr__(self, key, value):
        raise AttributeError("Stack is immutable")

    @property
    def bindings(self) -> Mapping[str, int]:
        return self._bindings

    def __getitem__(self, name: str) -> int:
        try:
            return self._bindings[name]
        except KeyError:
            raise UnboundVariableError(name) from None

    def __contains__(self, name: object) -> bool:
        return name in self._bindings

    def __iter__(self) -> Iterator[str]:
        return iter(self._bindings)

    def __len__(self) -> int:
        return len(self._bindings)

    def items(self):
        return self._bindings.items()

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Stack) and dict(self._bindings) == dict(other._bindings)

    def __hash__(self) -> int:
        return hash(frozenset(self._bindings.items()))

    def __repr__(self) -> str:
        return f"Stack({dict(self._bindings)})"


class Heap:
    """Finite partial map location -> value. Immutable."""

    __slots__ = ('_cells',)

    def __init__(self, cells: Mapping[int, int] = None):
        object.__setattr__(self, '_cells', MappingProxyType(dict(cells or {})))

    def __setattr__(self, key, value):
        raise AttributeError("Heap is immutable")

    @property
    def cells(self) -> Mapping[int, int]:
        return self._cells

    def domain(self) -> frozenset:
        return frozenset(self._cells)

    def get(self, loc: int, default=None):
        return self._cells.get(loc, default)

    def __getitem__(self, loc: int) -> int:
        return self._cells[loc]

    def __contains__(self, loc: object) -> bool:
        return loc in self._cells

    def __len__(self) -> int:
        return len(self._cells)

    def items(self):
        return self._cells.items()

    def disjoint_union(self, other: 'Heap') -> 'Heap':
        """h1 ∗ h2; undefined (error) when the domains overlap."""
        overlap = self.domain() & other.domain()
        if overlap:
            raise FormulaError(f"heaps overlap at {sorted(overlap)}")
        merged: Dict[int, int] = dict(self._cells)
        merged.update(other._cells)
        return Heap(merged)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Heap) and dict(self._cells) == dict(other._cells)

    def __hash__(self) -> int:
        return hash(frozenset(self._cells.items()))

    def __repr__(self) -> str:
        return f"Heap({dict(sorted(self._cells.items()))})"


EMPTY_HEAP = Heap()


# ----------------------------------------------------------- evaluation

def eval_term(s: Stack, t: Term) -> int:
    if isinstance(t, Var):
        return s[t.name]
    if isinstance(t, IntLit):
        return t.value
    if isinstance(t, Add):
        return eval_term(s, t.left) + eval_term(s, t.right)
    if isinstance(t, Sub):
        return eval_term(s, t.left) - eval_term(s, t.right)
    raise FormulaError(f"not a term: {t!r}")


_REL_EVAL = {
    '=': lambda a, b: a == b,
    '!=': lambda a, b: a != b,
    '<': lambda a, b: a < b,
    '<=': lambda a, b: a <= b,
    '>': lambda a, b: a > b,
    '>=': lambda a, b: a >= b,
}


def eval_pure(s: Stack, f: PureFormula) -> bool:
    """s ⊨ F for pure F."""
    if isinstance(f, TrueFormula):
        return True
    if isinstance(f, FalseFormula):
        return False
    if isinstance(f, Rel):
        return _REL_EVAL[f.op](eval_term(s, f.left), eval_term(s, f.right))
    if isinstance(f, And):
        return all(eval_pure(s, item) for item in f.items)
    if isinstance(f, Or):
        return any(eval_pure(s, item) for item in f.items)
    if isinstance(f, Not):
        return not eval_pure(s, f.item)
    if isinstance(f, Implies):
        return (not eval_pure(s, f.lhs)) or eval_pure(s, f.rhs)
    raise FormulaError(f"not a pure formula: {f!r}")


# ------------------------------------------------------- free variables

def _add_unique(out: List[str], seen: set, names: Iterable[str]):
    for name in names:
        if name not in seen:
            seen.add(name)
            out.append(name)


def term_vars(t: Term) -> List[str]:
    if isinstance(t, Var):
        return [t.name]
    if isinstance(t, IntLit):
        return []
    out: List[str] = []
    seen: set = set()
    _add_unique(out, seen, term_vars(t.left))
    _add_unique(out, seen, term_vars(t.right))
    return out


def pure_vars(f: PureFormula) -> List[str]:
    out: List[str] = []
    seen: set = set()
    if isinstance(f, Rel):
        _add_unique(out, seen, term_vars(f.left))
        _add_unique(out, seen, term_vars(f.right))
    elif isinstance(f, (And, Or)):
        for item in f.items:
            _add_unique(out, seen, pure_vars(item))
    elif isinstance(f, Not):
        _add_unique(out, seen, pure_vars(f.item))
    elif isinstance(f, Implies):
        _add_unique(out, seen, pure_vars(f.lhs))
        _add_unique(out, seen, pure_vars(f.rhs))
    return out


def atom_vars(atom: SpatialAtom) -> List[str]:
    if isinstance(atom, Emp):
        return []
    out: List[str] = []
    seen: set = set()
    _add_unique(out, seen, term_vars(atom.src))
    _add_unique(out, seen, term_vars(atom.dst))
    return out


def conj_vars(conj: SpatialConj) -> List[str]:
    out: List[str] = []
    seen: set = set()
    for atom in conj:
        _add_unique(out, seen, atom_vars(atom))
    return out


def free_vars(e: Entailment) -> List[str]:
    """Variables of all four parts, in order of first occurrence."""
    out: List[str] = []
    seen: set = set()
    _add_unique(out, seen, pure_vars(e.ante_pure))
    _add_unique(out, seen, conj_vars(e.ante_spatial))
    _add_unique(out, seen, pure_vars(e.cons_pure))
    _add_unique(out, seen, conj_vars(e.cons_spatial))
    return out


# ------------------------------------------------------------- renaming

def rename_term(t: Term, mapping: Mapping[str, str]) -> Term:
    if isinstance(t, Var):
        return Var(mapping.get(t.name, t.name))
    if isinstance(t, IntLit):
        return t
    return type(t)(rename_term(t.left, mapping), rename_term(t.right, mapping))


def rename_pure(f: PureFormula, mapping: Mapping[str, str]) -> PureFormula:
    if isinstance(f, Rel):
        return Rel(f.op, rename_term(f.left, mapping), rename_term(f.right, mapping))
    if isinstance(f, And):
        return And(tuple(rename_pure(i, mapping) for i in f.items))
    if isinstance(f, Or):
        return Or(tuple(rename_pure(i, mapping) for i in f.items))
    if isinstance(f, Not):
        return Not(rename_pure(f.item, mapping))
    if isinstance(f, Implies):
        return Implies(rename_pure(f.lhs, mapping), rename_pure(f.rhs, mapping))
    return f


def rename_atom(atom: SpatialAtom, mapping: Mapping[str, str]) -> SpatialAtom:
    if isinstance(atom, Emp):
        return atom
    return type(atom)(rename_term(atom.src, mapping), rename_term(atom.dst, mapping))


def rename_conj(conj: SpatialConj, mapping: Mapping[str, str]) -> SpatialConj:
    return SpatialConj(tuple(rename_atom(a, mapping) for a in conj))


def rename_entailment(e: Entailment, mapping: Mapping[str, str]) -> Entailment:
    return Entailment(
        rename_pure(e.ante_pure, mapping),
        rename_conj(e.ante_spatial, mapping),
        rename_pure(e.cons_pure, mapping),
        rename_conj(e.cons_spatial, mapping),
    )
