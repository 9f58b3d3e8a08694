"""
Ground-truth semantics of stacks and heaps against formulas, and a bounded
enumeration oracle used to check the prover and to find counterexamples.

Lists are acyclic: lseg(x, y) holds on the empty heap when s(x) = s(y) and
otherwise on exactly one simple chain s(x) -> ... -> s(y) whose cells are
all of the heap. Every atom therefore owns a sub-heap that is fully
determined by the stack and the heap, which lets `satisfies` carve the heap
atom by atom instead of guessing splits.
"""

import bisect
import itertools
import logging
import time
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Set, Tuple, Union

from formulas import (TRUE, Add, And, Emp, Entailment, FalseFormula, Heap, Implies, IntLit, Lseg,
                      Next, Not, Or, PureFormula, Rel, SpatialAtom, SpatialConj, Stack, Sub,
                      Term, TrueFormula, eval_pure, eval_term, free_vars)
from spatial_conditions import nonempty_atoms
from verdicts import ProveStats, Verdict, Witness

logger = logging.getLogger(__name__)

EQUALITY_OPS = ('=', '!=')
PURE_TYPES = (TrueFormula, FalseFormula, Rel, And, Or, Not, Implies)


class OracleError(Exception):
    pass


class OracleFragmentError(OracleError):
    pass


class OracleBoundsError(OracleError):
    pass


class HeapConstructionError(OracleError):
    pass


@dataclass(frozen=True)
class OracleBounds:
    stack_domain_size: int
    extra_locations: int
    max_heap_cells: int

    def __post_init__(self):
        for name in ('stack_domain_size', 'extra_locations', 'max_heap_cells'):
            if getattr(self, name) <= 0:
                raise OracleBoundsError(f"{name} must be positive, got {getattr(self, name)}")


def default_bounds(e: Entailment) -> OracleBounds:
    return OracleBounds(
        stack_domain_size=len(free_vars(e)) + 1,
        extra_locations=3,
        max_heap_cells=2 * (len(e.ante_spatial) + len(e.cons_spatial)) + 2,
    )


# ------------------------------------------------------------ satisfaction

def _carve(s: Stack, h: Heap, atom: SpatialAtom, used: Set[int]) -> Optional[List[int]]:
    """Cells owned by `atom` in h, or None when it cannot hold."""
    if isinstance(atom, Emp):
        return []
    src, dst = eval_term(s, atom.src), eval_term(s, atom.dst)
    if isinstance(atom, Next):
        if src in used or src not in h or h[src] != dst:
            return None
        return [src]
    cells: List[int] = []
    seen: Set[int] = set()
    cur = src
    while cur != dst:
        if cur not in h or cur in seen or cur in used:
            return None
        seen.add(cur)
        cells.append(cur)
        cur = h[cur]
    return cells


def satisfies(s: Stack, h: Heap, f: Union[PureFormula, SpatialAtom, SpatialConj]) -> bool:
    """s, h |= f. Pure formulas ignore the heap."""
    if isinstance(f, PURE_TYPES):
        return eval_pure(s, f)
    atoms = (f,) if isinstance(f, (Emp, Next, Lseg)) else f.atoms
    used: Set[int] = set()
    for atom in atoms:
        cells = _carve(s, h, atom, used)
        if cells is None:
            return False
        used.update(cells)
    return len(used) == len(h)


def satisfies_side(s: Stack, h: Heap, pure: PureFormula, sigma: SpatialConj) -> bool:
    return eval_pure(s, pure) and satisfies(s, h, sigma)


def refutes(s: Stack, h: Heap, e: Entailment) -> bool:
    """(s, h) models the antecedent and not the consequent."""
    return (satisfies_side(s, h, e.ante_pure, e.ante_spatial)
            and not satisfies_side(s, h, e.cons_pure, e.cons_spatial))


def construct_heap(s: Stack, sigma: SpatialConj) -> Heap:
    """One cell s(x) -> s(y) per non-empty atom."""
    cells: Dict[int, int] = {}
    for atom in nonempty_atoms(sigma):
        src, dst = eval_term(s, atom.src), eval_term(s, atom.dst)
        if isinstance(atom, Lseg) and src == dst:
            continue
        if src in cells:
            raise HeapConstructionError(
                f"two non-empty atoms share address {src}; the stack is not well-formed")
        cells[src] = dst
    return Heap(cells)


# ----------------------------------------------------------- enumeration

def _check_term(t: Term):
    if isinstance(t, (Add, Sub)):
        raise OracleFragmentError(f"arithmetic term outside the oracle fragment: {t}")


def _pure_profile(f: PureFormula, found: Dict):
    if isinstance(f, Rel):
        _check_term(f.left)
        _check_term(f.right)
        if f.op not in EQUALITY_OPS:
            found['order'] = True
        for t in (f.left, f.right):
            if isinstance(t, IntLit):
                found['literals'].add(t.value)
    elif isinstance(f, (And, Or)):
        for item in f.items:
            _pure_profile(item, found)
    elif isinstance(f, Not):
        _pure_profile(f.item, found)
    elif isinstance(f, Implies):
        _pure_profile(f.lhs, found)
        _pure_profile(f.rhs, found)


def _profile(e: Entailment) -> Dict:
    found = {'order': False, 'literals': set()}
    _pure_profile(e.ante_pure, found)
    _pure_profile(e.cons_pure, found)
    for atom in nonempty_atoms(e.ante_spatial) + nonempty_atoms(e.cons_spatial):
        for t in (atom.src, atom.dst):
            _check_term(t)
            if isinstance(t, IntLit):
                found['literals'].add(t.value)
    return found


def _restricted_growth(n: int, limit: int) -> Iterator[Tuple[int, ...]]:
    """Set partitions of n elements into at most `limit` blocks."""
    def grow(prefix: List[int], blocks: int):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for b in range(min(blocks + 1, limit)):
            prefix.append(b)
            yield from grow(prefix, max(blocks, b + 1))
            prefix.pop()
    yield from grow([], 0)


def _squeeze(values: Tuple[int, ...], literals: List[int], ordered: bool) -> Tuple[int, ...]:
    """Values moved as close to the literals as the order pattern allows.

    Without order atoms only equalities with literals matter, so every other
    value goes just above the largest literal. With order atoms each value
    keeps its gap between consecutive literals and its rank inside it.
    """
    others = sorted(set(values) - set(literals))
    moved: Dict[int, int] = {}
    if not ordered:
        moved = {v: literals[-1] + 1 + i for i, v in enumerate(others)}
    else:
        gaps: Dict[int, List[int]] = {}
        for v in others:
            gaps.setdefault(bisect.bisect_left(literals, v), []).append(v)
        for gap, members in gaps.items():
            if gap == 0:
                moved.update({v: literals[0] - 1 - i for i, v in enumerate(reversed(members))})
            else:
                moved.update({v: literals[gap - 1] + 1 + i for i, v in enumerate(members)})
    return tuple(moved.get(v, v) for v in values)


def _literal_stacks(names: List[str], literals: List[int], ordered: bool,
                    width: int) -> List[Tuple[int, ...]]:
    domain: Set[int] = set(literals)
    for lit in literals if ordered else literals[-1:]:
        domain.update(range(lit + 1, lit + width + 1))
        if ordered:
            domain.update(range(lit - width, lit))
    found = [values for values in itertools.product(sorted(domain), repeat=len(names))
             if _squeeze(values, literals, ordered) == values]
    return sorted(found, key=lambda values: -len(set(values)))


def enumerate_stacks(e: Entailment, bounds: OracleBounds) -> Iterator[Stack]:
    """Canonical stacks over the variables of e, most distinct values first.

    Equality-only pure parts need one stack per set partition and order
    atoms one per weak ordering. With integer literals a stack is kept only
    when no value can move closer to the literals without changing which
    relations hold; values reach at most K-1 past a literal, which covers
    every pattern once K exceeds the number of variables.
    """
    names = free_vars(e)
    k = bounds.stack_domain_size
    profile = _profile(e)
    if not names:
        yield Stack()
        return
    if profile['literals']:
        literals = sorted(profile['literals'])
        for values in _literal_stacks(names, literals, profile['order'], k - 1):
            yield Stack(dict(zip(names, values)))
    elif profile['order']:
        for blocks in range(min(len(names), k), 0, -1):
            for values in itertools.product(range(blocks), repeat=len(names)):
                if len(set(values)) == blocks:
                    yield Stack(dict(zip(names, values)))
    else:
        partitions = sorted(_restricted_growth(len(names), k), key=lambda p: (-len(set(p)), p))
        for p in partitions:
            yield Stack(dict(zip(names, p)))


def _locations(s: Stack, sigma: SpatialConj, extra: int) -> Tuple[List[int], List[int]]:
    """Locations named by the stack or sigma, and `extra` fresh ones above them."""
    base = set(s.bindings.values())
    for atom in nonempty_atoms(sigma):
        base.add(eval_term(s, atom.src))
        base.add(eval_term(s, atom.dst))
    top = max(base, default=-1)
    return sorted(base), [top + 1 + i for i in range(extra)]


def enumerate_heaps(s: Stack, sigma: SpatialConj, bounds: OracleBounds) -> Iterator[Heap]:
    """Every heap over the bounded locations that satisfies sigma under s.

    Atoms are placed left to right; list segments try chains of increasing
    length through locations not yet allocated. Fresh locations are
    interchangeable, so they are only taken in ascending order.
    """
    atoms = nonempty_atoms(sigma)
    named, fresh = _locations(s, sigma, bounds.extra_locations)
    fresh_rank = {loc: i for i, loc in enumerate(fresh)}
    cells: Dict[int, int] = {}

    def usable(m: int, path: List[int]) -> bool:
        if m in cells or m in path:
            return False
        rank = fresh_rank.get(m)
        return not rank or fresh[rank - 1] in cells or fresh[rank - 1] in path

    def paths(length: int, avoid: Tuple[int, int], path: List[int]) -> Iterator[List[int]]:
        if len(path) == length:
            yield path
            return
        for m in named + fresh:
            if m not in avoid and usable(m, path):
                path.append(m)
                yield from paths(length, avoid, path)
                path.pop()

    def place(i: int) -> Iterator[Heap]:
        if i == len(atoms):
            yield Heap(cells)
            return
        atom = atoms[i]
        src, dst = eval_term(s, atom.src), eval_term(s, atom.dst)
        room = bounds.max_heap_cells - len(cells)
        if isinstance(atom, Next):
            if src in cells or room < 1:
                return
            cells[src] = dst
            yield from place(i + 1)
            del cells[src]
            return
        if src == dst:
            yield from place(i + 1)
            return
        if src in cells:
            return
        for length in range(0, room):
            for path in paths(length, (src, dst), []):
                chain = [src] + path
                for a, b in zip(chain, path + [dst]):
                    cells[a] = b
                yield from place(i + 1)
                for a in chain:
                    del cells[a]

    yield from place(0)


def oracle_decide(e: Entailment, bounds: OracleBounds = None) -> Verdict:
    """Bounded ground truth: Invalid with the first refuting (s, h), else Valid within bounds."""
    bounds = bounds or default_bounds(e)
    if bounds.max_heap_cells < len(e.ante_spatial):
        raise OracleBoundsError(
            f"max_heap_cells={bounds.max_heap_cells} is below the antecedent size {len(e.ante_spatial)}")
    start = time.perf_counter()
    stacks = heaps = 0
    verdict = Verdict(True)
    for s in enumerate_stacks(e, bounds):
        stacks += 1
        if not eval_pure(s, e.ante_pure):
            continue
        cons_pure = eval_pure(s, e.cons_pure)
        for h in enumerate_heaps(s, e.ante_spatial, bounds):
            heaps += 1
            if not cons_pure or not satisfies(s, h, e.cons_spatial):
                verdict = Verdict(False, Witness(s, h))
                break
        if not verdict.valid:
            break
    verdict.stats = ProveStats(loop_iterations=stacks,
                               wall_time_ms=(time.perf_counter() - start) * 1000)
    logger.info(f"oracle: {verdict.label} after {stacks} stacks, {heaps} heaps")
    return verdict


def satisfiable_within(sigma: SpatialConj, bounds: OracleBounds,
                       pure: PureFormula = TRUE) -> Optional[Witness]:
    """Some (s, h) |= pure /\\ sigma within bounds, or None."""
    probe = Entailment(pure, sigma, TRUE, SpatialConj())
    for s in enumerate_stacks(probe, bounds):
        if not eval_pure(s, pure):
            continue
        for h in enumerate_heaps(s, sigma, bounds):
            return Witness(s, h)
    return None
