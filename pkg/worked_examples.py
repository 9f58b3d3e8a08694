"""
Worked examples checked by `run_prover.py selftest`, plus the random and
exhaustive entailment generators used to compare `prove` with the oracle.
"""

import itertools
import logging
import random
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, List, Tuple

from entailment_engine import (alloc, collide, extract_counterexample, match_fn, prove,
                               unfold_update, well_formed)
from entailment_parser import format_entailment, parse_entailment
from formulas import (EMP, NIL, TRUE, Entailment, Heap, Lseg, Next, Rel, SpatialConj, Stack, Var,
                      conjoin, disjoin, eq, negate, neq)
from semantics_oracle import construct_heap, oracle_decide, satisfies
from theory_backend import is_equivalent

logger = logging.getLogger(__name__)

SEC2 = 'c < e : lseg(a,b) * lseg(a,c) * next(c,d) * lseg(d,e) |- lseg(b,c) * lseg(c,e)'
x, y, z, w = Var('x'), Var('y'), Var('z'), Var('w')
SIGMA_XZW = SpatialConj((Next(x, y), Lseg(x, z), Next(w, z)))


@dataclass(frozen=True)
class WorkedExample:
    name: str
    check: Callable[[object], bool]  # backend -> passed


def _sec2_valid(backend) -> bool:
    return prove(parse_entailment(SEC2), backend).valid


def _sec2_first_guard(backend) -> bool:
    e = parse_entailment(SEC2)
    s = Stack({'a': 0, 'b': 0, 'c': 0, 'd': 1, 'e': 1})
    outcome = match_fn(s, e.ante_spatial, e.ante_spatial, e.cons_spatial)
    return outcome.guard.items[0] == eq(Var('a'), Var('b'))


def _collide_next_lseg(backend) -> bool:
    return is_equivalent(collide(Next(x, y), Lseg(x, z)), neq(x, z), backend)


def _collide_next_next(backend) -> bool:
    return is_equivalent(collide(Next(x, y), Next(w, z)), eq(x, w), backend)


def _well_formed_xzw(backend) -> bool:
    return is_equivalent(well_formed(SIGMA_XZW), conjoin([eq(x, z), neq(x, w)]), backend)


def _alloc_xzw(backend) -> bool:
    return is_equivalent(alloc(SIGMA_XZW, z), disjoin([eq(z, x), eq(z, w)]), backend)


def _unfold_surplus(backend) -> bool:
    c, d, e = Var('c'), Var('d'), Var('e')
    return unfold_update(Next(c, d), Lseg(c, e)) == SpatialConj((Lseg(d, e),))


def _segment_semantics(backend) -> bool:
    return satisfies(Stack({'x': 1, 'y': 2}), Heap({1: 3, 3: 2}), Lseg(x, y))


def _constructed_heap(backend) -> bool:
    return construct_heap(Stack({'x': 1, 'y': 2}), SpatialConj((Next(x, y),))) == Heap({1: 2})


def _two_cell_counterexample(backend) -> bool:
    e = parse_entailment('lseg(a,b) |- next(a,b)')
    verdict = prove(e, backend)
    witness = extract_counterexample(Stack({'a': 0, 'b': 1}), e)
    return (not verdict.valid and verdict.witness is not None
            and witness is not None and witness.heap == Heap({0: 2, 2: 1}))


EXAMPLES: List[WorkedExample] = [
    WorkedExample('overview entailment is valid', _sec2_valid),
    WorkedExample('overview model generalises to a = b first', _sec2_first_guard),
    WorkedExample('collide next/lseg is x != z', _collide_next_lseg),
    WorkedExample('collide next/next is x = w', _collide_next_next),
    WorkedExample('well-formedness is x = z & x != w', _well_formed_xzw),
    WorkedExample('alloc of z is z = x | z = w', _alloc_xzw),
    WorkedExample('next against lseg leaves lseg(d,e)', _unfold_surplus),
    WorkedExample('{1->3, 3->2} is a segment from 1 to 2', _segment_semantics),
    WorkedExample('constructed heap of next(x,y) is {1->2}', _constructed_heap),
    WorkedExample('lseg(a,b) |- next(a,b) has a two-cell counterexample', _two_cell_counterexample),
]


def run_examples(backend=None) -> List[Tuple[str, bool]]:
    results = []
    for example in EXAMPLES:
        try:
            passed = bool(example.check(backend))
        except Exception as e:
            logger.error(f"{example.name}: {e}")
            passed = False
        results.append((example.name, passed))
    return results


# ---------------------------------------------------------------- fuzzing

RELATIONS = ('=', '=', '<', '<=')
SHAPES = {'next': Next, 'lseg': Lseg}


def random_entailment(rng: random.Random, n_vars: int = 3, max_atoms: int = 3, pure_atoms: int = 1,
                      nil_rate: float = 0.15):
    """Small random entailment over variables v0..v{n-1} and nil, within the oracle fragment."""
    names = [Var(f"v{i}") for i in range(n_vars)]

    def term():
        return NIL if rng.random() < nil_rate else rng.choice(names)

    def atom():
        cls = rng.choice((Next, Lseg, Lseg))
        return cls(rng.choice(names), term())

    def pure():
        parts = []
        for _ in range(rng.randint(0, pure_atoms)):
            rel = Rel(rng.choice(RELATIONS), term(), term())
            parts.append(rel if rng.random() < 0.5 else negate(rel))
        return conjoin(parts) if parts else TRUE

    left = SpatialConj(tuple(atom() for _ in range(rng.randint(0, max_atoms)))) or SpatialConj((EMP,))
    right = SpatialConj(tuple(atom() for _ in range(rng.randint(0, max_atoms)))) or SpatialConj((EMP,))
    return Entailment(pure(), left, pure(), right)


def _renamed(side, perm) -> Tuple:
    return tuple(sorted(shape if shape[0] == 'emp' else (shape[0], perm[shape[1]], perm[shape[2]])
                        for shape in side))


def spatial_families(n_vars: int, max_atoms: int, sides: int = 1) -> Iterator[Tuple[SpatialConj, ...]]:
    """Every tuple of `sides` spatial conjunctions of 1..max_atoms atoms over v0..v{n-1},
    one representative per class of variable renamings."""
    names = [Var(f"v{i}") for i in range(n_vars)]
    shapes = [('emp', -1, -1)] + [(kind, i, j) for kind in sorted(SHAPES)
                                  for i, j in itertools.product(range(n_vars), repeat=2)]
    multisets = [combo for size in range(1, max_atoms + 1)
                 for combo in itertools.combinations_with_replacement(shapes, size)]
    perms = list(itertools.permutations(range(n_vars)))
    for group in itertools.product(multisets, repeat=sides):
        key = tuple(_renamed(side, perms[0]) for side in group)
        if any(tuple(_renamed(side, p) for side in group) < key for p in perms[1:]):
            continue
        yield tuple(SpatialConj(tuple(EMP if kind == 'emp' else SHAPES[kind](names[i], names[j])
                                      for kind, i, j in side))
                    for side in group)


def entailment_family(n_vars: int, max_atoms: int) -> Iterator[Entailment]:
    for left, right in spatial_families(n_vars, max_atoms, sides=2):
        yield Entailment(TRUE, left, TRUE, right)


def disagreements(entailments: Iterable[Entailment], backend=None) -> List[Tuple[str, bool, bool]]:
    """Entailments where prove and the bounded oracle disagree."""
    out = []
    for e in entailments:
        proved = prove(e, backend, counterexample=False).valid
        expected = oracle_decide(e).valid
        if proved != expected:
            out.append((format_entailment(e), proved, expected))
    return out


def fuzz(count: int, seed: int, backend=None) -> List[Tuple[str, bool, bool]]:
    rng = random.Random(seed)
    return disagreements((random_entailment(rng) for _ in range(count)), backend)
