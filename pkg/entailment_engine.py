"""
Model-driven entailment checking for list segments.

`prove` keeps a pure context Gamma, initially the antecedent's pure part plus
the well-formedness of its spatial part. Each model of Gamma is generalised
by `match_fn` into a pure formula U that either certifies the entailment on
every stack satisfying it, or is already false on the model, in which case
the entailment is invalid. Certified regions are blocked with the negation
of (Pi' /\\ U) and the loop asks for the next model.
"""

import itertools
import logging
import os
import time
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from formulas import (FALSE, TRUE, And, Entailment, Heap, Lseg, PureFormula, SpatialAtom,
                      SpatialConj, Stack, conj_vars, conjoin, eval_pure, eval_term, free_vars,
                      negate)
from semantics_oracle import (HeapConstructionError, construct_heap, default_bounds,
                              enumerate_heaps, refutes)
from spatial_conditions import (EmptyAtomError, EngineError, NoAddressError, addr, alloc, collide,
                                empty_cond, match_guard, unfold_check, unfold_step, unfold_update,
                                well_formed)
from theory_backend import SolverContext, Unsat
from verdicts import ProveStats, Round, Verdict, Witness

logger = logging.getLogger(__name__)

WITNESS_BUDGET = int(os.getenv('LSEG_WITNESS_BUDGET', 20000))
LOG_QUERIES = os.getenv('LSEG_LOG_QUERIES', '0') == '1'

__all__ = [
    'EngineError', 'NoAddressError', 'EmptyAtomError', 'MatchPreconditionError',
    'empty_cond', 'addr', 'collide', 'well_formed', 'alloc', 'unfold_update', 'unfold_step',
    'unfold_check', 'match_guard', 'MatchStep', 'MatchOutcome', 'match_fn', 'prove',
    'extract_counterexample',
]


class MatchPreconditionError(EngineError):
    pass


@dataclass(frozen=True)
class MatchStep:
    kind: str  # 'empty-left', 'empty-right', 'match' or 'base'
    atoms: Tuple[SpatialAtom, ...]
    condition: PureFormula


@dataclass
class MatchOutcome:
    guard: PureFormula
    trace: List[MatchStep] = field(default_factory=list)
    calls: int = 0


def _check_match_pre(s: Stack, sigma_i: SpatialConj, sigma: SpatialConj, sigma_p: SpatialConj):
    if not sigma_i.includes(sigma):
        raise MatchPreconditionError("Sigma is not a sub-multiset of Sigma_I")
    unbound = [v for v in conj_vars(SpatialConj(sigma_i.atoms + sigma_p.atoms)) if v not in s]
    if unbound:
        raise MatchPreconditionError(f"stack does not bind {unbound}")
    if not eval_pure(s, well_formed(sigma_i)):
        raise MatchPreconditionError("stack does not satisfy WellFormed(Sigma_I)")


def match_fn(s: Stack, sigma_i: SpatialConj, sigma: SpatialConj, sigma_p: SpatialConj,
             check_pre: bool = True) -> MatchOutcome:
    """Generalise s into U for Sigma |- Sigma'.

    Each step either strips the leftmost s-empty atom (antecedent first),
    or consumes the first colliding pair (S, S') whose guard holds under s
    and replaces S' by its surplus. When neither applies the result closes
    with True iff both sides are exhausted.
    """
    if check_pre:
        _check_match_pre(s, sigma_i, sigma, sigma_p)
    left, right = list(sigma.atoms), list(sigma_p.atoms)
    out = MatchOutcome(TRUE)
    conds: List[PureFormula] = []
    while True:
        out.calls += 1
        step = _strip_empty(s, left, 'empty-left') or _strip_empty(s, right, 'empty-right')
        if step is None:
            step = _match_pair(s, sigma_i, left, right)
        if step is None:
            base = TRUE if not left and not right else FALSE
            step = MatchStep('base', (), base)
        out.trace.append(step)
        conds.append(step.condition)
        if step.kind == 'base':
            break
    out.guard = And(tuple(conds))
    return out


def _strip_empty(s: Stack, atoms: List[SpatialAtom], kind: str) -> Optional[MatchStep]:
    for i, atom in enumerate(atoms):
        cond = empty_cond(atom)
        if eval_pure(s, cond):
            del atoms[i]
            return MatchStep(kind, (atom,), cond)
    return None


def _match_pair(s: Stack, sigma_i: SpatialConj, left: List[SpatialAtom],
                right: List[SpatialAtom]) -> Optional[MatchStep]:
    for i, atom in enumerate(left):
        for j, atom_p in enumerate(right):
            if not eval_pure(s, collide(atom, atom_p)):
                continue
            guard = match_guard(sigma_i, atom, atom_p)
            if not eval_pure(s, guard):
                continue
            del left[i]
            right[j:j + 1] = unfold_update(atom, atom_p).atoms
            return MatchStep('match', (atom, atom_p), guard)
    return None


# ------------------------------------------------------------------ prove

def prove(e: Entailment, backend=None, counterexample: bool = True,
          witness_budget: int = None) -> Verdict:
    """Decide e. Backend errors propagate; they are never turned into verdicts."""
    start = time.perf_counter()
    stats = ProveStats()
    rounds: List[Round] = []
    sigma, sigma_p = e.ante_spatial, e.cons_spatial
    ctx = backend if isinstance(backend, SolverContext) else SolverContext(backend)
    try:
        for v in free_vars(e):
            ctx.declare(v)
        ctx.assert_formula(conjoin([e.ante_pure, well_formed(sigma)]))
        while True:
            stats.solver_checks += 1
            result = ctx.check_sat()
            if isinstance(result, Unsat):
                verdict = Verdict(True, None, stats, rounds)
                break
            s = result.model
            stats.loop_iterations += 1
            outcome = match_fn(s, sigma, sigma, sigma_p, check_pre=False)
            stats.match_calls += outcome.calls
            logger.debug(f"iteration {stats.loop_iterations}: model {dict(s.bindings)}, "
                         f"{len(outcome.trace)} match steps")
            target = And((e.cons_pure, outcome.guard))
            if not eval_pure(s, target):
                rounds.append(Round(s, outcome.guard, None))
                witness = extract_counterexample(s, e, witness_budget) if counterexample else None
                verdict = Verdict(False, witness, stats, rounds)
                break
            refutation = negate(target)
            ctx.assert_formula(refutation)
            rounds.append(Round(s, outcome.guard, refutation))
        if LOG_QUERIES:
            logger.info(f"final query:\n{ctx.script()}")
    finally:
        if ctx is not backend:
            ctx.close()
    stats.wall_time_ms = (time.perf_counter() - start) * 1000
    logger.info(f"{verdict.label}: {stats.loop_iterations} iterations, "
                f"{stats.match_calls} match calls, {stats.solver_checks} solver checks, "
                f"{stats.wall_time_ms:.1f} ms")
    return verdict


# ---------------------------------------------------------- counterexamples

def _rechained(s: Stack, e: Entailment, seed: Heap) -> List[Heap]:
    """The seed with one non-empty segment cell s(x) -> s(y) split into s(x) -> m -> s(y).

    Taking m = s(z) where the chain continues s(y) -> s(z) gives the cyclic
    patch s(x) -> s(z) -> s(y) -> s(z), which still models both segments.
    """
    bounds = default_bounds(e)
    named = set(s.bindings.values())
    top = max(named | set(seed.domain()) | set(seed.cells.values()), default=-1)
    candidates = sorted(named) + [top + 1 + i for i in range(bounds.extra_locations)]
    out = []
    for atom in e.ante_spatial:
        if not isinstance(atom, Lseg):
            continue
        src, dst = eval_term(s, atom.src), eval_term(s, atom.dst)
        if src == dst:
            continue
        for m in candidates:
            if m in seed or m == dst:
                continue
            cells = dict(seed.cells)
            cells[src] = m
            cells[m] = dst
            out.append(Heap(cells))
    return out


def extract_counterexample(s: Stack, e: Entailment, budget: int = None) -> Optional[Witness]:
    """A verified (s, h) refuting e, or None when the bounded search comes up empty."""
    budget = WITNESS_BUDGET if budget is None else budget
    if not eval_pure(s, e.ante_pure):
        return None
    try:
        seed = construct_heap(s, e.ante_spatial)
    except HeapConstructionError:
        return None
    bounds = default_bounds(e)
    candidates = itertools.chain(
        [seed],
        _rechained(s, e, seed),
        itertools.islice(enumerate_heaps(s, e.ante_spatial, bounds), budget),
    )
    for h in candidates:
        if refutes(s, h, e):
            return Witness(s, h)
    logger.info("no counterexample within the search budget")
    return None
