"""
Verdicts, witnesses and per-run statistics shared by the engine and the oracle.
"""

from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence

from formulas import Heap, PureFormula, Stack


@dataclass(frozen=True)
class Witness:
    stack: Stack
    heap: Heap


@dataclass
class ProveStats:
    loop_iterations: int = 0
    match_calls: int = 0
    solver_checks: int = 0
    wall_time_ms: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Round:
    """One loop iteration: the model, its generalisation U and the refutation asserted."""
    model: Stack
    guard: PureFormula
    refutation: Optional[PureFormula]


@dataclass
class Verdict:
    valid: bool
    witness: Optional[Witness] = None
    stats: ProveStats = field(default_factory=ProveStats)
    rounds: List[Round] = field(default_factory=list)

    @property
    def label(self) -> str:
        return 'valid' if self.valid else 'invalid'

    def __str__(self):
        return self.label


def format_stack(stack: Stack, order: Sequence[str] = None) -> str:
    names = list(order) if order is not None else list(stack)
    return 'stack: ' + ' '.join(f"{name}={stack[name]}" for name in names if name in stack)


def format_heap(heap: Heap) -> str:
    if not len(heap):
        return 'heap: emp'
    return 'heap: ' + ', '.join(f"{loc} -> {val}" for loc, val in sorted(heap.items()))


def format_witness(witness: Witness, order: Sequence[str] = None) -> str:
    """Two lines, `stack: a=0 b=1` then `heap: 0 -> 2, 2 -> 1`."""
    return format_stack(witness.stack, order) + '\n' + format_heap(witness.heap)
