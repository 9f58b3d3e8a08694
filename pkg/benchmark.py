"""
Clone benchmark: checks k variable-disjoint copies of a base entailment for
k = 1..N and reports runtime and work counters per copy count
"""

import json
import logging
import time
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional

import numpy as np
from rich.console import Console
from rich.table import Table

from entailment_engine import prove
from entailment_parser import clone_entailment, format_entailment
from formulas import Entailment

logger = logging.getLogger(__name__)

# Single-shape base: one Prove iteration per clone count
DEFAULT_BASE = ('a != b & a != c & a != d & a != e & b != c & b != d & b != e & c != d & '
                'c != e & d != e : next(a,b) * next(b,c) * next(c,d) * next(d,e) '
                '|- lseg(a,c) * lseg(c,e)')


@dataclass
class BenchRow:
    copies: int
    seconds: float
    verdict: str
    loop_iterations: int
    match_calls: int
    solver_checks: int


class CloneBenchmark:
    def __init__(self, base: Entailment, backend=None, console: Console = None):
        """Benchmark harness for one base entailment"""
        self.base = base
        self.backend = backend
        self.console = console or Console()
        self.rows: List[BenchRow] = []

    def run(self, max_copies: int) -> List[BenchRow]:
        """Prove clones 1..max_copies, recording one row each"""
        self.rows = []
        for k in range(1, max_copies + 1):
            e = clone_entailment(self.base, k)
            start = time.perf_counter()
            verdict = prove(e, self.backend, counterexample=False)
            elapsed = time.perf_counter() - start
            row = BenchRow(k, elapsed, verdict.label, verdict.stats.loop_iterations,
                           verdict.stats.match_calls, verdict.stats.solver_checks)
            logger.info(f"{k} copies: {verdict.label} in {elapsed:.3f}s")
            self.rows.append(row)
        return self.rows

    def fit(self) -> Optional[Dict[str, float]]:
        """Least-squares line of match calls against copies"""
        if len(self.rows) < 2:
            return None
        copies = np.array([r.copies for r in self.rows], dtype=float)
        calls = np.array([r.match_calls for r in self.rows], dtype=float)
        slope, intercept = np.polyfit(copies, calls, 1)
        return {'slope': float(slope), 'intercept': float(intercept),
                'mean_seconds': float(np.mean([r.seconds for r in self.rows]))}

    def table(self) -> Table:
        table = Table(title=f"Clones of: {format_entailment(self.base)}")
        table.add_column("Copies", style="cyan", justify="right")
        table.add_column("Time (s)", style="magenta", justify="right")
        table.add_column("Verdict", style="green")
        table.add_column("Iterations", justify="right")
        table.add_column("Match calls", justify="right")
        table.add_column("Solver checks", justify="right")
        for r in self.rows:
            table.add_row(str(r.copies), f"{r.seconds:.3f}", r.verdict, str(r.loop_iterations),
                          str(r.match_calls), str(r.solver_checks))
        return table

    def display(self):
        self.console.print(self.table())
        fit = self.fit()
        if fit:
            self.console.print(f"match calls ~ {fit['slope']:.2f} * copies + {fit['intercept']:.2f}")

    def export_json(self) -> str:
        """Rows plus the fitted line as a JSON document"""
        return json.dumps({'rows': [asdict(r) for r in self.rows], 'fit': self.fit()}, indent=2)
