"""
Command-line entry point for the list-segment entailment prover

    python run_prover.py prove corpus/sec2.ent
    python run_prover.py prove corpus/regression.ent --counterexample --json
    python run_prover.py bench --clones 10 corpus/clones_base.ent
    python run_prover.py oracle corpus/regression.ent --stack-domain 4 --extra-locs 2 --max-cells 6
    python run_prover.py selftest
    python run_prover.py fuzz --count 200 --seed 7
    python run_prover.py serve

Exit codes: 0 all valid, 1 any invalid, 2 error.
"""

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from benchmark import DEFAULT_BASE, CloneBenchmark
from entailment_engine import EngineError, prove
from entailment_parser import EntailmentSyntaxError, ParsedLine, parse_entailment, parse_file
from formulas import FormulaError, free_vars
from semantics_oracle import OracleBounds, OracleError, default_bounds, oracle_decide
from theory_backend import DEFAULT_BACKEND, SolverError
from verdicts import Verdict, format_witness
from worked_examples import fuzz, run_examples

logger = logging.getLogger(__name__)

LOG_LEVEL = os.getenv('LSEG_LOG_LEVEL', 'WARNING')
EXIT_VALID, EXIT_INVALID, EXIT_ERROR = 0, 1, 2
KNOWN_ERRORS = (EntailmentSyntaxError, FormulaError, SolverError, EngineError, OracleError, OSError)


@dataclass
class RunReport:
    verdict: str
    stats: dict
    input: str
    witness: Optional[str] = None
    expected: Optional[str] = field(default=None, repr=False)

    @classmethod
    def from_verdict(cls, verdict: Verdict, parsed: ParsedLine, path: str) -> 'RunReport':
        witness = None
        if verdict.witness is not None:
            witness = format_witness(verdict.witness, free_vars(parsed.entailment))
        return cls(verdict.label, verdict.stats.to_dict(), f"{path}:{parsed.line}", witness,
                   parsed.expected)

    def to_json(self) -> dict:
        out = {'verdict': self.verdict}
        if self.witness is not None:
            out['witness'] = self.witness
        out['stats'] = {k: self.stats[k] for k in
                        ('loop_iterations', 'match_calls', 'solver_checks', 'wall_time_ms')}
        out['input'] = self.input
        return out


def _emit(reports: List[RunReport], as_json: bool, single: bool):
    for report in reports:
        if as_json:
            print(json.dumps(report.to_json()))
            continue
        print(report.verdict if single else f"{report.input}: {report.verdict}")
        if report.witness:
            print(report.witness)


def _exit_code(reports: Sequence[RunReport]) -> int:
    return EXIT_INVALID if any(r.verdict == 'invalid' for r in reports) else EXIT_VALID


def cmd_prove(args) -> int:
    lines = parse_file(args.file)

    def check(parsed: ParsedLine) -> RunReport:
        verdict = prove(parsed.entailment, args.backend, counterexample=args.counterexample)
        report = RunReport.from_verdict(verdict, parsed, args.file)
        if parsed.expected and parsed.expected != report.verdict:
            logger.warning(f"{report.input}: expected {parsed.expected}, got {report.verdict}")
        return report

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(check, lines))
    else:
        reports = [check(parsed) for parsed in lines]
    _emit(reports, args.json, len(lines) == 1)
    return _exit_code(reports)


def cmd_oracle(args) -> int:
    reports = []
    for parsed in parse_file(args.file):
        defaults = default_bounds(parsed.entailment)
        bounds = OracleBounds(
            args.stack_domain or defaults.stack_domain_size,
            args.extra_locs or defaults.extra_locations,
            args.max_cells or defaults.max_heap_cells,
        )
        verdict = oracle_decide(parsed.entailment, bounds)
        reports.append(RunReport.from_verdict(verdict, parsed, args.file))
    _emit(reports, args.json, len(reports) == 1)
    return _exit_code(reports)


def cmd_bench(args) -> int:
    base = parse_file(args.file)[0].entailment if args.file else parse_entailment(DEFAULT_BASE)
    bench = CloneBenchmark(base, args.backend)
    bench.run(args.clones)
    if args.json:
        print(bench.export_json())
    else:
        bench.display()
    return EXIT_INVALID if any(r.verdict == 'invalid' for r in bench.rows) else EXIT_VALID


def cmd_selftest(args) -> int:
    results = run_examples(args.backend)
    for name, passed in results:
        print(f"{'ok  ' if passed else 'FAIL'} {name}")
    failed = sum(1 for _, passed in results if not passed)
    print(f"{len(results) - failed}/{len(results)} worked examples passed")
    return EXIT_VALID if not failed else EXIT_INVALID


def cmd_fuzz(args) -> int:
    start = time.perf_counter()
    disagreements = fuzz(args.count, args.seed, args.backend)
    for text, proved, expected in disagreements:
        print(f"disagree: {text}  prove={'valid' if proved else 'invalid'} "
              f"oracle={'valid' if expected else 'invalid'}")
    print(f"{args.count} entailments, {len(disagreements)} disagreements "
          f"({time.perf_counter() - start:.1f}s, seed {args.seed})")
    return EXIT_VALID if not disagreements else EXIT_INVALID


def cmd_serve(args) -> int:
    from api import create_app
    create_app(args.backend).run(host='0.0.0.0', port=args.port)
    return EXIT_VALID


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--backend', default=DEFAULT_BACKEND,
                        help="internal or smtlib:<command> (default: $LSEG_BACKEND or internal)")
    common.add_argument('--json', action='store_true', help="machine-readable output")
    common.add_argument('--seed', type=int, default=0, help="random seed for fuzzing")
    common.add_argument('--verbose', '-v', action='store_true', help="debug logging")

    parser = argparse.ArgumentParser(prog='run_prover', description="List-segment entailment prover")
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('prove', parents=[common], help="check each entailment of a file")
    p.add_argument('file')
    p.add_argument('--counterexample', action='store_true', help="print a witness for invalid entailments")
    p.add_argument('--jobs', type=int, default=1, help="check lines in parallel")
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser('bench', parents=[common], help="clone benchmark")
    p.add_argument('file', nargs='?', help="base entailment (first line); built-in base if omitted")
    p.add_argument('--clones', type=int, default=10)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser('oracle', parents=[common], help="bounded ground truth")
    p.add_argument('file')
    p.add_argument('--stack-domain', type=int)
    p.add_argument('--extra-locs', type=int)
    p.add_argument('--max-cells', type=int)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser('selftest', parents=[common], help="run the worked examples")
    p.set_defaults(func=cmd_selftest)

    p = sub.add_parser('fuzz', parents=[common], help="compare prove with the oracle on random inputs")
    p.add_argument('--count', type=int, default=100)
    p.set_defaults(func=cmd_fuzz)

    p = sub.add_parser('serve', parents=[common], help="HTTP JSON interface")
    p.add_argument('--port', type=int, default=int(os.getenv('PORT', 5000)))
    p.set_defaults(func=cmd_serve)
    return parser


def run_cli(argv: Sequence[str] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code else EXIT_VALID
    logging.basicConfig(level=logging.DEBUG if args.verbose else LOG_LEVEL.upper())
    try:
        return args.func(args)
    except KNOWN_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(run_cli())
