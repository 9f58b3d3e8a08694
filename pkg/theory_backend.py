"""
Pluggable pure-formula satisfiability: incremental append-only contexts
backed by the internal solver or an external SMT-LIB v2 process.
"""

from __future__ import annotations

import logging
import os
import queue
import re
import shlex
import subprocess
import threading
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import pyparsing as pp

from formulas import (Add, And, FalseFormula, Implies, IntLit, Not, Or, PureFormula, Rel, Stack,
                      Sub, Term, TrueFormula, Var, eval_pure, pure_vars)
from internal_solver import InternalSolver, SolverError, UnsupportedFragmentError

logger = logging.getLogger(__name__)

DEFAULT_BACKEND = os.getenv('LSEG_BACKEND', 'internal')
SMT_TIMEOUT = float(os.getenv('LSEG_SMT_TIMEOUT', 30))

__all__ = [
    'SolverError', 'UnsupportedFragmentError', 'DuplicateDeclarationError',
    'UndeclaredVariableError', 'BackendError', 'Sat', 'Unsat', 'UNSAT', 'SatResult',
    'BackendSpec', 'parse_backend_spec', 'SolverContext', 'SmtLibProcess',
    'serialize_smtlib', 'serialize_term', 'check_formula', 'is_equivalent',
]


class DuplicateDeclarationError(SolverError):
    pass


class UndeclaredVariableError(SolverError):
    pass


class BackendError(SolverError):
    pass


@dataclass(frozen=True)
class Sat:
    model: Stack


@dataclass(frozen=True)
class Unsat:
    pass


UNSAT = Unsat()
SatResult = Union[Sat, Unsat]


@dataclass(frozen=True)
class BackendSpec:
    kind: str  # 'internal' or 'smtlib'
    command: Tuple[str, ...] = ()

    def __str__(self):
        if self.kind == 'internal':
            return 'internal'
        return 'smtlib:' + ' '.join(self.command)


def parse_backend_spec(text: Union[str, BackendSpec, None]) -> BackendSpec:
    """`internal` or `smtlib:<command line>`."""
    if isinstance(text, BackendSpec):
        return text
    text = (text or DEFAULT_BACKEND).strip()
    if text == 'internal':
        return BackendSpec('internal')
    if text.startswith('smtlib:'):
        command = tuple(shlex.split(text[len('smtlib:'):]))
        if not command:
            raise BackendError("smtlib backend needs a command, e.g. smtlib:'z3 -in'")
        return BackendSpec('smtlib', command)
    raise BackendError(f"unknown backend '{text}' (expected internal or smtlib:<command>)")


# ---------------------------------------------------------------- SMT-LIB

_SIMPLE_SYMBOL = re.compile(r'^[A-Za-z_~!@$%^&*+=<>.?/-][A-Za-z0-9_~!@$%^&*+=<>.?/-]*$')
_RESERVED = {
    'and', 'or', 'not', 'true', 'false', 'let', 'ite', 'distinct', 'assert',
    'forall', 'exists', 'as', 'par', 'declare-const', 'check-sat', 'Int', 'Bool',
}


def smt_symbol(name: str) -> str:
    if _SIMPLE_SYMBOL.match(name) and name not in _RESERVED:
        return name
    return f"|{name}|"


def serialize_term(t: Term) -> str:
    if isinstance(t, Var):
        return smt_symbol(t.name)
    if isinstance(t, IntLit):
        return str(t.value) if t.value >= 0 else f"(- {-t.value})"
    if isinstance(t, Add):
        return f"(+ {serialize_term(t.left)} {serialize_term(t.right)})"
    if isinstance(t, Sub):
        return f"(- {serialize_term(t.left)} {serialize_term(t.right)})"
    raise SolverError(f"not a term: {t!r}")


def serialize_smtlib(f: PureFormula) -> str:
    if isinstance(f, TrueFormula):
        return 'true'
    if isinstance(f, FalseFormula):
        return 'false'
    if isinstance(f, Rel):
        left, right = serialize_term(f.left), serialize_term(f.right)
        if f.op == '!=':
            return f"(not (= {left} {right}))"
        return f"({f.op} {left} {right})"
    if isinstance(f, (And, Or)):
        if not f.items:
            return 'true' if isinstance(f, And) else 'false'
        if len(f.items) == 1:
            return serialize_smtlib(f.items[0])
        head = 'and' if isinstance(f, And) else 'or'
        return f"({head} {' '.join(serialize_smtlib(i) for i in f.items)})"
    if isinstance(f, Not):
        return f"(not {serialize_smtlib(f.item)})"
    if isinstance(f, Implies):
        return f"(=> {serialize_smtlib(f.lhs)} {serialize_smtlib(f.rhs)})"
    raise SolverError(f"not a pure formula: {f!r}")


LPAR, RPAR = map(pp.Suppress, "()")
_ATOM = pp.Regex(r'\|[^|]*\|') | pp.Regex(r'[^\s()|]+')
SEXP = pp.Forward()
SEXP <<= _ATOM | pp.Group(LPAR + pp.ZeroOrMore(SEXP) + RPAR)


def parse_sexp(text: str):
    try:
        return SEXP.parse_string(text, parse_all=True).as_list()[0]
    except pp.ParseBaseException as e:
        raise BackendError(f"malformed solver response: {text!r}") from e


def decode_int(value) -> int:
    """`7` or `(- 7)`"""
    if isinstance(value, str) and re.fullmatch(r'\d+', value):
        return int(value)
    if isinstance(value, list) and len(value) == 2 and value[0] == '-':
        return -decode_int(value[1])
    raise BackendError(f"expected an integer value, got {value!r}")


class SmtLibProcess:
    """A child process speaking SMT-LIB v2 on stdin/stdout."""

    def __init__(self, command: Sequence[str], timeout: float = SMT_TIMEOUT):
        self.command = list(command)
        self.timeout = timeout
        try:
            self.process = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                universal_newlines=True,
            )
        except OSError as e:
            raise BackendError(f"cannot start solver {self.command}: {e}") from e
        logger.debug(f"; {' '.join(self.command)}")
        self._lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()
        self.write('(set-option :produce-models true)')
        self.write('(set-logic QF_LIA)')

    def _pump(self):
        for line in self.process.stdout:
            self._lines.put(line.rstrip('\n'))
        self._lines.put(None)

    def write(self, line: str):
        logger.debug(f"> {line}")
        try:
            self.process.stdin.write(line + '\n')
            self.process.stdin.flush()
        except (BrokenPipeError, OSError, ValueError) as e:
            raise BackendError(f"solver process is gone: {e}") from e

    def read(self) -> str:
        depth = 0
        lines: List[str] = []
        while True:
            try:
                line = self._lines.get(timeout=self.timeout)
            except queue.Empty:
                raise BackendError(f"solver did not answer within {self.timeout}s") from None
            if line is None:
                err = self.process.stderr.read() if self.process.stderr else ''
                raise BackendError(f"solver exited unexpectedly: {err.strip()}")
            if not line.strip() and not lines:
                continue
            lines.append(line)
            depth += line.count('(') - line.count(')')
            if depth <= 0:
                break
        text = '\n'.join(lines).strip()
        logger.debug(f"< {text}")
        if text.startswith('(error'):
            raise BackendError(f"solver error: {text}")
        return text

    def check_sat(self) -> str:
        self.write('(check-sat)')
        answer = self.read()
        if answer not in ('sat', 'unsat'):
            raise BackendError(f"solver answered {answer!r}")
        return answer

    def get_values(self, symbols: Sequence[str]) -> List[int]:
        self.write(f"(get-value ({' '.join(symbols)}))")
        pairs = parse_sexp(self.read())
        if not isinstance(pairs, list) or len(pairs) != len(symbols):
            raise BackendError(f"unexpected get-value response: {pairs!r}")
        values = []
        for pair in pairs:
            if not isinstance(pair, list) or len(pair) != 2:
                raise BackendError(f"unexpected get-value entry: {pair!r}")
            values.append(decode_int(pair[1]))
        return values

    def close(self):
        if self.process.poll() is None:
            try:
                self.write('(exit)')
            except BackendError:
                pass
            try:
                self.process.wait(timeout=1)
            except subprocess.TimeoutExpired:
                self.process.kill()


# ---------------------------------------------------------------- context

class SolverContext:
    """Append-only assertion context over Int-sorted variables."""

    def __init__(self, backend: Union[str, BackendSpec, None] = None):
        self.backend = parse_backend_spec(backend)
        self.declared: List[str] = []
        self.assertion_stack: List[PureFormula] = []
        self.checks = 0
        self._declared_set = set()
        self._result: Optional[SatResult] = None
        self._internal: Optional[InternalSolver] = None
        self._process: Optional[SmtLibProcess] = None
        if self.backend.kind == 'internal':
            self._internal = InternalSolver()
        else:
            self._process = SmtLibProcess(self.backend.command)

    @property
    def declared_vars(self) -> frozenset:
        return frozenset(self._declared_set)

    def declare(self, v: str) -> 'SolverContext':
        if v in self._declared_set:
            raise DuplicateDeclarationError(f"variable '{v}' already declared")
        self._declared_set.add(v)
        self.declared.append(v)
        if self._internal is not None:
            self._internal.declare(v)
        else:
            self._process.write(f"(declare-const {smt_symbol(v)} Int)")
        if isinstance(self._result, Sat):
            self._result = None
        return self

    def assert_formula(self, f: PureFormula) -> 'SolverContext':
        missing = [v for v in pure_vars(f) if v not in self._declared_set]
        if missing:
            raise UndeclaredVariableError(f"undeclared variables {missing}")
        if self._internal is not None:
            self._internal.add_formula(f)
        else:
            self._process.write(f"(assert {serialize_smtlib(f)})")
        self.assertion_stack.append(f)
        if not isinstance(self._result, Unsat):
            self._result = None
        return self

    def check_sat(self) -> SatResult:
        self.checks += 1
        if self._result is not None:
            return self._result
        if self._internal is not None:
            values = self._internal.solve()
        else:
            values = self._external_check()
        if values is None:
            self._result = UNSAT
        else:
            model = Stack(values)
            for f in self.assertion_stack:
                if not eval_pure(model, f):
                    raise BackendError(f"model {dict(values)} violates an asserted formula")
            self._result = Sat(model)
        return self._result

    def _external_check(self) -> Optional[Dict[str, int]]:
        if self._process.check_sat() == 'unsat':
            return None
        if not self.declared:
            return {}
        symbols = [smt_symbol(v) for v in self.declared]
        return dict(zip(self.declared, self._process.get_values(symbols)))

    def script(self) -> str:
        """The context as a standalone SMT-LIB script, for logging and replay."""
        lines = ['(set-logic QF_LIA)']
        lines += [f"(declare-const {smt_symbol(v)} Int)" for v in self.declared]
        lines += [f"(assert {serialize_smtlib(f)})" for f in self.assertion_stack]
        lines.append('(check-sat)')
        return '\n'.join(lines)

    def close(self):
        if self._internal is not None:
            logger.debug(f"internal solver: {self.checks} checks, {self._internal.decisions} decisions, "
                         f"{self._internal.lemma_count} learned lemmas")
        if self._process is not None:
            self._process.close()
            self._process = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def check_formula(f: PureFormula, backend: Union[str, BackendSpec, None] = None) -> SatResult:
    with SolverContext(backend) as ctx:
        for v in pure_vars(f):
            ctx.declare(v)
        ctx.assert_formula(f)
        return ctx.check_sat()


def is_equivalent(f: PureFormula, g: PureFormula,
                  backend: Union[str, BackendSpec, None] = None) -> bool:
    """Validity of f <-> g, decided as unsatisfiability of its negation."""
    query = Not(And((Implies(f, g), Implies(g, f))))
    return isinstance(check_formula(query, backend), Unsat)
