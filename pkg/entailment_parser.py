"""
Surface syntax for entailments, one per line:

    c < e : lseg(a,b) * lseg(a,c) * next(c,d) * lseg(d,e) |- lseg(b,c) * lseg(c,e)

A side is `pure : spatial`, a bare spatial part, or a bare pure part. Pure
formulas use `!`, `&`, `|` and `->` (weakest, right associative) over
relations `= != < <= > >=` between terms built from identifiers, integers,
`nil`, `+` and `-`. `#` starts a comment.
"""

import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

import pyparsing as pp

from formulas import (EMP, FALSE, NIL, TRUE, Add, And, Emp, Entailment, FalseFormula, Implies,
                      IntLit, Lseg, Next, Not, Or, PureFormula, Rel, SpatialAtom, SpatialConj,
                      Sub, Term, TrueFormula, Var, conjoin, conj_union, free_vars,
                      rename_entailment)

logger = logging.getLogger(__name__)

pp.ParserElement.enable_packrat()

PREDICATES = {'next': (Next, 2), 'lseg': (Lseg, 2)}
EXPECTATION = re.compile(r'#\s*(valid|invalid)\s*$')


class EntailmentSyntaxError(Exception):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class UnknownPredicateError(EntailmentSyntaxError):
    pass


class ArityError(EntailmentSyntaxError):
    pass


class _UnknownPredicate(pp.ParseFatalException):
    pass


class _BadArity(pp.ParseFatalException):
    pass


# ----------------------------------------------------------------- grammar

def _fold_terms(tokens):
    term = tokens[0]
    for op, right in zip(tokens[1::2], tokens[2::2]):
        term = Add(term, right) if op == '+' else Sub(term, right)
    return term


def _fold_not(tokens):
    items = tokens[0]
    f = items[-1]
    for _ in items[:-1]:
        f = Not(f)
    return f


def _fold_implies(tokens):
    items = tokens[0][::2]
    f = items[-1]
    for lhs in reversed(items[:-1]):
        f = Implies(lhs, f)
    return f


def _build_atom(s, loc, tokens):
    name, args = tokens[0], list(tokens[1:])
    if name not in PREDICATES:
        raise _UnknownPredicate(s, loc, f"unknown predicate '{name}'")
    cls, arity = PREDICATES[name]
    if len(args) != arity:
        raise _BadArity(s, loc, f"'{name}' takes {arity} arguments, got {len(args)}")
    return cls(*args)


def _build_grammar() -> pp.ParserElement:
    LPAR, RPAR, COLON, STAR = map(pp.Suppress, '():*')
    keyword = pp.MatchFirst(pp.Keyword(k) for k in ('emp', 'next', 'lseg', 'true', 'false', 'nil'))

    ident = (~keyword + pp.Word(pp.alphas + '_', pp.alphanums + '_')).set_parse_action(lambda t: Var(t[0]))
    integer = pp.Regex(r'-?\d+').set_parse_action(lambda t: IntLit(int(t[0])))
    nil = pp.Keyword('nil').set_parse_action(lambda: NIL)
    term = pp.Forward()
    operand = integer | nil | ident | LPAR + term + RPAR
    term <<= (operand + pp.ZeroOrMore(pp.one_of('+ -') + operand)).set_parse_action(_fold_terms)

    rel = (term + pp.one_of('= != < <= > >=') + term).set_parse_action(lambda t: Rel(t[1], t[0], t[2]))
    constant = (pp.Keyword('true').set_parse_action(lambda: TRUE)
                | pp.Keyword('false').set_parse_action(lambda: FALSE))
    pure = pp.infix_notation(constant | rel, [
        (pp.Literal('!'), 1, pp.OpAssoc.RIGHT, _fold_not),
        (pp.Literal('&'), 2, pp.OpAssoc.LEFT, lambda t: And(tuple(t[0][::2]))),
        (pp.Literal('|'), 2, pp.OpAssoc.LEFT, lambda t: Or(tuple(t[0][::2]))),
        (pp.Literal('->'), 2, pp.OpAssoc.RIGHT, _fold_implies),
    ])

    emp = pp.Keyword('emp').set_parse_action(lambda: EMP)
    predicate = (pp.Word(pp.alphas + '_', pp.alphanums + '_') + LPAR
                 + pp.Optional(pp.DelimitedList(term)) + RPAR).set_parse_action(_build_atom)
    spatial = (emp | predicate) + pp.ZeroOrMore(STAR + (emp | predicate))
    spatial.set_parse_action(lambda t: SpatialConj(tuple(t)))

    side = (
        (pure + COLON + spatial).set_parse_action(lambda t: (t[0], t[1]))
        | spatial.copy().add_parse_action(lambda t: (TRUE, t[0]))
        | pure.copy().add_parse_action(lambda t: (t[0], SpatialConj((EMP,))))
    )
    entailment = side + pp.Suppress('|-') + side
    entailment.set_parse_action(lambda t: Entailment(t[0][0], t[0][1], t[1][0], t[1][1]))
    entailment.ignore(pp.python_style_comment)
    return entailment


ENTAILMENT = _build_grammar()


def parse_entailment(text: str) -> Entailment:
    try:
        return ENTAILMENT.parse_string(text, parse_all=True)[0]
    except _UnknownPredicate as e:
        raise UnknownPredicateError(e.msg, e.lineno, e.col) from None
    except _BadArity as e:
        raise ArityError(e.msg, e.lineno, e.col) from None
    except pp.ParseBaseException as e:
        raise EntailmentSyntaxError(e.msg, e.lineno, e.col) from None


@dataclass(frozen=True)
class ParsedLine:
    line: int
    text: str
    entailment: Entailment
    expected: Optional[str] = None  # 'valid' / 'invalid' from a trailing comment


def parse_lines(text: str, source: str = '<input>') -> List[ParsedLine]:
    out = []
    for number, raw in enumerate(text.splitlines(), start=1):
        body = raw.split('#', 1)[0].strip()
        if not body:
            continue
        try:
            e = parse_entailment(body)
        except EntailmentSyntaxError as err:
            raise type(err)(f"{source}: {err.message}", number, err.column) from None
        match = EXPECTATION.search(raw)
        out.append(ParsedLine(number, raw.strip(), e, match.group(1) if match else None))
    return out


def parse_file(path: Union[str, Path]) -> List[ParsedLine]:
    path = Path(path)
    return parse_lines(path.read_text(), str(path))


# ----------------------------------------------------------------- printer

def format_term(t: Term, spatial: bool = False) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, IntLit):
        return 'nil' if spatial and t.value == 0 else str(t.value)
    op = '+' if isinstance(t, Add) else '-'
    right = format_term(t.right)
    if isinstance(t.right, (Add, Sub)):
        right = f"({right})"
    return f"{format_term(t.left)} {op} {right}"


def _wrap(f: PureFormula, *kinds) -> str:
    text = format_pure(f)
    return f"({text})" if isinstance(f, kinds) else text


def format_pure(f: PureFormula) -> str:
    if isinstance(f, TrueFormula):
        return 'true'
    if isinstance(f, FalseFormula):
        return 'false'
    if isinstance(f, Rel):
        return f"{format_term(f.left)} {f.op} {format_term(f.right)}"
    if isinstance(f, Not):
        return '!' + _wrap(f.item, And, Or, Implies)
    if isinstance(f, And):
        if not f.items:
            return 'true'
        return ' & '.join(_wrap(i, And, Or, Implies) for i in f.items)
    if isinstance(f, Or):
        if not f.items:
            return 'false'
        return ' | '.join(_wrap(i, Or, Implies) for i in f.items)
    return f"{_wrap(f.lhs, Implies)} -> {format_pure(f.rhs)}"


def format_atom(atom: SpatialAtom) -> str:
    if isinstance(atom, Emp):
        return 'emp'
    name = 'next' if isinstance(atom, Next) else 'lseg'
    return f"{name}({format_term(atom.src, True)},{format_term(atom.dst, True)})"


def format_spatial(sigma: SpatialConj) -> str:
    return ' * '.join(format_atom(a) for a in sigma) or 'emp'


def _format_side(pure: PureFormula, sigma: SpatialConj) -> str:
    if isinstance(pure, TrueFormula):
        return format_spatial(sigma)
    return f"{format_pure(pure)} : {format_spatial(sigma)}"


def format_entailment(e: Entailment) -> str:
    return f"{_format_side(e.ante_pure, e.ante_spatial)} |- {_format_side(e.cons_pure, e.cons_spatial)}"


# ------------------------------------------------------------------ clones

def clone_entailment(e: Entailment, k: int) -> Entailment:
    """k variable-disjoint copies of e, variables suffixed `_1` .. `_k`."""
    if k < 1:
        raise ValueError(f"clone count must be at least 1, got {k}")
    names = free_vars(e)
    copies = [rename_entailment(e, {v: f"{v}_{i}" for v in names}) for i in range(1, k + 1)]
    return Entailment(
        conjoin(c.ante_pure for c in copies),
        conj_union(*(c.ante_spatial for c in copies)),
        conjoin(c.cons_pure for c in copies),
        conj_union(*(c.cons_spatial for c in copies)),
    )
