# -*- coding: utf-8 -*-
"""
Predicate Language
Conjunctions of comparisons over address fields of template loads and count symbols

    predicate := "true" | atom ("and" atom)*
    atom      := expr ("=" | "!=" | "<" | "<=" | ">" | ">=") expr ["mod" INT]
               | expr "in" "[" SINT ".." SINT "]"
    expr      := term with unary "-", "*", binary "+" / "-", parentheses
    term      := FIELD "(" LOAD ")" | "bits(" LOAD "," INT "," INT ")" | INT | SYMBOL

FIELD is one of set, tag, word, bus, page, offset; LOAD is l1, l2, ...;
SYMBOL names a count (n1, n2, ...) or a family parameter (S, C, D, L).
With "mod N", "=" and "!=" compare congruence; ordering compares residues.
"""

import operator
from dataclasses import dataclass
from typing import Dict, FrozenSet, Optional, Tuple, Union

import pyparsing as pp

from utils.errors import PlumberError
from utils.geometry import CacheGeometry, Field, extract_field

FIELDS = tuple(f.value for f in Field)
KEYWORDS = ("and", "in", "mod", "true", "bits") + FIELDS


class TemplateError(PlumberError):
    """Base error of leakage templates"""
    pass


class PredicateSyntaxError(TemplateError):
    def __init__(self, text: str, col: int, message: str):
        self.text = text
        self.col = col
        super().__init__(f"bad predicate '{text}' at col {col}: {message}")


class MissingBinding(TemplateError):
    """A load or count symbol has no value in the evaluation binding"""
    pass


class UnboundSymbol(TemplateError):
    """A predicate refers to a symbol the code template does not define"""
    pass


@dataclass(frozen=True)
class Env:
    """Evaluation binding: load -> address, symbol -> count"""
    loads: Dict[str, int]
    counts: Dict[str, int]
    geom: CacheGeometry

    def address(self, load: str) -> int:
        if load not in self.loads:
            raise MissingBinding(f"no address bound to {load}")
        return int(self.loads[load])

    def count(self, name: str) -> int:
        if name not in self.counts:
            raise MissingBinding(f"no value bound to {name}")
        return int(self.counts[name])


# Expression nodes

_PRECEDENCE = {'+': 1, '-': 1, '*': 2}


@dataclass(frozen=True)
class Num:
    value: int

    def evaluate(self, env: Env) -> int:
        return self.value

    def render(self) -> str:
        return str(self.value)

    def symbols(self) -> Tuple[FrozenSet[str], FrozenSet[str]]:
        return frozenset(), frozenset()


@dataclass(frozen=True)
class FieldTerm:
    field: str
    load: str

    def evaluate(self, env: Env) -> int:
        return extract_field(env.geom, env.address(self.load), self.field)

    def render(self) -> str:
        return f"{self.field}({self.load})"

    def symbols(self):
        return frozenset([self.load]), frozenset()


@dataclass(frozen=True)
class BitsTerm:
    load: str
    lo: int
    hi: int

    def evaluate(self, env: Env) -> int:
        return (env.address(self.load) >> self.lo) & ((1 << (self.hi - self.lo + 1)) - 1)

    def render(self) -> str:
        return f"bits({self.load}, {self.lo}, {self.hi})"

    def symbols(self):
        return frozenset([self.load]), frozenset()


@dataclass(frozen=True)
class SymbolTerm:
    name: str

    def evaluate(self, env: Env) -> int:
        return env.count(self.name)

    def render(self) -> str:
        return self.name

    def symbols(self):
        return frozenset(), frozenset([self.name])


@dataclass(frozen=True)
class Neg:
    operand: 'Expr'

    def evaluate(self, env: Env) -> int:
        return -self.operand.evaluate(env)

    def render(self) -> str:
        inner = self.operand.render()
        return f"-{inner}" if not isinstance(self.operand, BinOp) else f"-({inner})"

    def symbols(self):
        return self.operand.symbols()


@dataclass(frozen=True)
class BinOp:
    op: str
    left: 'Expr'
    right: 'Expr'

    _FUNCS = {'+': operator.add, '-': operator.sub, '*': operator.mul}

    def evaluate(self, env: Env) -> int:
        return self._FUNCS[self.op](self.left.evaluate(env), self.right.evaluate(env))

    def render(self) -> str:
        mine = _PRECEDENCE[self.op]
        left = self.left.render()
        if isinstance(self.left, BinOp) and _PRECEDENCE[self.left.op] < mine:
            left = f"({left})"
        right = self.right.render()
        if isinstance(self.right, BinOp):
            inner = _PRECEDENCE[self.right.op]
            if inner < mine or (inner == mine and self.op == '-'):
                right = f"({right})"
        return f"{left} {self.op} {right}"

    def symbols(self):
        l_loads, l_counts = self.left.symbols()
        r_loads, r_counts = self.right.symbols()
        return l_loads | r_loads, l_counts | r_counts


Expr = Union[Num, FieldTerm, BitsTerm, SymbolTerm, Neg, BinOp]


# Atoms

_COMPARE = {
    '=': operator.eq, '!=': operator.ne, '<': operator.lt,
    '<=': operator.le, '>': operator.gt, '>=': operator.ge,
}


@dataclass(frozen=True)
class Comparison:
    left: Expr
    op: str
    right: Expr
    modulus: Optional[int] = None

    def evaluate(self, env: Env) -> bool:
        lhs, rhs = self.left.evaluate(env), self.right.evaluate(env)
        if self.modulus:
            if self.op in ('=', '!='):
                congruent = (lhs - rhs) % self.modulus == 0
                return congruent if self.op == '=' else not congruent
            lhs, rhs = lhs % self.modulus, rhs % self.modulus
        return _COMPARE[self.op](lhs, rhs)

    def render(self) -> str:
        text = f"{self.left.render()} {self.op} {self.right.render()}"
        return f"{text} mod {self.modulus}" if self.modulus else text

    def symbols(self):
        l_loads, l_counts = self.left.symbols()
        r_loads, r_counts = self.right.symbols()
        return l_loads | r_loads, l_counts | r_counts


@dataclass(frozen=True)
class Membership:
    term: Expr
    lo: int
    hi: int

    def evaluate(self, env: Env) -> bool:
        return self.lo <= self.term.evaluate(env) <= self.hi

    def render(self) -> str:
        return f"{self.term.render()} in [{self.lo}..{self.hi}]"

    def symbols(self):
        return self.term.symbols()


Atom = Union[Comparison, Membership]


@dataclass(frozen=True)
class Predicate:
    """Conjunction of atoms; the empty conjunction is "true" """
    atoms: Tuple[Atom, ...] = ()

    @property
    def text(self) -> str:
        return " and ".join(a.render() for a in self.atoms) if self.atoms else "true"

    def __str__(self) -> str:
        return self.text

    def loads(self) -> FrozenSet[str]:
        result = frozenset()
        for atom in self.atoms:
            result |= atom.symbols()[0]
        return result

    def counts(self) -> FrozenSet[str]:
        result = frozenset()
        for atom in self.atoms:
            result |= atom.symbols()[1]
        return result

    def evaluate(self, binding: Dict[str, int], counts: Optional[Dict[str, int]] = None,
                 geom: Optional[CacheGeometry] = None) -> bool:
        env = Env(binding, counts or {}, geom or CacheGeometry())
        return all(atom.evaluate(env) for atom in self.atoms)

    def __and__(self, other: 'Predicate') -> 'Predicate':
        return Predicate(self.atoms + tuple(a for a in other.atoms if a not in self.atoms))


# Grammar


def _fold_binary(tokens):
    group = tokens[0]
    node = group[0]
    for i in range(1, len(group), 2):
        node = BinOp(group[i], node, group[i + 1])
    return node


def _build_grammar() -> pp.ParserElement:
    lpar, rpar, comma = pp.Suppress("("), pp.Suppress(")"), pp.Suppress(",")

    integer = pp.Regex(r"\d+").set_name("INT")
    integer.set_parse_action(lambda t: int(t[0]))
    signed = pp.Regex(r"-?\d+").set_name("SINT")
    signed.set_parse_action(lambda t: int(t[0]))

    load = pp.Regex(r"l\d+").set_name("LOAD")
    keyword = pp.MatchFirst([pp.Keyword(k) for k in KEYWORDS])
    symbol = ~keyword + pp.Regex(r"[A-Za-z_][A-Za-z0-9_]*").set_name("SYMBOL")

    field_term = pp.one_of(" ".join(FIELDS), as_keyword=True) + lpar + load + rpar
    field_term.set_parse_action(lambda t: FieldTerm(t[0], t[1]))
    bits_term = pp.Suppress(pp.Keyword("bits")) + lpar + load + comma + integer + comma + integer + rpar
    bits_term.set_parse_action(lambda t: BitsTerm(t[0], t[1], t[2]))
    number = integer.copy().add_parse_action(lambda t: Num(t[0]))
    symbol.set_parse_action(lambda t: SymbolTerm(t[0]))

    operand = field_term | bits_term | number | symbol
    expr = pp.infix_notation(operand, [
        (pp.Literal("-"), 1, pp.OpAssoc.RIGHT, lambda t: Neg(t[0][1])),
        (pp.Literal("*"), 2, pp.OpAssoc.LEFT, _fold_binary),
        (pp.one_of("+ -"), 2, pp.OpAssoc.LEFT, _fold_binary),
    ])

    comparator = pp.one_of("= != <= >= < >")
    modulus = pp.Suppress(pp.Keyword("mod")) + integer
    comparison = expr + comparator + expr + pp.Optional(modulus, default=None)
    comparison.set_parse_action(lambda t: Comparison(t[0], t[1], t[2], t[3]))

    membership = (expr + pp.Suppress(pp.Keyword("in")) + pp.Suppress("[") + signed
                  + pp.Suppress("..") + signed + pp.Suppress("]"))
    membership.set_parse_action(lambda t: Membership(t[0], t[1], t[2]))

    atom = membership | comparison
    conjunction = pp.DelimitedList(atom, delim=pp.Keyword("and"))
    conjunction.set_parse_action(lambda t: Predicate(tuple(t)))
    true = pp.Keyword("true").set_parse_action(lambda: Predicate())
    return true | conjunction


_GRAMMAR = _build_grammar()


def parse_predicate(text: str) -> Predicate:
    """Parse one conjunction"""
    try:
        return _GRAMMAR.parse_string(text, parse_all=True)[0]
    except pp.ParseBaseException as e:
        raise PredicateSyntaxError(text, e.col, str(e.msg)) from None


def conjoin(*parts) -> Predicate:
    """Conjunction of predicates or predicate texts, duplicates dropped"""
    result = Predicate()
    for part in parts:
        result = result & (parse_predicate(part) if isinstance(part, str) else part)
    return result


def eval_predicate(p: Predicate, binding: Dict[str, int], counts: Optional[Dict[str, int]] = None,
                   geom: Optional[CacheGeometry] = None) -> bool:
    return p.evaluate(binding, counts, geom)

