# -*- coding: utf-8 -*-
"""
GTS Abstract Syntax Tree
Directives, attribute expressions and operator nodes of the Generative Testcase Specification

All nodes are frozen dataclasses; equality is structural.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple, Union

from utils.errors import PlumberError


class GtsError(PlumberError):
    """Base error of the GTS language"""
    pass


class GtsSyntaxError(GtsError):
    """Input does not follow the grammar"""

    def __init__(self, line: int, col: int, expected: str):
        self.line = line
        self.col = col
        self.expected = expected
        super().__init__(f"syntax error at line {line}, col {col}: expected {expected}")


class GtsValueError(GtsError):
    """Well-formed input whose count lies outside its allowed range"""

    def __init__(self, line: int, col: int, message: str):
        self.line = line
        self.col = col
        self.message = message
        super().__init__(f"semantic error at line {line}, col {col}: {message}")


class UnknownDirective(GtsError):
    """Identifier in directive position that names no directive"""
    pass


class MalformedAttribute(GtsError):
    """Mem attribute list that cannot be read"""
    pass


class NestedMutation(GtsError):
    """offmut / linemut nested inside another mutation operator"""
    pass


class DirectiveKind(Enum):
    MEM = "M"
    ARITH = "A"
    NOP = "NOP"
    SET_BRANCH = "SB"
    BRANCH = "B"


@dataclass(frozen=True)
class Symbol:
    """Interned attribute symbol (t1, s1, ...)"""
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class AttrExpr:
    """Base symbol plus signed integer delta"""
    symbol: Symbol
    delta: int = 0

    def shifted(self, amount: int) -> 'AttrExpr':
        return AttrExpr(self.symbol, self.delta + amount)

    def __str__(self) -> str:
        if self.delta > 0:
            return f"{self.symbol}+{self.delta}"
        if self.delta < 0:
            return f"{self.symbol}-{-self.delta}"
        return str(self.symbol)


@dataclass(frozen=True)
class Directive:
    """One instruction directive; which fields are meaningful depends on kind"""
    kind: DirectiveKind
    tag: Optional[AttrExpr] = None
    set: Optional[AttrExpr] = None
    word: Optional[int] = None
    operands: Tuple[str, ...] = ()
    var: Optional[str] = None
    value: Optional[bool] = None
    steps: Optional[int] = None

    @property
    def is_load(self) -> bool:
        return self.kind is DirectiveKind.MEM

    def with_attr(self, attr: str, amount: int) -> 'Directive':
        """Copy with the tag ('t') or set ('s') delta increased by amount"""
        if self.kind is not DirectiveKind.MEM:
            return self
        if attr == 't':
            tag = self.tag if self.tag is not None else AttrExpr(DEFAULT_TAG)
            return Directive(self.kind, tag.shifted(amount), self.set, self.word)
        current = self.set if self.set is not None else AttrExpr(DEFAULT_SET)
        return Directive(self.kind, self.tag, current.shifted(amount), self.word)


# Unnamed attributes share one default value per request
DEFAULT_TAG = Symbol("_t")
DEFAULT_SET = Symbol("_s")


@dataclass(frozen=True)
class Seq:
    items: Tuple['Node', ...] = ()


@dataclass(frozen=True)
class Power:
    body: Seq
    n: int
    attr: Optional[str] = None
    increment: int = 0


@dataclass(frozen=True)
class Wildcard:
    n: int


@dataclass(frozen=True)
class Shuffle:
    child: 'Node'


@dataclass(frozen=True)
class Subset:
    child: 'Node'


@dataclass(frozen=True)
class Slide:
    child: 'Node'
    n: int


@dataclass(frozen=True)
class Merge:
    left: 'Node'
    right: 'Node'


@dataclass(frozen=True)
class OffsetMutation:
    child: 'Node'


@dataclass(frozen=True)
class LineMutation:
    child: 'Node'


@dataclass(frozen=True)
class Repetition:
    child: 'Node'
    n: int


Node = Union[Directive, Seq, Power, Wildcard, Shuffle, Subset, Slide, Merge,
             OffsetMutation, LineMutation, Repetition]

MUTATION_NODES = (OffsetMutation, LineMutation)


@dataclass(frozen=True)
class GtsAst:
    """Optional precondition loads plus the operator tree of the body"""
    body: Node = field(default_factory=Seq)
    precondition: Tuple[Directive, ...] = ()


def iter_children(node: Node) -> Tuple[Node, ...]:
    if isinstance(node, Seq):
        return node.items
    if isinstance(node, Power):
        return (node.body,)
    if isinstance(node, Merge):
        return (node.left, node.right)
    if isinstance(node, (Shuffle, Subset, Slide, OffsetMutation, LineMutation, Repetition)):
        return (node.child,)
    return ()


def iter_directives(node: Node):
    """Yield every directive below node in source order"""
    if isinstance(node, Directive):
        yield node
        return
    for child in iter_children(node):
        yield from iter_directives(child)
