# -*- coding: utf-8 -*-
"""
GTS Parser Module
pyparsing grammar for the Generative Testcase Specification language

Grammar (whitespace-insensitive, '#' starts a comment):
    gts    := ["pre{" seq "}"] opexpr
    opexpr := "shuffle{" opexpr "}" | "subset{" opexpr "}" | "slide{" opexpr ";" INT "}"
            | "merge{" opexpr "|" opexpr "}" | "offmut{" opexpr "}" | "linemut{" opexpr "}"
            | "rep{" opexpr ";" INT "}" | seq
    seq    := item+
    item   := directive | "(" seq ")^{" INT ["," ("t"|"s") "+=" INT] "}" | "W(" INT ")"
    directive := "M" ["[" attr ("," attr)* "]"] | "A" ["(" ID ("," ID)* ")"] | "NOP"
               | "SB(" ID "," BOOL ")" | "B(" ID "," BOOL "," INT ")"
    attr   := ("t"|"s") "=" ID [("+"|"-") INT] | "w=" INT
"""

import logging
import re
from pathlib import Path
from typing import Dict, List, Optional, Union

import pyparsing as pp

from parser.gts_ast import (
    AttrExpr, Directive, DirectiveKind, GtsAst, GtsSyntaxError, GtsValueError, LineMutation,
    MalformedAttribute, Merge, MUTATION_NODES, NestedMutation, Node, OffsetMutation,
    Power, Repetition, Seq, Shuffle, Slide, Subset, Symbol, UnknownDirective, Wildcard,
    iter_children,
)
from utils.text_io import read_text_file

ATTR_RE = re.compile(r"^\s*(?P<key>[ts])\s*=\s*(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
                     r"\s*(?:(?P<sign>[+-])\s*(?P<delta>\d+))?\s*$")
WORD_ATTR_RE = re.compile(r"^\s*w\s*=\s*(?P<word>\d+)\s*$")
OPERATOR_KEYWORDS = ("shuffle", "subset", "slide", "merge", "offmut", "linemut", "rep", "pre")


class GtsParser:
    """Parser for GTS text; symbols are interned per parse call"""

    def __init__(self):
        self.logger = logging.getLogger(__name__)
        self._symbols: Dict[str, Symbol] = {}
        self._grammar = self._build_grammar()

    def parse(self, text: str) -> GtsAst:
        self._symbols = {}
        if not text.strip() or not _strip_comments(text).strip():
            return GtsAst()

        try:
            result = self._grammar.parse_string(text, parse_all=True)
        except pp.ParseBaseException as e:
            raise GtsSyntaxError(e.lineno, e.col, str(e.msg)) from None

        ast = result[0]
        _reject_nested_mutation(ast.body, inside=False)
        self.logger.debug(f"Parsed GTS with {len(self._symbols)} symbols")
        return ast

    # Grammar

    def _build_grammar(self) -> pp.ParserElement:
        lbrace, rbrace = pp.Suppress("{"), pp.Suppress("}")
        lpar, rpar = pp.Suppress("("), pp.Suppress(")")
        comma, semi = pp.Suppress(","), pp.Suppress(";")

        integer = pp.Regex(r"[+-]?\d+").set_name("INT")
        integer.set_parse_action(lambda t: int(t[0]))
        ident = pp.Regex(r"[A-Za-z_][A-Za-z0-9_]*").set_name("ID")
        boolean = (pp.CaselessKeyword("true") | pp.CaselessKeyword("false")).set_name("BOOL")
        boolean.set_parse_action(lambda t: t[0].lower() == "true")

        attr_block = pp.Suppress("[") + pp.Regex(r"[^\]]*") + pp.Suppress("]")
        mem = pp.Keyword("M") + pp.Optional(attr_block)
        mem.set_parse_action(self._make_mem)

        # A followed by a power: the parenthesised body belongs to the power
        operands = lpar + pp.Group(pp.DelimitedList(ident)) + rpar + ~pp.Literal("^")
        arith = pp.Keyword("A") + pp.Optional(operands)
        arith.set_parse_action(self._make_arith)

        nop = pp.Keyword("NOP")
        nop.set_parse_action(lambda: Directive(DirectiveKind.NOP))

        set_branch = pp.Suppress(pp.Keyword("SB")) + lpar + ident + comma + boolean + rpar
        set_branch.set_parse_action(
            lambda t: Directive(DirectiveKind.SET_BRANCH, var=t[0], value=bool(t[1])))

        branch = (pp.Suppress(pp.Keyword("B")) + lpar + ident + comma + boolean + comma
                  + self._bounded(integer, "branch step", 1) + rpar)
        branch.set_parse_action(
            lambda t: Directive(DirectiveKind.BRANCH, var=t[0], value=bool(t[1]), steps=t[2]))

        # An unclosed operator is a syntax error, not an unknown directive
        unknown = ~pp.MatchFirst([pp.Keyword(k) for k in OPERATOR_KEYWORDS]) + pp.Regex(r"[A-Za-z_][A-Za-z0-9_]*")
        unknown.set_parse_action(self._unknown_directive)

        seq = pp.Forward()
        wildcard = pp.Suppress(pp.Keyword("W")) + lpar + self._bounded(integer, "wildcard", 0) + rpar
        wildcard.set_parse_action(lambda t: Wildcard(t[0]))

        increment = comma + pp.one_of("t s") + pp.Suppress("+=") + integer
        power = (lpar + seq + rpar + pp.Suppress("^") + lbrace + self._bounded(integer, "power", 1)
                 + pp.Optional(increment) + rbrace)
        power.set_parse_action(self._make_power)

        directive = mem | arith | nop | set_branch | branch
        item = power | wildcard | directive | unknown
        seq <<= pp.OneOrMore(item)
        seq.set_parse_action(lambda t: Seq(tuple(t)))

        opexpr = pp.Forward()

        def unary(keyword: str, node_type):
            rule = pp.Suppress(pp.Keyword(keyword)) + lbrace + opexpr + rbrace
            rule.set_parse_action(lambda t: node_type(t[0]))
            return rule

        def counted(keyword: str, node_type, minimum: int):
            rule = (pp.Suppress(pp.Keyword(keyword)) + lbrace + opexpr + semi
                    + self._bounded(integer, keyword, minimum) + rbrace)
            rule.set_parse_action(lambda t: node_type(t[0], t[1]))
            return rule

        merge = pp.Suppress(pp.Keyword("merge")) + lbrace + opexpr + pp.Suppress("|") + opexpr + rbrace
        merge.set_parse_action(lambda t: Merge(t[0], t[1]))

        opexpr <<= (unary("shuffle", Shuffle) | unary("subset", Subset)
                    | counted("slide", Slide, 1) | merge
                    | unary("offmut", OffsetMutation) | unary("linemut", LineMutation)
                    | counted("rep", Repetition, 1) | seq)

        pre = pp.Suppress(pp.Keyword("pre")) + lbrace + seq + rbrace
        pre.set_parse_action(self._make_precondition)

        gts = pp.Optional(pre, default=None) + pp.Optional(opexpr, default=None)
        gts.set_parse_action(self._make_gts)
        gts.ignore(pp.python_style_comment)
        return gts

    # Parse actions

    def _intern(self, name: str) -> Symbol:
        if name not in self._symbols:
            self._symbols[name] = Symbol(name)
        return self._symbols[name]

    def _make_mem(self, s, loc, t):
        if len(t) == 1:
            return Directive(DirectiveKind.MEM)

        tag: Optional[AttrExpr] = None
        set_expr: Optional[AttrExpr] = None
        word: Optional[int] = None
        raw = t[1].strip()
        if not raw:
            raise MalformedAttribute(f"empty attribute list at offset {loc}")

        for part in raw.split(","):
            match = ATTR_RE.match(part)
            if match:
                delta = int(match.group('delta') or 0)
                if match.group('sign') == '-':
                    delta = -delta
                expr = AttrExpr(self._intern(match.group('name')), delta)
                if match.group('key') == 't':
                    if tag is not None:
                        raise MalformedAttribute(f"duplicate tag attribute in '{raw}'")
                    tag = expr
                else:
                    if set_expr is not None:
                        raise MalformedAttribute(f"duplicate set attribute in '{raw}'")
                    set_expr = expr
                continue

            match = WORD_ATTR_RE.match(part)
            if match:
                if word is not None:
                    raise MalformedAttribute(f"duplicate word attribute in '{raw}'")
                word = int(match.group('word'))
                continue

            raise MalformedAttribute(f"cannot read attribute '{part.strip()}' in M[{raw}]")

        return Directive(DirectiveKind.MEM, tag=tag, set=set_expr, word=word)

    def _make_arith(self, t):
        operands = tuple(t[1]) if len(t) > 1 else ()
        return Directive(DirectiveKind.ARITH, operands=operands)

    @staticmethod
    def _bounded(integer: pp.ParserElement, what: str, minimum: int) -> pp.ParserElement:
        """Integer that must be >= minimum; the error points at the count itself"""

        def check(s, loc, t):
            if t[0] < minimum:
                raise GtsValueError(pp.lineno(loc, s), pp.col(loc, s),
                                    f"{what} count must be >= {minimum}, got {t[0]}")

        return integer.copy().add_parse_action(check)

    def _make_power(self, t):
        body, n = t[0], t[1]
        if len(t) > 2:
            return Power(body, n, t[2], t[3])
        return Power(body, n)

    def _unknown_directive(self, s, loc, t):
        line, col = pp.lineno(loc, s), pp.col(loc, s)
        raise UnknownDirective(f"unknown directive '{t[0]}' at line {line}, col {col}")

    def _make_precondition(self, t):
        loads = []
        for item in t[0].items:
            if not isinstance(item, Directive) or not item.is_load:
                raise MalformedAttribute("precondition may only contain M directives")
            loads.append(item)
        return Seq(tuple(loads))

    def _make_gts(self, t):
        pre, body = t[0], t[1]
        return GtsAst(body=body if body is not None else Seq(),
                      precondition=pre.items if pre is not None else ())


def _strip_comments(text: str) -> str:
    return re.sub(r"#[^\n]*", "", text)


def _reject_nested_mutation(node: Node, inside: bool):
    is_mutation = isinstance(node, MUTATION_NODES)
    if is_mutation and inside:
        raise NestedMutation("offmut/linemut cannot be nested")
    for child in iter_children(node):
        _reject_nested_mutation(child, inside or is_mutation)


def parse_gts(text: str) -> GtsAst:
    """Parse GTS text into an AST"""
    return GtsParser().parse(text)


def load_gts_file(path: Union[str, Path]) -> GtsAst:
    """Read and parse a .gts file"""
    return parse_gts(read_text_file(path))


# Rendering

def _render_directive(d: Directive) -> str:
    if d.kind is DirectiveKind.MEM:
        attrs: List[str] = []
        if d.tag is not None:
            attrs.append(f"t={d.tag}")
        if d.set is not None:
            attrs.append(f"s={d.set}")
        if d.word is not None:
            attrs.append(f"w={d.word}")
        return "M[" + ",".join(attrs) + "]" if attrs else "M"
    if d.kind is DirectiveKind.ARITH:
        return "A(" + ",".join(d.operands) + ")" if d.operands else "A"
    if d.kind is DirectiveKind.NOP:
        return "NOP"
    if d.kind is DirectiveKind.SET_BRANCH:
        return f"SB({d.var},{'true' if d.value else 'false'})"
    return f"B({d.var},{'true' if d.value else 'false'},{d.steps})"


def render_node(node: Node) -> str:
    if isinstance(node, Directive):
        return _render_directive(node)
    if isinstance(node, Seq):
        return " ".join(render_node(item) for item in node.items)
    if isinstance(node, Power):
        suffix = f",{node.attr}+={node.increment}" if node.attr else ""
        return f"({render_node(node.body)})^{{{node.n}{suffix}}}"
    if isinstance(node, Wildcard):
        return f"W({node.n})"
    if isinstance(node, Shuffle):
        return f"shuffle{{{render_node(node.child)}}}"
    if isinstance(node, Subset):
        return f"subset{{{render_node(node.child)}}}"
    if isinstance(node, Slide):
        return f"slide{{{render_node(node.child)}; {node.n}}}"
    if isinstance(node, Merge):
        return f"merge{{{render_node(node.left)} | {render_node(node.right)}}}"
    if isinstance(node, OffsetMutation):
        return f"offmut{{{render_node(node.child)}}}"
    if isinstance(node, LineMutation):
        return f"linemut{{{render_node(node.child)}}}"
    if isinstance(node, Repetition):
        return f"rep{{{render_node(node.child)}; {node.n}}}"
    raise TypeError(f"not a GTS node: {node!r}")


def render_gts(ast: GtsAst) -> str:
    """Render an AST back to GTS text; parse_gts(render_gts(a)) == a"""
    body = render_node(ast.body)
    if ast.precondition:
        pre = "pre{" + " ".join(_render_directive(d) for d in ast.precondition) + "}"
        return f"{pre} {body}".rstrip()
    return body
