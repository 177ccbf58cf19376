# -*- coding: utf-8 -*-
"""
Assembly Patterns
Regex-like patterns over instruction classes with operand captures and backreferences

    pattern    := (element | gap)+
    element    := CLASS ["(" constraint ("," constraint)* ")"] ["{" INT "}"]
    gap        := "." "{" INT "," INT "}"
    constraint := "op" INT ">" GROUP      capture operand into GROUP
                | "op" INT "=" GROUP      operand equals the earlier capture
                | "op" INT ":" TOKCLASS   operand token class

CLASS is LOAD, STORE, ARITH, BRANCH, NOP or ANY. Token classes: AG (plain
register), QR (opening memory operand "[reg"), RO (register or immediate,
optionally closing the operand), IMM (immediate). A gap matches any
instructions; "{n}" repeats an element n times back to back.
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import pyparsing as pp

from matcher.asm_listing import AsmInstruction, AsmListing, InstrClass, MatcherError

ANY = "ANY"
CLASSES = tuple(c.value for c in InstrClass if c is not InstrClass.OTHER) + (ANY,)

_REGISTER = r"(?:[xw](?:[12]?[0-9]|30)|sp|xzr|wzr)"
_IMMEDIATE = r"(?:#-?(?:0x[0-9a-f]+|[0-9]+))"

TOKEN_CLASSES: Dict[str, re.Pattern] = {
    'AG': re.compile(rf"(?i){_REGISTER}"),
    'QR': re.compile(rf"(?i)\[{_REGISTER}\]?!?"),
    'RO': re.compile(rf"(?i)(?:{_REGISTER}|{_IMMEDIATE})\]?!?"),
    'IMM': re.compile(rf"(?i){_IMMEDIATE}"),
}


class PatternSyntaxError(MatcherError):
    pass


class BadBackreference(MatcherError):
    """Reference to a group that is not captured earlier in the pattern"""
    pass


class BadQuantifier(MatcherError):
    """Gap or repeat bounds that cannot match"""
    pass


def normalize_operand(token: str) -> str:
    """Register or immediate without memory-operand brackets"""
    return token.strip().strip("[]!").strip().lower()


@dataclass(frozen=True)
class OperandConstraint:
    index: int
    kind: str
    value: str

    def render(self) -> str:
        sign = {'capture': '>', 'ref': '=', 'token': ':'}[self.kind]
        return f"op{self.index}{sign}{self.value}"


@dataclass(frozen=True)
class PatternElement:
    iclass: str
    constraints: Tuple[OperandConstraint, ...] = ()

    def accepts(self, instr: AsmInstruction, captures: Dict[str, str]) -> Optional[Dict[str, str]]:
        """Captures after matching instr, or None"""
        if self.iclass != ANY and instr.iclass.value != self.iclass:
            return None
        result = captures
        for c in self.constraints:
            if c.index >= len(instr.operands):
                return None
            token = instr.operands[c.index]
            if c.kind == 'token':
                if not TOKEN_CLASSES[c.value].fullmatch(token.strip()):
                    return None
            elif c.kind == 'ref':
                if captures.get(c.value) != normalize_operand(token):
                    return None
            else:
                if result is captures:
                    result = dict(captures)
                result[c.value] = normalize_operand(token)
        return result

    def render(self) -> str:
        if not self.constraints:
            return self.iclass
        return f"{self.iclass}({', '.join(c.render() for c in self.constraints)})"


@dataclass(frozen=True)
class Gap:
    low: int
    high: int

    def render(self) -> str:
        return f".{{{self.low},{self.high}}}"


PatternItem = Union[PatternElement, Gap]


@dataclass(frozen=True)
class AsmPattern:
    items: Tuple[PatternItem, ...]
    source: str = ""

    @property
    def elements(self) -> List[PatternElement]:
        return [i for i in self.items if isinstance(i, PatternElement)]

    @property
    def gaps(self) -> List[Gap]:
        return [i for i in self.items if isinstance(i, Gap)]

    @property
    def captures(self) -> List[str]:
        return [c.value for e in self.elements for c in e.constraints if c.kind == 'capture']

    @property
    def backreferences(self) -> List[str]:
        refs = []
        for e in self.elements:
            for c in e.constraints:
                if c.kind == 'ref' and c.value not in refs:
                    refs.append(c.value)
        return refs

    def render(self) -> str:
        return " ".join(i.render() for i in self.items)


@dataclass
class CandidateSection:
    section: str
    indices: List[int]
    addresses: List[int]
    gaps: List[int]
    captures: Dict[str, str] = field(default_factory=dict)

    @property
    def start(self) -> int:
        return self.addresses[0]

    def to_dict(self) -> Dict:
        return {
            'section': self.section,
            'addresses': [f"{a:#x}" for a in self.addresses],
            'gaps': list(self.gaps),
            'captures': dict(self.captures),
        }


# Compilation


def _build_grammar() -> pp.ParserElement:
    integer = pp.Regex(r"\d+").set_parse_action(lambda t: int(t[0]))
    group = pp.Regex(r"[A-Za-z_][A-Za-z0-9_]*")
    token_class = pp.one_of(list(TOKEN_CLASSES), as_keyword=True)

    operand = pp.Suppress(pp.CaselessLiteral("op")) + integer
    capture = operand + pp.Literal(">") + group
    ref = operand + pp.Literal("=") + group
    typed = operand + pp.Literal(":") + token_class
    constraint = (typed | capture | ref).set_parse_action(
        lambda t: OperandConstraint(t[0], {'>': 'capture', '=': 'ref', ':': 'token'}[t[1]], t[2]))

    constraints = pp.Suppress("(") + pp.DelimitedList(constraint) + pp.Suppress(")")
    repeat = pp.Suppress("{") + integer + pp.Suppress("}")
    element = (pp.one_of(list(CLASSES), as_keyword=True)("iclass")
               + pp.Optional(pp.Group(constraints))("constraints")
               + pp.Optional(repeat, default=1)("repeat"))
    element.set_parse_action(lambda t: [('element', t.iclass, tuple(t.constraints[0]) if t.constraints else (),
                                         t.repeat)])

    gap = pp.Suppress(".") + pp.Suppress("{") + integer + pp.Suppress(",") + integer + pp.Suppress("}")
    gap.set_parse_action(lambda t: [('gap', t[0], t[1])])

    pattern = pp.OneOrMore(element | gap)
    pattern.ignore(pp.python_style_comment)
    return pattern


_GRAMMAR = _build_grammar()


def compile_pattern(text: str) -> AsmPattern:
    try:
        parsed = _GRAMMAR.parse_string(text, parse_all=True)
    except pp.ParseBaseException as e:
        raise PatternSyntaxError(f"pattern col {e.col}: {e.msg}") from None

    items: List[PatternItem] = []
    defined: List[str] = []
    for entry in parsed:
        if entry[0] == 'gap':
            low, high = entry[1], entry[2]
            if low > high:
                raise BadQuantifier(f"gap .{{{low},{high}}}: minimum above maximum")
            items.append(Gap(low, high))
            continue

        _, iclass, constraints, repeat = entry
        if repeat < 1:
            raise BadQuantifier(f"{iclass}{{{repeat}}}: repeat count must be positive")
        for copy in range(repeat):
            realized = []
            for c in constraints:
                if c.kind == 'ref' and c.value not in defined:
                    raise BadBackreference(f"op{c.index}={c.value} refers to an undefined group")
                if c.kind == 'capture':
                    if copy > 0:
                        c = OperandConstraint(c.index, 'ref', c.value)
                    elif c.value in defined:
                        raise BadBackreference(f"group {c.value} captured twice")
                    else:
                        defined.append(c.value)
                realized.append(c)
            items.append(PatternElement(iclass, tuple(realized)))

    if not any(isinstance(i, PatternElement) for i in items):
        raise PatternSyntaxError("pattern has no instruction element")
    logging.getLogger(__name__).debug(f"Compiled pattern with {len(items)} items, captures {defined}")
    return AsmPattern(tuple(items), text.strip())


# Matching


def _match_at(instrs: List[AsmInstruction], items: Tuple[PatternItem, ...], pos: int, k: int,
              captures: Dict[str, str], matched: List[int]) -> Optional[Tuple[List[int], Dict[str, str]]]:
    if k == len(items):
        return matched, captures
    item = items[k]
    if isinstance(item, Gap):
        for skip in range(item.low, item.high + 1):
            if pos + skip > len(instrs):
                break
            found = _match_at(instrs, items, pos + skip, k + 1, captures, matched)
            if found is not None:
                return found
        return None
    if pos >= len(instrs):
        return None
    updated = item.accepts(instrs[pos], captures)
    if updated is None:
        return None
    return _match_at(instrs, items, pos + 1, k + 1, updated, matched + [pos])


def match_pattern(listing: AsmListing, pattern: AsmPattern) -> List[CandidateSection]:
    """Every start index with a match, per section; smallest gaps win per start"""
    items = pattern.items
    while items and isinstance(items[0], Gap):
        items = items[1:]

    candidates = []
    for section, indices in listing.sections.items():
        instrs = [listing.instructions[i] for i in indices]
        for start in range(len(instrs)):
            found = _match_at(instrs, items, start, 0, {}, [])
            if found is None:
                continue
            positions, captures = found
            candidates.append(CandidateSection(
                section=section,
                indices=[indices[p] for p in positions],
                addresses=[instrs[p].address for p in positions],
                gaps=[b - a - 1 for a, b in zip(positions, positions[1:])],
                captures=captures,
            ))
    logging.getLogger(__name__).info(f"Pattern matched {len(candidates)} candidate sections")
    return candidates
