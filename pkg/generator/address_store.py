# -*- coding: utf-8 -*-
"""
Address Store
Seeded binding of symbolic tag / set attributes to concrete field values

Binding happens in two phases: `prepare()` scans every directive of a testcase
family and fixes one base value per symbol, then the store is frozen and
`alloc_address()` only applies deltas.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from parser.gts_ast import AttrExpr, DEFAULT_SET, DEFAULT_TAG, Directive, DirectiveKind, Symbol
from utils.errors import PlumberError
from utils.geometry import CacheGeometry, PhysAddr, compose_addr

MAX_DRAWS = 4096


class InstantiationError(PlumberError):
    """Base error of the instantiator"""
    pass


class UnsatisfiableRelation(InstantiationError):
    """Attribute arithmetic leaves the field range"""
    pass


class StoreExhausted(InstantiationError):
    """No unused field value left for a fresh symbol"""
    pass


@dataclass
class _Span:
    """Deltas a symbol is used with"""
    low: int = 0
    high: int = 0

    def widen(self, delta: int):
        self.low = min(self.low, delta)
        self.high = max(self.high, delta)


class AddressStore:
    """Maps tag / set symbols to concrete values, reproducibly under a seed"""

    def __init__(self, geom: CacheGeometry, seed: int = 0, pins: Optional[Dict[str, int]] = None):
        self.geom = geom
        self.seed = seed
        self.pins = dict(pins or {})
        self.logger = logging.getLogger(__name__)
        self._rng = np.random.default_rng(seed)
        self._tags: Dict[Symbol, int] = {}
        self._sets: Dict[Symbol, int] = {}
        self._spans: Dict[Symbol, _Span] = {}
        self._frozen = False
        self.allocation_log: List[Tuple[str, str, int]] = []

    @property
    def frozen(self) -> bool:
        return self._frozen

    # Resolution phase

    def prepare(self, directive_lists: Iterable[Iterable[Directive]], freeze: bool = True) -> 'AddressStore':
        """Bind every symbol used by the family, then freeze"""
        if self._frozen:
            raise InstantiationError("address store is frozen")
        tag_spans: Dict[Symbol, _Span] = {}
        set_symbols: List[Symbol] = []

        for directives in directive_lists:
            for d in directives:
                if not d.is_load:
                    continue
                tag = d.tag or AttrExpr(DEFAULT_TAG)
                tag_spans.setdefault(tag.symbol, _Span(tag.delta, tag.delta)).widen(tag.delta)
                set_expr = d.set or AttrExpr(DEFAULT_SET)
                if set_expr.symbol not in set_symbols:
                    set_symbols.append(set_expr.symbol)

        for symbol in sorted(tag_spans, key=lambda s: s.name):
            if symbol not in self._tags:
                self._bind_tag(symbol, tag_spans[symbol])
        for symbol in sorted(set_symbols, key=lambda s: s.name):
            if symbol not in self._sets:
                self._bind_set(symbol)

        self._frozen = freeze
        self.logger.debug(f"Address store bound {len(self._tags)} tags, {len(self._sets)} sets")
        return self

    def _bind_tag(self, symbol: Symbol, span: _Span):
        max_tag = self.geom.max_tag
        low_base, high_base = -span.low, max_tag - span.high
        if low_base > high_base:
            raise UnsatisfiableRelation(f"tag deltas {span.low}..{span.high} of {symbol} exceed the tag range")

        if symbol.name in self.pins:
            base = int(self.pins[symbol.name])
            if not low_base <= base <= high_base:
                raise UnsatisfiableRelation(f"pinned tag {symbol}={base} leaves the tag range")
        else:
            base = self._draw_tag(low_base, high_base, span)

        self._tags[symbol] = base
        self._spans[symbol] = span
        self.allocation_log.append(("tag", symbol.name, base))

    def _draw_tag(self, low: int, high: int, span: _Span) -> int:
        taken = [(self._tags[sym] + s.low, self._tags[sym] + s.high) for sym, s in self._spans.items()]
        for _ in range(MAX_DRAWS):
            base = int(self._rng.integers(low, high + 1))
            lo, hi = base + span.low, base + span.high
            if all(hi < t_lo or lo > t_hi for t_lo, t_hi in taken):
                return base
        raise StoreExhausted("no free tag range left")

    def _bind_set(self, symbol: Symbol):
        num_sets = self.geom.num_sets
        if symbol.name in self.pins:
            value = int(self.pins[symbol.name])
            if not 0 <= value < num_sets:
                raise UnsatisfiableRelation(f"pinned set {symbol}={value} out of range")
        else:
            free = sorted(set(range(num_sets)) - set(self._sets.values()))
            if not free:
                raise StoreExhausted(f"all {num_sets} set indices already bound")
            value = int(free[int(self._rng.integers(0, len(free)))])
        self._sets[symbol] = value
        self.allocation_log.append(("set", symbol.name, value))

    # Allocation phase

    def resolve_tag(self, expr: Optional[AttrExpr]) -> int:
        expr = expr or AttrExpr(DEFAULT_TAG)
        if expr.symbol not in self._tags:
            raise InstantiationError(f"tag symbol {expr.symbol} was not bound before freezing")
        value = self._tags[expr.symbol] + expr.delta
        if not 0 <= value <= self.geom.max_tag:
            raise UnsatisfiableRelation(f"tag {expr} = {value} outside the tag range")
        return value

    def resolve_set(self, expr: Optional[AttrExpr]) -> int:
        expr = expr or AttrExpr(DEFAULT_SET)
        if expr.symbol not in self._sets:
            raise InstantiationError(f"set symbol {expr.symbol} was not bound before freezing")
        return (self._sets[expr.symbol] + expr.delta) % self.geom.num_sets

    def alloc_address(self, tag: Optional[AttrExpr], set_expr: Optional[AttrExpr],
                      word: Optional[int] = None) -> PhysAddr:
        """Concrete address for (tag, set, word); word defaults to 0"""
        if not self._frozen:
            self.prepare([[Directive(DirectiveKind.MEM, tag=tag, set=set_expr)]], freeze=False)
        word = word or 0
        if not 0 <= word < self.geom.words_per_line:
            raise UnsatisfiableRelation(f"word offset {word} outside the line")
        return compose_addr(self.geom, self.resolve_tag(tag), self.resolve_set(set_expr), word * 4)
