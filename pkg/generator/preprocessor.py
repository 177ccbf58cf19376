# -*- coding: utf-8 -*-
"""
GTS Preprocessor
Expands macros and operators of a parsed GTS into concrete directive sequences
plus their mutation plans

Operator semantics:
- Power(n, attr, i): n copies, the attribute delta grows by i per copy
- Wildcard(n): n non-memory directives drawn from {Arith, Nop} with the seeded generator
- Shuffle / Subset / Merge: permutations, ordered nonempty subsets, order-preserving
  interleavings; structurally identical variants are emitted once
- Slide(n): n variants with every set attribute shifted by 0..n-1
- Repetition(n): trial-count metadata on the variant, not concatenation
"""

import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from parser.gts_ast import (
    Directive, DirectiveKind, GtsAst, LineMutation, Merge, Node, OffsetMutation, Power,
    Repetition, Seq, Shuffle, Slide, Subset, Wildcard,
)
from utils.errors import PlumberError

DEFAULT_EXPANSION_CAP = 1 << 22

WILDCARD_POOL = (Directive(DirectiveKind.ARITH), Directive(DirectiveKind.NOP))


class ExpansionError(PlumberError):
    """Base error of the preprocessor"""
    pass


class ExpansionTooLarge(ExpansionError):
    """Variant count exceeds the configured cap"""

    def __init__(self, limit: int, requested: int):
        self.limit = limit
        self.requested = requested
        super().__init__(f"expansion needs {requested} variants, cap is {limit}")


class MixedMutationModes(ExpansionError):
    """One variant combines word-offset and set-index mutation"""
    pass


class MutationMode(Enum):
    NONE = "none"
    WORD_OFFSET = "word-offset"
    SET_INDEX = "set-index"


@dataclass(frozen=True)
class MutationPlan:
    """Mutation mode plus the instruction positions of the mutated loads"""
    mode: MutationMode = MutationMode.NONE
    targets: Tuple[int, ...] = ()


@dataclass(frozen=True)
class DirectiveSeq:
    """A fully expanded variant"""
    variant_id: int
    precondition: Tuple[Directive, ...]
    instructions: Tuple[Directive, ...]
    provenance: str = ""
    run_count: int = 1

    @property
    def load_positions(self) -> List[int]:
        return [i for i, d in enumerate(self.instructions) if d.is_load]


# Internal variant: directives paired with the mutation mode they are under (or None)
_Marked = Tuple[Tuple[Directive, Optional[MutationMode]], ...]


@dataclass
class _Variant:
    body: _Marked
    provenance: Tuple[str, ...] = ()
    run_count: int = 1


class Preprocessor:
    """Expands one GTS; deterministic for a given seed"""

    def __init__(self, seed: int = 0, cap: int = DEFAULT_EXPANSION_CAP):
        self.seed = seed
        self.cap = cap
        self.logger = logging.getLogger(__name__)
        self._rng = np.random.default_rng(seed)
        self.stats = {'variants': 0, 'duplicates_dropped': 0}

    def expand(self, ast: GtsAst) -> List[Tuple[DirectiveSeq, MutationPlan]]:
        self._rng = np.random.default_rng(self.seed)
        self.stats = {'variants': 0, 'duplicates_dropped': 0}

        variants = self._expand(ast.body)
        results = []
        for index, variant in enumerate(variants):
            plan = _plan_for(variant.body)
            seq = DirectiveSeq(
                variant_id=index,
                precondition=tuple(ast.precondition),
                instructions=tuple(d for d, _ in variant.body),
                provenance="/".join(variant.provenance) or "seq",
                run_count=variant.run_count,
            )
            results.append((seq, plan))

        self.stats['variants'] = len(results)
        self.logger.info(f"Expanded GTS into {len(results)} variants "
                         f"({self.stats['duplicates_dropped']} duplicates omitted)")
        return results

    # Recursive expansion

    def _expand(self, node: Node) -> List[_Variant]:
        if isinstance(node, Directive):
            return [_Variant(((node, None),))]
        if isinstance(node, Seq):
            return self._expand_seq(node)
        if isinstance(node, Power):
            return self._expand_power(node)
        if isinstance(node, Wildcard):
            picks = self._rng.integers(0, len(WILDCARD_POOL), size=node.n) if node.n else []
            return [_Variant(tuple((WILDCARD_POOL[int(p)], None) for p in picks))]
        if isinstance(node, Shuffle):
            return self._each(node.child, "shuffle", self._permutations)
        if isinstance(node, Subset):
            return self._each(node.child, "subset", self._subsets)
        if isinstance(node, Slide):
            return self._expand_slide(node)
        if isinstance(node, Merge):
            return self._expand_merge(node)
        if isinstance(node, OffsetMutation):
            return self._mark(node.child, MutationMode.WORD_OFFSET)
        if isinstance(node, LineMutation):
            return self._mark(node.child, MutationMode.SET_INDEX)
        if isinstance(node, Repetition):
            children = self._expand(node.child)
            for v in children:
                v.run_count *= node.n
                v.provenance = v.provenance + (f"rep{node.n}",)
            return children
        raise ExpansionError(f"unexpected node {type(node).__name__}")

    def _expand_seq(self, node: Seq) -> List[_Variant]:
        parts = [self._expand(item) for item in node.items]
        self._check(math.prod(len(p) for p in parts))

        results = []
        for combo in itertools.product(*parts):
            body = tuple(itertools.chain.from_iterable(v.body for v in combo))
            provenance = tuple(itertools.chain.from_iterable(v.provenance for v in combo))
            run_count = math.prod(v.run_count for v in combo)
            results.append(_Variant(body, provenance, run_count))
        return results or [_Variant(())]

    def _expand_power(self, node: Power) -> List[_Variant]:
        results = []
        for v in self._expand(node.body):
            body = []
            for k in range(node.n):
                for d, mode in v.body:
                    shifted = d.with_attr(node.attr, k * node.increment) if node.attr else d
                    body.append((shifted, mode))
            results.append(_Variant(tuple(body), v.provenance, v.run_count))
        return results

    def _expand_slide(self, node: Slide) -> List[_Variant]:
        results = []
        for v in self._expand(node.child):
            for shift in range(node.n):
                body = tuple((d.with_attr('s', shift) if d.is_load else d, m) for d, m in v.body)
                results.append(_Variant(body, v.provenance + (f"slide{shift}",), v.run_count))
        self._check(len(results))
        return results

    def _expand_merge(self, node: Merge) -> List[_Variant]:
        lefts, rights = self._expand(node.left), self._expand(node.right)
        results = []
        for left in lefts:
            for right in rights:
                p, q = len(left.body), len(right.body)
                self._check(len(results) + math.comb(p + q, p))
                run_count = left.run_count * right.run_count
                for index, body in enumerate(_interleavings(left.body, right.body)):
                    provenance = left.provenance + right.provenance + (f"merge{index}",)
                    results.append(_Variant(body, provenance, run_count))
        return self._dedup(results)

    def _each(self, child: Node, name: str, generate) -> List[_Variant]:
        results = []
        for v in self._expand(child):
            for index, body in enumerate(generate(v.body)):
                results.append(_Variant(body, v.provenance + (f"{name}{index}",), v.run_count))
                if len(results) > self.cap:
                    raise ExpansionTooLarge(self.cap, len(results))
        return self._dedup(results)

    def _permutations(self, body: _Marked) -> Iterable[_Marked]:
        self._check(math.factorial(len(body)))
        seen = set()
        for perm in itertools.permutations(body):
            if perm not in seen:
                seen.add(perm)
                yield perm

    def _subsets(self, body: _Marked) -> Iterable[_Marked]:
        k = len(body)
        self._check((1 << k) - 1)
        for size in range(k, 0, -1):
            for indices in itertools.combinations(range(k), size):
                yield tuple(body[i] for i in indices)

    def _mark(self, child: Node, mode: MutationMode) -> List[_Variant]:
        results = []
        for v in self._expand(child):
            body = []
            for d, current in v.body:
                pinned = mode is MutationMode.WORD_OFFSET and d.word is not None
                body.append((d, mode if d.is_load and not pinned else current))
            results.append(_Variant(tuple(body), v.provenance + (mode.value,), v.run_count))
        return results

    def _dedup(self, variants: List[_Variant]) -> List[_Variant]:
        seen: Dict[_Marked, int] = {}
        unique = []
        for v in variants:
            if v.body in seen:
                self.stats['duplicates_dropped'] += 1
                continue
            seen[v.body] = len(unique)
            unique.append(v)
        return unique

    def _check(self, count: int):
        if count > self.cap:
            raise ExpansionTooLarge(self.cap, count)


def _interleavings(left: _Marked, right: _Marked) -> Iterable[_Marked]:
    p, q = len(left), len(right)
    for positions in itertools.combinations(range(p + q), p):
        chosen = set(positions)
        li, ri = iter(left), iter(right)
        yield tuple(next(li) if i in chosen else next(ri) for i in range(p + q))


def _plan_for(body: _Marked) -> MutationPlan:
    modes = {mode for _, mode in body if mode is not None}
    if not modes:
        return MutationPlan()
    if len(modes) > 1:
        raise MixedMutationModes("a variant may use only one mutation mode")
    mode = modes.pop()
    return MutationPlan(mode, tuple(i for i, (_, m) in enumerate(body) if m is mode))


def expand(ast: GtsAst, seed: int = 0, cap: int = DEFAULT_EXPANSION_CAP) -> List[Tuple[DirectiveSeq, MutationPlan]]:
    """Expand a GTS into (DirectiveSeq, MutationPlan) variants"""
    return Preprocessor(seed, cap).expand(ast)
