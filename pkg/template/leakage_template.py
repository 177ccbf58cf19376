# -*- coding: utf-8 -*-
"""
Leakage Template
Code template, behaviour set and ordered behaviour -> predicate map

Evaluation walks the behaviours in order and returns the first one with a
satisfied conjunction. Counts outside the tested ranges give "undecidable";
when nothing matches, the default behaviour (if any) is returned.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Union

from analyzer.classifier import BehaviorClass, UNSTABLE, label_sort_key
from analyzer.pipeline import FamilyAnalysis
from template.predicate import (
    MissingBinding, Predicate, TemplateError, UnboundSymbol, conjoin, parse_predicate,
)
from utils.geometry import CacheGeometry

UNDECIDABLE = "undecidable"
INCONCLUSIVE = "inconclusive"

logger = logging.getLogger(__name__)


class SlotKind(Enum):
    LOAD = "load"
    GAP = "gap"


@dataclass(frozen=True)
class TemplateSlot:
    """A symbolic load, or a run of non-memory instructions of count `symbol`"""
    kind: SlotKind
    symbol: str
    min_count: int = 0
    max_count: Optional[int] = None

    def render(self) -> str:
        return self.symbol if self.kind is SlotKind.LOAD else f"#{self.symbol}"

    def to_dict(self) -> Dict:
        data = {'kind': self.kind.value, 'symbol': self.symbol}
        if self.kind is SlotKind.GAP:
            data['min_count'] = self.min_count
            data['max_count'] = self.max_count
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> 'TemplateSlot':
        return cls(SlotKind(data['kind']), data['symbol'],
                   int(data.get('min_count', 0)), data.get('max_count'))


@dataclass(frozen=True)
class CodeTemplate:
    slots: tuple = ()

    @property
    def loads(self) -> List[str]:
        return [s.symbol for s in self.slots if s.kind is SlotKind.LOAD]

    @property
    def gaps(self) -> List[str]:
        return [s.symbol for s in self.slots if s.kind is SlotKind.GAP]

    def render(self) -> str:
        return " ".join(s.render() for s in self.slots)

    @classmethod
    def with_gaps(cls, loads: int, max_count: Optional[int] = None) -> 'CodeTemplate':
        """l1 #n1 l2 #n2 ... lk"""
        slots = []
        for i in range(1, loads + 1):
            if i > 1:
                slots.append(TemplateSlot(SlotKind.GAP, f"n{i - 1}", 0, max_count))
            slots.append(TemplateSlot(SlotKind.LOAD, f"l{i}"))
        return cls(tuple(slots))

    def to_dict(self) -> List[Dict]:
        return [s.to_dict() for s in self.slots]

    @classmethod
    def from_dict(cls, data: Iterable[Dict]) -> 'CodeTemplate':
        return cls(tuple(TemplateSlot.from_dict(d) for d in data))


@dataclass
class LeakageTemplate:
    code_template: CodeTemplate
    behaviors: List[str]
    relation_map: Dict[str, List[Predicate]]
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.behaviors:
            raise TemplateError("a leakage template needs at least one behaviour")
        unknown = set(self.relation_map) - set(self.behaviors)
        if unknown:
            raise TemplateError(f"relations for unknown behaviours: {sorted(unknown)}")
        check_closed(self)

    @property
    def default(self) -> Optional[str]:
        return self.metadata.get('default')

    @property
    def tested_ranges(self) -> Dict[str, List[int]]:
        return self.metadata.get('tested_ranges', {})

    @property
    def geometry(self) -> CacheGeometry:
        return CacheGeometry.from_dict(self.metadata.get('geometry', {}))

    def symbols(self) -> set:
        return (set(self.code_template.loads) | set(self.code_template.gaps)
                | set(self.metadata.get('parameters', [])) | set(self.tested_ranges))

    def in_tested_range(self, counts: Mapping[str, int]) -> bool:
        for name, (lo, hi) in self.tested_ranges.items():
            if name not in counts:
                raise MissingBinding(f"no value bound to {name}")
            if not int(lo) <= int(counts[name]) <= int(hi):
                return False
        return True

    def evaluate(self, binding: Mapping[str, int], counts: Optional[Mapping[str, int]] = None,
                 geom: Optional[CacheGeometry] = None) -> str:
        """Behaviour label, or "undecidable" """
        counts = dict(counts or {})
        if not self.in_tested_range(counts):
            return UNDECIDABLE
        geom = geom or self.geometry
        for behavior in self.behaviors:
            for conjunction in self.relation_map.get(behavior, []):
                if conjunction.evaluate(dict(binding), counts, geom):
                    return behavior
        return self.default or UNDECIDABLE

    def to_dict(self) -> Dict:
        return {
            'code_template': self.code_template.to_dict(),
            'behaviors': list(self.behaviors),
            'relation_map': {b: [p.text for p in self.relation_map.get(b, [])] for b in self.behaviors},
            'metadata': self.metadata,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'LeakageTemplate':
        return cls(
            code_template=CodeTemplate.from_dict(data['code_template']),
            behaviors=list(data['behaviors']),
            relation_map={b: [parse_predicate(p) for p in preds]
                          for b, preds in data.get('relation_map', {}).items()},
            metadata=dict(data.get('metadata', {})),
        )


def check_closed(lt: LeakageTemplate):
    """Every symbol of every predicate is defined by the template"""
    known = lt.symbols()
    for behavior, conjunctions in lt.relation_map.items():
        for p in conjunctions:
            free = (p.loads() | p.counts()) - known
            if free:
                raise UnboundSymbol(f"{behavior}: '{p.text}' uses undefined {sorted(free)}")


# Assembly


PredicateLike = Union[Predicate, str, Sequence[str]]


def _as_predicate(item: PredicateLike) -> Predicate:
    if isinstance(item, Predicate):
        return item
    if isinstance(item, str):
        return parse_predicate(item)
    return conjoin(*item)


def assemble_lt(template: CodeTemplate, classes: Sequence[Union[BehaviorClass, str]],
                relations: Mapping[str, Sequence[PredicateLike]], metadata: Optional[Dict] = None,
                base: Sequence[str] = ()) -> LeakageTemplate:
    """Group validated relations by behaviour, most specific conjunction first

    A behaviour without relations is kept and noted as inconclusive; when it
    is the only such behaviour next to behaviours that do have relations, it
    becomes the default instead.
    """
    metadata = dict(metadata or {})
    labels = [c.label if isinstance(c, BehaviorClass) else str(c) for c in classes]
    labels = [l for l in labels if l != UNSTABLE]

    relation_map: Dict[str, List[Predicate]] = {}
    for label in labels:
        conjunctions = [_as_predicate(r) for r in relations.get(label, [])]
        conjunctions = [conjoin(*base, p) if base else p for p in conjunctions if p.atoms]
        if conjunctions:
            relation_map[label] = sorted(conjunctions, key=lambda p: -len(p.atoms))

    default = metadata.get('default')
    empty = [l for l in labels if l not in relation_map]
    if default is None and len(empty) == 1 and relation_map:
        default = empty[0]
    if default is not None:
        if default in relation_map:
            logger.info(f"Default behaviour {default}: its {len(relation_map[default])} conjunctions are dropped")
            relation_map.pop(default)
        metadata['default'] = default
        if default not in labels:
            labels.append(default)

    notes = dict(metadata.get('notes', {}))
    for label in labels:
        if label not in relation_map and label != default:
            notes[label] = INCONCLUSIVE
    if notes:
        metadata['notes'] = notes

    def specificity(label: str):
        most = max((len(p.atoms) for p in relation_map.get(label, [])), default=-1)
        return (label == default, -most, label_sort_key(label))

    ordered = sorted(labels, key=specificity)
    lt = LeakageTemplate(template, ordered, relation_map, metadata)
    logger.info(f"Assembled LT with behaviours {ordered} (default {default}, "
                f"{sum(len(v) for v in relation_map.values())} conjunctions)")
    return lt


def lt_from_analysis(analysis: FamilyAnalysis, geom: CacheGeometry, provenance: Sequence[str] = (),
                     tested_ranges: Optional[Mapping[str, Sequence[int]]] = None) -> LeakageTemplate:
    """LT of one analyzed family: one conjunction of validated relations per class"""
    records = list(analysis.records.values())
    loads = len(records[0].load_addresses) if records else 0
    relations = {label: [atoms] for label, atoms in analysis.relations_by_label().items() if atoms}
    metadata = {
        'geometry': geom.to_dict(),
        'provenance': list(provenance),
        'key': analysis.key,
    }
    if tested_ranges:
        metadata['tested_ranges'] = {k: [int(v[0]), int(v[1])] for k, v in sorted(tested_ranges.items())}
    if analysis.degenerate:
        metadata['degenerate'] = list(analysis.degenerate)
    return assemble_lt(CodeTemplate.with_gaps(loads), analysis.classes, relations, metadata)
