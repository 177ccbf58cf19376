# -*- coding: utf-8 -*-
"""
Instantiator
Turns expanded directive sequences into concrete, executable testcases

Word-offset mutation enumerates every word of the line for each target load,
set-index mutation enumerates every set; coordinates are emitted in
itertools.product order so the stream is reproducible.
"""

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from generator.address_store import AddressStore, InstantiationError
from generator.preprocessor import DirectiveSeq, MutationMode, MutationPlan
from parser.gts_ast import Directive, DirectiveKind
from utils.geometry import CacheGeometry, compose_addr


class InstrKind(Enum):
    LOAD = "load"
    ARITH = "arith"
    NOP = "nop"
    SET_VAR = "setvar"
    BRANCH = "branch"


_KIND_MAP = {
    DirectiveKind.MEM: InstrKind.LOAD,
    DirectiveKind.ARITH: InstrKind.ARITH,
    DirectiveKind.NOP: InstrKind.NOP,
    DirectiveKind.SET_BRANCH: InstrKind.SET_VAR,
    DirectiveKind.BRANCH: InstrKind.BRANCH,
}


@dataclass(frozen=True)
class Instruction:
    """A concrete instruction; only loads carry an address"""
    kind: InstrKind
    addr: Optional[int] = None
    var: Optional[str] = None
    value: Optional[bool] = None
    steps: Optional[int] = None

    @property
    def is_load(self) -> bool:
        return self.kind is InstrKind.LOAD

    def to_dict(self) -> Dict:
        data = {'kind': self.kind.value}
        if self.addr is not None:
            data['addr'] = self.addr
        if self.var is not None:
            data['var'] = self.var
            data['value'] = bool(self.value)
        if self.steps is not None:
            data['steps'] = self.steps
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> 'Instruction':
        return cls(InstrKind(data['kind']), data.get('addr'), data.get('var'),
                   data.get('value'), data.get('steps'))

    @classmethod
    def load(cls, addr: int) -> 'Instruction':
        return cls(InstrKind.LOAD, int(addr))

    @classmethod
    def arith(cls) -> 'Instruction':
        return cls(InstrKind.ARITH)

    @classmethod
    def nop(cls) -> 'Instruction':
        return cls(InstrKind.NOP)

    @classmethod
    def set_var(cls, var: str, value: bool) -> 'Instruction':
        return cls(InstrKind.SET_VAR, var=var, value=bool(value))

    @classmethod
    def branch(cls, var: str, value: bool, steps: int) -> 'Instruction':
        return cls(InstrKind.BRANCH, var=var, value=bool(value), steps=int(steps))


@dataclass(frozen=True)
class Testcase:
    """One program ready for execution"""
    testcase_id: str
    instructions: Tuple[Instruction, ...]
    precondition: Tuple[int, ...] = ()
    run_count: int = 1
    variant_id: int = 0
    coordinates: Tuple[int, ...] = ()
    mutation_mode: str = MutationMode.NONE.value
    mutated_positions: Tuple[int, ...] = ()
    provenance: str = ""
    params: Dict[str, int] = field(default_factory=dict, compare=False, hash=False)

    @property
    def load_addresses(self) -> List[int]:
        return [i.addr for i in self.instructions if i.is_load]

    @property
    def mutated_addresses(self) -> List[int]:
        return [self.instructions[p].addr for p in self.mutated_positions]

    def to_dict(self) -> Dict:
        return {
            'testcase_id': self.testcase_id,
            'variant_id': self.variant_id,
            'instructions': [i.to_dict() for i in self.instructions],
            'precondition': list(self.precondition),
            'run_count': self.run_count,
            'coordinates': list(self.coordinates),
            'mutation_mode': self.mutation_mode,
            'mutated_positions': list(self.mutated_positions),
            'provenance': self.provenance,
            'params': dict(self.params),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'Testcase':
        return cls(
            testcase_id=data['testcase_id'],
            instructions=tuple(Instruction.from_dict(i) for i in data['instructions']),
            precondition=tuple(data.get('precondition', ())),
            run_count=int(data.get('run_count', 1)),
            variant_id=int(data.get('variant_id', 0)),
            coordinates=tuple(data.get('coordinates', ())),
            mutation_mode=data.get('mutation_mode', MutationMode.NONE.value),
            mutated_positions=tuple(data.get('mutated_positions', ())),
            provenance=data.get('provenance', ""),
            params=dict(data.get('params', {})),
        )


def make_testcase_id(variant_id: int, index: int) -> str:
    return f"v{variant_id:04d}-{index:08d}"


def _axis(plan: MutationPlan, geom: CacheGeometry) -> range:
    if plan.mode is MutationMode.WORD_OFFSET:
        return range(geom.words_per_line)
    if plan.mode is MutationMode.SET_INDEX:
        return range(geom.num_sets)
    return range(1)


def count_testcases(plan: MutationPlan, geom: CacheGeometry) -> int:
    """Number of testcases instantiate() will emit for one variant"""
    if plan.mode is MutationMode.NONE:
        return 1
    return len(_axis(plan, geom)) ** len(plan.targets)


class Instantiator:
    """Resolves one variant against a frozen store and enumerates its mutation plan"""

    def __init__(self, store: AddressStore, geom: CacheGeometry):
        self.store = store
        self.geom = geom
        self.logger = logging.getLogger(__name__)

    def _resolve(self, d: Directive) -> Tuple[int, int, int]:
        return self.store.resolve_tag(d.tag), self.store.resolve_set(d.set), d.word or 0

    def _concrete(self, d: Directive, fields: Optional[Tuple[int, int, int]]) -> Instruction:
        kind = _KIND_MAP[d.kind]
        if kind is InstrKind.LOAD:
            tag, set_index, word = fields
            return Instruction.load(compose_addr(self.geom, tag, set_index, word * 4).value)
        if kind is InstrKind.SET_VAR:
            return Instruction.set_var(d.var, bool(d.value))
        if kind is InstrKind.BRANCH:
            return Instruction.branch(d.var, bool(d.value), d.steps or 1)
        return Instruction(kind)

    def instantiate(self, seq: DirectiveSeq, plan: MutationPlan) -> Iterator[Testcase]:
        if not self.store.frozen:
            self.store.prepare([seq.precondition, seq.instructions])

        precondition = tuple(self.store.alloc_address(d.tag, d.set, d.word).value
                             for d in seq.precondition)
        base = {i: self._resolve(d) for i, d in enumerate(seq.instructions) if d.is_load}
        for position in plan.targets:
            if position not in base:
                raise InstantiationError(f"mutation target {position} is not a load")

        axis = _axis(plan, self.geom)
        targets = plan.targets if plan.mode is not MutationMode.NONE else ()
        self.logger.debug(f"Variant {seq.variant_id}: {count_testcases(plan, self.geom)} testcases "
                          f"({plan.mode.value})")

        for index, coords in enumerate(itertools.product(axis, repeat=len(targets))):
            fields = dict(base)
            for position, value in zip(targets, coords):
                tag, set_index, word = fields[position]
                if plan.mode is MutationMode.WORD_OFFSET:
                    fields[position] = (tag, set_index, value)
                else:
                    fields[position] = (tag, value, word)

            yield Testcase(
                testcase_id=make_testcase_id(seq.variant_id, index),
                instructions=tuple(self._concrete(d, fields.get(i)) for i, d in enumerate(seq.instructions)),
                precondition=precondition,
                run_count=seq.run_count,
                variant_id=seq.variant_id,
                coordinates=tuple(coords),
                mutation_mode=plan.mode.value,
                mutated_positions=tuple(targets),
                provenance=seq.provenance,
            )


def instantiate(seq: DirectiveSeq, plan: MutationPlan, store: AddressStore,
                geom: CacheGeometry) -> Iterator[Testcase]:
    """Stream the testcases of one variant"""
    return Instantiator(store, geom).instantiate(seq, plan)


def instantiate_family(variants: Sequence[Tuple[DirectiveSeq, MutationPlan]], geom: CacheGeometry,
                       seed: int = 0, pins: Optional[Dict[str, int]] = None) -> Iterator[Testcase]:
    """Bind all symbols of a family once, then stream every variant's testcases"""
    store = AddressStore(geom, seed, pins)
    store.prepare(itertools.chain.from_iterable((s.precondition, s.instructions) for s, _ in variants))
    instantiator = Instantiator(store, geom)
    for seq, plan in variants:
        yield from instantiator.instantiate(seq, plan)
