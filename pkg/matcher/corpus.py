# -*- coding: utf-8 -*-
"""
Synthetic Disassembly Corpus
Functions of filler code with planted three-load sequences sharing a base register

Filler loads of one function use pairwise different base registers, none of
them the planted base, so the only sequences the prefetch pattern can match
are the planted ones. The plant log is the ground truth for recall checks.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

MIN_FUNCTION_LENGTH = 12
MAX_FUNCTION_LENGTH = 24
MAX_PLANT_GAP = 5
FILLER_LOAD_SHARE = 0.2
BASE_ADDRESS = 0x10000
REGISTERS = 29

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PlantRecord:
    section: str
    addresses: tuple
    gaps: tuple
    base_register: str

    @property
    def start(self) -> int:
        return self.addresses[0]


@dataclass
class Corpus:
    text: str
    functions: int
    plants: List[PlantRecord] = field(default_factory=list)
    instructions: int = 0

    def plant_index(self) -> Dict[tuple, PlantRecord]:
        return {(p.section, p.start): p for p in self.plants}


def _reg(index: int) -> str:
    return f"x{index}"


class CorpusGenerator:
    """Seeded generator; equal seeds give equal corpora"""

    def __init__(self, seed: int = 0):
        self.rng = np.random.default_rng(seed)
        self.logger = logging.getLogger(__name__)

    def _filler(self, bases: List[int]) -> str:
        rng = self.rng
        roll = rng.random()
        if roll < FILLER_LOAD_SHARE and bases:
            base = bases.pop()
            dest = int(rng.integers(0, REGISTERS))
            if rng.random() < 0.5:
                return f"ldr {_reg(dest)}, [{_reg(base)}, #{8 * int(rng.integers(0, 16))}]"
            return f"ldr {_reg(dest)}, [{_reg(base)}, {_reg(int(rng.integers(0, REGISTERS)))}]"
        return self._non_load()

    def _non_load(self) -> str:
        rng = self.rng
        a, b, c = (_reg(int(r)) for r in rng.integers(0, REGISTERS, size=3))
        choice = int(rng.integers(0, 7))
        if choice == 0:
            return f"add {a}, {b}, {c}"
        if choice == 1:
            return f"sub {a}, {b}, #{int(rng.integers(1, 64))}"
        if choice == 2:
            return f"mov {a}, {b}"
        if choice == 3:
            return f"cmp {a}, {b}"
        if choice == 4:
            return "nop"
        if choice == 5:
            return f"str {a}, [{b}, #{8 * int(rng.integers(0, 16))}]"
        return "b.ne {target}"

    def _plant(self, base: int) -> List[List[str]]:
        """Three loads from [base, ...] separated by 0..5 non-load instructions"""
        rng = self.rng
        blocks = []
        for i in range(3):
            dest, index = (int(r) for r in rng.integers(0, REGISTERS, size=2))
            block = [f"ldr {_reg(dest)}, [{_reg(base)}, {_reg(index)}]"]
            if i < 2:
                block.extend(self._non_load() for _ in range(int(rng.integers(0, MAX_PLANT_GAP + 1))))
            blocks.append(block)
        return blocks

    def generate(self, functions: int = 500, plants: int = 50) -> Corpus:
        if plants > functions:
            raise ValueError(f"cannot plant {plants} sequences into {functions} functions")
        rng = self.rng
        planted = set(int(f) for f in rng.choice(functions, size=plants, replace=False)) if plants else set()

        lines: List[str] = []
        records: List[PlantRecord] = []
        address = BASE_ADDRESS
        total = 0
        for fn in range(functions):
            section = f"fn_{fn:04d}"
            lines.append(f"SECTION {section}")
            length = int(rng.integers(MIN_FUNCTION_LENGTH, MAX_FUNCTION_LENGTH + 1))
            plant_base: Optional[int] = int(rng.integers(0, REGISTERS)) if fn in planted else None
            bases = [int(r) for r in rng.permutation(REGISTERS) if r != plant_base]
            body = [self._filler(bases) for _ in range(length)]

            plant_at = int(rng.integers(0, length + 1)) if plant_base is not None else -1
            plant_addresses, plant_gaps = [], []
            emitted = []
            for position in range(length + 1):
                if position == plant_at:
                    for block in self._plant(plant_base):
                        plant_addresses.append(address + 4 * len(emitted))
                        emitted.extend(block)
                        plant_gaps.append(len(block) - 1)
                if position < length:
                    emitted.append(body[position])

            for instr in emitted:
                lines.append(f"{address:x}: {instr.format(target=f'{address + 8:x}')}")
                address += 4
            total += len(emitted)
            address += 0x40

            if plant_base is not None:
                records.append(PlantRecord(section, tuple(plant_addresses), tuple(plant_gaps[:2]),
                                           _reg(plant_base)))

        self.logger.info(f"Generated corpus: {functions} functions, {total} instructions, "
                         f"{len(records)} planted sequences")
        return Corpus("\n".join(lines) + "\n", functions, records, total)


def generate_corpus(functions: int = 500, plants: int = 50, seed: int = 0) -> Corpus:
    return CorpusGenerator(seed).generate(functions, plants)
