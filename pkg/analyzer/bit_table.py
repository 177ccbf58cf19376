# -*- coding: utf-8 -*-
"""
Bit Tables
One row per testcase of a behaviour class, one column per mutated load operand

Cells hold full physical addresses; the mutated bit range of each column comes
from the family's mutation mode (word range for offset mutation, set range for
line mutation). nocc = count(select(table, cond)).
"""

import logging
from dataclasses import dataclass, field
from typing import List, Mapping, Optional, Sequence, Tuple

import numpy as np

from analyzer.classifier import AnalysisError, BehaviorClass, UNSTABLE
from generator.preprocessor import MutationMode
from simulator.observation import ObservationRecord
from utils.geometry import CacheGeometry, Field

logger = logging.getLogger(__name__)


class BadRange(AnalysisError):
    """Condition refers to a column or bit range the table does not have"""
    pass


class DegenerateTable(AnalysisError):
    """No column carries a mutated bit"""
    pass


def bits_of(values: np.ndarray, lo: int, hi: int) -> np.ndarray:
    """Bits lo..hi of every value, right-aligned, as int64"""
    mask = np.uint64((1 << (hi - lo + 1)) - 1)
    return ((values >> np.uint64(lo)) & mask).astype(np.int64)


@dataclass(frozen=True)
class BitRange:
    """Inclusive bit range of one column"""
    column: int
    lo: int
    hi: int

    @property
    def width(self) -> int:
        return self.hi - self.lo + 1

    @property
    def modulus(self) -> int:
        return 1 << self.width

    def sub_ranges(self) -> List['BitRange']:
        """All contiguous sub-ranges, narrowest first"""
        result = []
        for width in range(1, self.width + 1):
            for lo in range(self.lo, self.hi - width + 2):
                result.append(BitRange(self.column, lo, lo + width - 1))
        return result


@dataclass
class BitTable:
    label: str
    testcase_ids: List[str]
    columns: List[str]
    values: np.ndarray
    mutated: List[Optional[Tuple[int, int]]]
    geom: CacheGeometry
    constant_mask: List[int] = field(default_factory=list)

    def __post_init__(self):
        if not self.constant_mask:
            self.constant_mask = self._constant_mask()

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1] if self.values.ndim == 2 else 0

    def _constant_mask(self) -> List[int]:
        if self.rows == 0:
            return [self.geom.addr_mask] * self.width
        first = self.values[0]
        varying = np.bitwise_or.reduce(self.values ^ first, axis=0)
        return [int(~int(v)) & self.geom.addr_mask for v in varying]

    def column_index(self, name) -> int:
        if isinstance(name, (int, np.integer)):
            if not 0 <= int(name) < self.width:
                raise BadRange(f"column {name} out of range")
            return int(name)
        try:
            return self.columns.index(name)
        except ValueError:
            raise BadRange(f"unknown column '{name}'") from None

    def mutated_range(self, column) -> Optional[BitRange]:
        index = self.column_index(column)
        bounds = self.mutated[index]
        return BitRange(index, *bounds) if bounds else None

    def mutated_ranges(self) -> List[BitRange]:
        return [r for r in (self.mutated_range(i) for i in range(self.width)) if r is not None]

    def bits(self, column, lo: int, hi: int) -> np.ndarray:
        index = self.column_index(column)
        if lo < 0 or hi < lo or hi >= self.geom.addr_bits:
            raise BadRange(f"bit range [{lo}..{hi}] invalid")
        return bits_of(self.values[:, index], lo, hi)

    def range_values(self, r: BitRange) -> np.ndarray:
        return self.bits(r.column, r.lo, r.hi)

    def select_rows(self, mask: np.ndarray) -> 'BitTable':
        ids = [tid for tid, keep in zip(self.testcase_ids, mask) if keep]
        return BitTable(self.label, ids, list(self.columns), self.values[mask], list(self.mutated), self.geom)

    def binary_rows(self) -> List[List[str]]:
        w = self.geom.addr_bits
        return [[format(int(v), f'0{w}b') for v in row] for row in self.values]


def mutated_bounds(mode: str, geom: CacheGeometry) -> Optional[Tuple[int, int]]:
    if mode == MutationMode.WORD_OFFSET.value:
        return geom.field_range(Field.WORD)
    if mode == MutationMode.SET_INDEX.value:
        return geom.field_range(Field.SET)
    return None


def column_names(record: ObservationRecord) -> List[str]:
    """l<i>, i the 1-based position of the operand among the testcase's loads"""
    addresses = list(record.load_addresses)
    if record.mutation_mode == MutationMode.NONE.value or not record.mutated_addresses:
        return [f"l{i + 1}" for i in range(len(addresses))]
    return [f"l{p}" for p in record.mutated_loads]


def build_bit_table(cls: BehaviorClass, records: Mapping[str, ObservationRecord],
                    geom: CacheGeometry) -> BitTable:
    """Rows sorted by testcase id; columns are the mutated operands"""
    if cls.label == UNSTABLE:
        raise AnalysisError("unstable testcases are not tabulated")
    if not cls.members:
        raise AnalysisError(f"class {cls.label} is empty")

    ids = sorted(cls.members)
    first = records[ids[0]]
    mutated = first.mutation_mode != MutationMode.NONE.value and bool(first.mutated_addresses)
    bounds = mutated_bounds(first.mutation_mode, geom)

    rows = []
    for tid in ids:
        record = records[tid]
        rows.append(record.mutated_addresses if mutated else record.load_addresses)

    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise AnalysisError(f"class {cls.label} mixes testcases of different shapes")

    values = np.array(rows, dtype=np.uint64).reshape(len(rows), width)
    logger.debug(f"bit table {cls.label}: {len(rows)} rows x {width} columns, mutated={mutated}")
    return BitTable(
        label=cls.label,
        testcase_ids=ids,
        columns=column_names(first),
        values=values,
        mutated=[bounds] * width,
        geom=geom,
    )


# Selection conditions


class Cond:
    def mask(self, table: BitTable) -> np.ndarray:
        raise NotImplementedError

    def __and__(self, other: 'Cond') -> 'Cond':
        return And(self, other)

    def __invert__(self) -> 'Cond':
        return Not(self)


class Always(Cond):
    def mask(self, table: BitTable) -> np.ndarray:
        return np.ones(table.rows, dtype=bool)


@dataclass
class BitsEq(Cond):
    """col[lo..hi] == value"""
    column: object
    lo: int
    hi: int
    value: int

    def mask(self, table: BitTable) -> np.ndarray:
        if self.value < 0 or self.value >= (1 << (self.hi - self.lo + 1)):
            raise BadRange(f"value {self.value} does not fit [{self.lo}..{self.hi}]")
        return table.bits(self.column, self.lo, self.hi) == self.value


@dataclass
class FieldEq(Cond):
    column: object
    field: Field
    value: int

    def mask(self, table: BitTable) -> np.ndarray:
        lo, hi = table.geom.field_range(self.field)
        return BitsEq(self.column, lo, hi, self.value).mask(table)


class And(Cond):
    def __init__(self, *conds: Cond):
        self.conds = conds

    def mask(self, table: BitTable) -> np.ndarray:
        result = np.ones(table.rows, dtype=bool)
        for c in self.conds:
            result &= c.mask(table)
        return result


class Not(Cond):
    def __init__(self, cond: Cond):
        self.cond = cond

    def mask(self, table: BitTable) -> np.ndarray:
        return ~self.cond.mask(table)


def select(table: BitTable, cond: Cond) -> BitTable:
    return table.select_rows(cond.mask(table))


def count(table: BitTable) -> int:
    return table.rows


def nocc(table: BitTable, cond: Cond) -> int:
    """Number of rows satisfying cond"""
    return count(select(table, cond))


def occurrence_counts(table: BitTable, ranges: Sequence[BitRange]) -> np.ndarray:
    """Joint occurrence counts over the value grid of the given ranges"""
    shape = tuple(r.modulus for r in ranges)
    if not ranges:
        return np.array([table.rows])
    flat = np.zeros(table.rows, dtype=np.int64)
    for r in ranges:
        flat = flat * r.modulus + table.range_values(r)
    return np.bincount(flat, minlength=int(np.prod(shape))).reshape(shape)
