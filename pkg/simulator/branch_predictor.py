# -*- coding: utf-8 -*-
"""
Branch Predictor
Three pattern history tables of tagged 2-bit saturating counters, one 10-bit
history register per table, table selected by branch address mod 3

Entries are keyed by (branch address, history). A table holds at most 1024
entries with LRU replacement; a lookup that finds no entry is a PHT miss,
counts as a misprediction and allocates the entry at weakly-not-taken.
"""

import logging
from collections import OrderedDict
from dataclasses import dataclass
from typing import List, Tuple

NUM_TABLES = 3
TABLE_ENTRIES = 1024
HISTORY_BITS = 10
WEAKLY_NOT_TAKEN = 1
COUNTER_MAX = 3


@dataclass
class BranchOutcome:
    address: int
    taken: bool
    predicted: bool
    pht_miss: bool

    @property
    def mispredicted(self) -> bool:
        return self.pht_miss or self.predicted != self.taken


class BranchPredictor:
    def __init__(self, tables: int = NUM_TABLES, entries: int = TABLE_ENTRIES,
                 history_bits: int = HISTORY_BITS):
        self.num_tables = tables
        self.capacity = entries
        self.history_bits = history_bits
        self.history_mask = (1 << history_bits) - 1
        self.logger = logging.getLogger(__name__)
        self.reset()

    def reset(self):
        self.tables: List[OrderedDict] = [OrderedDict() for _ in range(self.num_tables)]
        self.bhr: List[int] = [0] * self.num_tables
        self.executed = 0
        self.mispredicted = 0

    def _key(self, address: int) -> Tuple[int, Tuple[int, int]]:
        table = address % self.num_tables
        return table, (address, self.bhr[table])

    def execute(self, address: int, taken: bool) -> BranchOutcome:
        table, key = self._key(address)
        pht = self.tables[table]
        counter = pht.get(key)
        pht_miss = counter is None
        if pht_miss:
            counter = WEAKLY_NOT_TAKEN
            if len(pht) >= self.capacity:
                pht.popitem(last=False)
        else:
            pht.move_to_end(key)

        outcome = BranchOutcome(address, taken, counter >= 2, pht_miss)
        pht[key] = min(counter + 1, COUNTER_MAX) if taken else max(counter - 1, 0)
        self.bhr[table] = ((self.bhr[table] << 1) | int(taken)) & self.history_mask

        self.executed += 1
        if outcome.mispredicted:
            self.mispredicted += 1
        return outcome

    def occupancy(self) -> List[int]:
        return [len(t) for t in self.tables]
