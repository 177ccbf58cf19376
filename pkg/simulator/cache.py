# -*- coding: utf-8 -*-
"""
Set-Associative Cache
L1 data cache model with LRU, FIFO and seeded random replacement

Each set is a list ordered oldest -> newest. Under LRU a hit moves the line to
the newest position; under FIFO and random the order is insertion order.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from utils.geometry import CacheGeometry


class ReplacementPolicy(Enum):
    LRU = "lru"
    FIFO = "fifo"
    RANDOM = "random"

    @classmethod
    def parse(cls, value) -> 'ReplacementPolicy':
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


class LineOrigin(Enum):
    DEMAND = "demand"
    PREFETCH = "prefetch"
    PRECONDITION = "precondition"


@dataclass
class CacheLine:
    line_addr: int
    origin: LineOrigin = LineOrigin.DEMAND


@dataclass
class AccessResult:
    hit: bool
    line: CacheLine
    evicted: Optional[CacheLine] = None


class SetAssociativeCache:
    """Per-set ordered lines; occupancy never exceeds associativity"""

    def __init__(self, geom: CacheGeometry, policy: ReplacementPolicy = ReplacementPolicy.LRU,
                 rng: Optional[np.random.Generator] = None):
        self.geom = geom
        self.policy = ReplacementPolicy.parse(policy)
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.logger = logging.getLogger(__name__)
        self.sets: Dict[int, List[CacheLine]] = {}

    def clear(self):
        self.sets.clear()

    def set_of_line(self, line_addr: int) -> int:
        return line_addr % self.geom.num_sets

    def line_of(self, addr: int) -> int:
        return self.geom.line_address(addr)

    def _find(self, line_addr: int) -> Tuple[List[CacheLine], Optional[int]]:
        ways = self.sets.setdefault(self.set_of_line(line_addr), [])
        for i, line in enumerate(ways):
            if line.line_addr == line_addr:
                return ways, i
        return ways, None

    def contains_line(self, line_addr: int) -> bool:
        return self._find(line_addr)[1] is not None

    def contains(self, addr: int) -> bool:
        return self.contains_line(self.line_of(addr))

    def lookup(self, line_addr: int) -> Optional[CacheLine]:
        ways, i = self._find(line_addr)
        return ways[i] if i is not None else None

    def _victim(self, ways: List[CacheLine]) -> int:
        if self.policy is ReplacementPolicy.RANDOM:
            return int(self.rng.integers(0, len(ways)))
        return 0

    def access(self, addr: int, origin: LineOrigin = LineOrigin.DEMAND) -> AccessResult:
        """Demand access by byte address"""
        line_addr = self.line_of(addr)
        ways, i = self._find(line_addr)
        if i is not None:
            line = ways[i]
            if self.policy is ReplacementPolicy.LRU:
                ways.append(ways.pop(i))
            return AccessResult(True, line)
        line, evicted = self._fill(ways, line_addr, origin)
        return AccessResult(False, line, evicted)

    def insert_line(self, line_addr: int, origin: LineOrigin) -> Optional[AccessResult]:
        """Fill a line without a demand access; None if it is already present"""
        ways, i = self._find(line_addr)
        if i is not None:
            return None
        line, evicted = self._fill(ways, line_addr, origin)
        return AccessResult(False, line, evicted)

    def _fill(self, ways: List[CacheLine], line_addr: int,
              origin: LineOrigin) -> Tuple[CacheLine, Optional[CacheLine]]:
        evicted = None
        if len(ways) >= self.geom.associativity:
            evicted = ways.pop(self._victim(ways))
        line = CacheLine(line_addr, origin)
        ways.append(line)
        return line, evicted

    def evict_line(self, line_addr: int) -> bool:
        ways, i = self._find(line_addr)
        if i is None:
            return False
        ways.pop(i)
        return True

    def lines_in_set(self, set_index: int) -> List[CacheLine]:
        return list(self.sets.get(set_index, ()))

    def occupancy(self) -> int:
        return sum(len(ways) for ways in self.sets.values())

    def snapshot(self) -> Dict[int, List[Tuple[int, str]]]:
        """set -> [(line address, origin)], oldest first; empty sets omitted"""
        return {s: [(l.line_addr, l.origin.value) for l in ways]
                for s, ways in sorted(self.sets.items()) if ways}
