# -*- coding: utf-8 -*-
"""
Previction Detector
Sliding window over the last five demand loads

Fires when all five loads target one set, three consecutive loads share a tag
that the other two do not carry, and the bus of the first triple load is not
the direct successor of the bus of the second one.
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Deque, Optional

from utils.geometry import CacheGeometry, Field, extract_field

WINDOW = 5
TRIPLE = 3


@dataclass(frozen=True)
class LoadRecord:
    addr: int
    line: int
    set_index: int
    tag: int
    bus: int
    instr_idx: int


@dataclass(frozen=True)
class PrevictionTrigger:
    line: int
    set_index: int
    instr_idx: int
    triple_start: int


class PrevictionDetector:
    def __init__(self, geom: CacheGeometry):
        self.geom = geom
        self.logger = logging.getLogger(__name__)
        self.window: Deque[LoadRecord] = deque(maxlen=WINDOW)

    def reset(self):
        self.window.clear()

    def record(self, addr: int, instr_idx: int) -> LoadRecord:
        geom = self.geom
        rec = LoadRecord(
            addr=addr,
            line=geom.line_address(addr),
            set_index=extract_field(geom, addr, Field.SET),
            tag=extract_field(geom, addr, Field.TAG),
            bus=extract_field(geom, addr, Field.BUS),
            instr_idx=instr_idx,
        )
        self.window.append(rec)
        return rec

    def check(self) -> Optional[PrevictionTrigger]:
        """Evaluate the window after a load; clears it when previction fires"""
        if len(self.window) < WINDOW:
            return None
        loads = list(self.window)
        if len({r.set_index for r in loads}) != 1:
            return None

        for start in range(WINDOW - TRIPLE + 1):
            triple = loads[start:start + TRIPLE]
            tag = triple[0].tag
            if any(r.tag != tag for r in triple):
                continue
            others = loads[:start] + loads[start + TRIPLE:]
            if any(r.tag == tag for r in others):
                continue
            first, second = triple[0], triple[1]
            if first.bus == (second.bus + 1) % self.geom.buses_per_line:
                continue

            self.window.clear()
            return PrevictionTrigger(first.line, first.set_index, loads[-1].instr_idx, start)
        return None
