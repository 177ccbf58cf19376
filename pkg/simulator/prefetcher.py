# -*- coding: utf-8 -*-
"""
Stride Prefetcher
Per-page miss history, stream allocation on three equal strides, page-bounded prefetch issue

Rules:
- only demand misses (and hits on a stream's next prefetched line) are observed
- a stream needs three misses in one page with equal line stride d, 1 <= |d| <= 4
- at most two streams are allocated per execution; later sequences are ignored
- the base count depends on the non-load instructions between the last two
  stream loads; a miss on another page in that gap adds one line
- the fifth matching access tops the stream up to four prefetched lines
- prefetches never leave the trigger page
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Deque, Dict, List, Optional

from utils.geometry import CacheGeometry

MAX_STRIDE = 4
MAX_STREAMS = 2
HISTORY_DEPTH = 3
TOP_UP_ACCESS = 5
TOP_UP_TOTAL = 4

# Base prefetch count by intermediate non-load instruction count
_INTERMEDIATE_COUNTS = {0: 3, 1: 3, 2: 3, 3: 4, 4: 7, 5: 3}
DEFAULT_PREFETCH_COUNT = 3
TESTED_INTERMEDIATE_RANGE = (0, 10)


def prefetch_count(intermediate: int) -> int:
    """Base number of lines prefetched for g intermediate instructions"""
    return _INTERMEDIATE_COUNTS.get(intermediate, DEFAULT_PREFETCH_COUNT)


@dataclass
class MissRecord:
    line: int
    instr_idx: int
    nonloads: int
    ordinal: int


@dataclass
class Stream:
    page: int
    stride: int
    next_line: int
    last_prefetched: int
    matches: int = 3
    prefetched: int = 0
    lines: List[int] = field(default_factory=list)


class StridePrefetcher:
    """Stream detector over demand misses; state lives for one execution"""

    def __init__(self, geom: CacheGeometry, issue: Callable[[int], bool]):
        self.geom = geom
        self.issue = issue
        self.logger = logging.getLogger(__name__)
        self.history: Dict[int, Deque[MissRecord]] = {}
        self.streams: List[Stream] = []
        self.prefetched: List[int] = []
        self._ordinal = 0

    def reset(self):
        self.history.clear()
        self.streams.clear()
        self.prefetched.clear()
        self._ordinal = 0

    def _page(self, line: int) -> int:
        return line // self.geom.lines_per_page

    def _stream_for(self, line: int) -> Optional[Stream]:
        for stream in self.streams:
            if stream.next_line == line:
                return stream
        return None

    def on_miss(self, line: int, instr_idx: int, nonloads: int) -> List[int]:
        """Observe a demand miss; returns the lines issued in response"""
        self._ordinal += 1
        stream = self._stream_for(line)
        if stream is not None:
            return self._confirm(stream)

        page = self._page(line)
        history = self.history.setdefault(page, deque(maxlen=HISTORY_DEPTH))
        history.append(MissRecord(line, instr_idx, nonloads, self._ordinal))
        if len(history) < HISTORY_DEPTH or len(self.streams) >= MAX_STREAMS:
            return []

        first, second, third = history
        stride = second.line - first.line
        if stride == 0 or abs(stride) > MAX_STRIDE or third.line - second.line != stride:
            return []

        count = prefetch_count(third.nonloads - second.nonloads)
        if third.ordinal - second.ordinal > 1:
            count += 1

        stream = Stream(page, stride, third.line + stride, third.line)
        self.streams.append(stream)
        history.clear()
        self.logger.debug(f"Stream {len(self.streams)} at line {third.line:#x}, stride {stride}, count {count}")
        return self._issue(stream, count)

    def on_prefetch_hit(self, line: int) -> List[int]:
        stream = self._stream_for(line)
        return self._confirm(stream) if stream is not None else []

    def _confirm(self, stream: Stream) -> List[int]:
        stream.matches += 1
        stream.next_line += stream.stride
        if stream.matches == TOP_UP_ACCESS and stream.prefetched < TOP_UP_TOTAL:
            return self._issue(stream, TOP_UP_TOTAL - stream.prefetched)
        return []

    def _issue(self, stream: Stream, count: int) -> List[int]:
        issued = []
        line = stream.last_prefetched
        for _ in range(count):
            line += stream.stride
            if self._page(line) != stream.page or line < 0:
                break
            stream.last_prefetched = line
            stream.prefetched += 1
            stream.lines.append(line)
            if self.issue(line):
                issued.append(line)
        self.prefetched.extend(issued)
        return issued
