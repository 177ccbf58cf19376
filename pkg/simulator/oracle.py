# -*- coding: utf-8 -*-
"""
Eviction Oracle
Brute-force true-LRU replay of a line trace, independent of SetAssociativeCache
"""

from typing import Iterable, List, Sequence


def lru_replay(lines: Iterable[int], associativity: int, num_sets: int) -> List[List[int]]:
    """Final per-set contents (oldest first) after replaying line addresses"""
    sets: List[List[int]] = [[] for _ in range(num_sets)]
    for line in lines:
        ways = sets[line % num_sets]
        if line in ways:
            ways.remove(line)
        elif len(ways) == associativity:
            del ways[0]
        ways.append(line)
    return sets


def lru_evicts(target: int, trace: Sequence[int], associativity: int, num_sets: int) -> bool:
    """True iff the target line is absent after loading it, then replaying trace"""
    final = lru_replay([target, *trace], associativity, num_sets)
    return target not in final[target % num_sets]


def eviction_trace(base_tag: int, set_index: int, num_sets: int,
                   steps: int, repeats: int, distinct: int, stride: int) -> List[int]:
    """Line trace of the parameterised eviction program

    steps groups, each repeating `distinct` consecutive tags `repeats` times;
    the first tag of a group advances by `stride` per group.
    """
    trace = []
    for s in range(steps):
        group = [(base_tag + s * stride + d) * num_sets + set_index for d in range(distinct)]
        for _ in range(repeats):
            trace.extend(group)
    return trace
