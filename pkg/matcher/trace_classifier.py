# -*- coding: utf-8 -*-
"""
Trace Classification
Expected behaviour of a candidate from its dynamic access trace and a leakage template

The first k loads of the trace that touch pairwise different cache lines are
bound to l1..lk (k = loads of the code template); n_i is the number of
instructions between load i and load i+1, taken from instruction addresses.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Tuple, Union

import numpy as np

from analyzer.classifier import label_observation
from generator.instantiator import Instruction, Testcase
from matcher.asm_listing import MatcherError
from simulator.machine import SimConfig, Simulator
from template.leakage_template import LeakageTemplate
from utils.geometry import CacheGeometry
from utils.text_io import read_text_file

INSTRUCTION_SIZE = 4
TRACE_BASE = 0x1000
MAX_TESTED_GAP = 10
MAX_UNTESTED_GAP = 40

logger = logging.getLogger(__name__)


class InsufficientTrace(MatcherError):
    """Fewer distinct-line loads than the template has load slots"""
    pass


@dataclass(frozen=True)
class TraceRecord:
    instr_addr: int
    data_addr: int


AccessTrace = List[TraceRecord]


def read_trace(path: Union[str, Path]) -> AccessTrace:
    trace = []
    for lineno, line in enumerate(read_text_file(path).splitlines(), 1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
            trace.append(TraceRecord(int(data['instr_addr']), int(data['data_addr'])))
        except (ValueError, KeyError, TypeError) as e:
            raise MatcherError(f"{path}:{lineno}: bad trace record: {e}") from None
    return trace


def write_trace(trace: Iterable[TraceRecord], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        for rec in trace:
            f.write(json.dumps({'instr_addr': rec.instr_addr, 'data_addr': rec.data_addr}) + "\n")
    return path


def access_trace(tc: Testcase, base: int = TRACE_BASE) -> AccessTrace:
    """Loads of a straight-line testcase with 4-byte instruction addresses"""
    return [TraceRecord(base + INSTRUCTION_SIZE * i, instr.addr)
            for i, instr in enumerate(tc.instructions) if instr.is_load]


def bind_trace(trace: AccessTrace, loads: int, geom: CacheGeometry) -> Tuple[Dict[str, int], Dict[str, int]]:
    """(load binding, gap counts) of the first `loads` distinct-line accesses"""
    if not trace:
        raise InsufficientTrace("empty access trace")
    chosen: List[TraceRecord] = []
    lines = set()
    for rec in trace:
        line = geom.line_address(rec.data_addr)
        if line in lines:
            continue
        lines.add(line)
        chosen.append(rec)
        if len(chosen) == loads:
            break
    if len(chosen) < loads:
        raise InsufficientTrace(f"trace has {len(chosen)} distinct-line loads, template needs {loads}")

    binding = {f"l{i}": rec.data_addr for i, rec in enumerate(chosen, 1)}
    counts = {}
    for i, (a, b) in enumerate(zip(chosen, chosen[1:]), 1):
        counts[f"n{i}"] = (b.instr_addr - a.instr_addr) // INSTRUCTION_SIZE - 1
    return binding, counts


def classify_trace(trace: AccessTrace, lt: LeakageTemplate, geom: CacheGeometry = None) -> str:
    geom = geom or lt.geometry
    binding, counts = bind_trace(trace, len(lt.code_template.loads), geom)
    label = lt.evaluate(binding, counts, geom)
    logger.debug(f"Trace {counts} -> {label}")
    return label


# Random programs for desk-scale soundness checks


def _stride_lines(rng: np.random.Generator, geom: CacheGeometry) -> List[int]:
    lines_per_page = geom.lines_per_page
    stride = int(rng.integers(1, 5)) * (1 if rng.random() < 0.5 else -1)
    headroom = 7 * abs(stride)
    span = 2 * abs(stride)
    offset = int(rng.integers(0, lines_per_page - span - headroom))
    page = int(rng.integers(1, 64))
    first = offset + span + headroom if stride < 0 else offset
    base = page * lines_per_page
    return [base + first + k * stride for k in range(3)]


def _scattered_lines(rng: np.random.Generator, geom: CacheGeometry) -> List[int]:
    lines_per_page = geom.lines_per_page
    while True:
        lines = [int(l) for l in rng.integers(lines_per_page, 64 * lines_per_page, size=3)]
        if len(set(lines)) < 3:
            continue
        pages = {l // lines_per_page for l in lines}
        d1, d2 = lines[1] - lines[0], lines[2] - lines[1]
        if len(pages) == 1 and d1 == d2 and abs(d1) <= 4:
            continue
        return lines


def random_trace_program(rng: np.random.Generator, geom: CacheGeometry, in_range: bool = True,
                         stride: bool = None) -> Testcase:
    """Three loads with arithmetic gaps; out-of-range programs have a gap above the tested bound"""
    if stride is None:
        stride = bool(rng.random() < 0.5)
    lines = _stride_lines(rng, geom) if stride else _scattered_lines(rng, geom)
    gaps = [int(g) for g in rng.integers(0, MAX_TESTED_GAP + 1, size=2)]
    if not in_range:
        gaps[int(rng.integers(0, 2))] = int(rng.integers(MAX_TESTED_GAP + 1, MAX_UNTESTED_GAP + 1))

    instructions = []
    for i, line in enumerate(lines):
        word = int(rng.integers(0, geom.words_per_line))
        instructions.append(Instruction.load((line << geom.line_bits) + 4 * word))
        if i < 2:
            instructions.extend(Instruction.arith() for _ in range(gaps[i]))
    return Testcase(f"trace-{'in' if in_range else 'out'}", tuple(instructions),
                    params={'n1': gaps[0], 'n2': gaps[1]})


def actual_label(tc: Testcase, config: SimConfig = None, key: str = 'prefetch-count') -> str:
    """Label observed by running the program on a fresh simulator"""
    obs = Simulator(config or SimConfig()).execute(tc)
    return label_observation(key, obs)
