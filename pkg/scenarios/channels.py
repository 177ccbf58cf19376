# -*- coding: utf-8 -*-
"""
Leakage Primitives
Sender programs and receivers for previction and prefetching covert channels

PR_FR   previction, flush+reload style: the byte offset of the first triple load
        depends on the secret; the receiver reloads the triple's line
PR_PP   previction, prime+probe style: two receiver lines are primed in the set
        and one of them falls when the sender's loads previct
PRF_CF  prefetching, control flow: a secret-dependent branch changes the
        non-load count before the third stream load, branch included
        (3 for bit 0, 4 for bit 1; 4 vs 7 prefetched lines)
PRF_IS  prefetching, interrupted stream: a miss on another page between the
        last two stream loads adds one prefetched line
PRF_OS  prefetching, occupied streams: with three interleaved streams only the
        first two prefetch; preloading the first stream's head frees a slot

The simulator is reset before every bit, so no bit reads state left by another.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional

import numpy as np

from generator.instantiator import Instruction, Testcase
from simulator.machine import SimConfig, Simulator
from simulator.observation import Observation
from utils.errors import PlumberError
from utils.geometry import DEFAULT_GEOMETRY, CacheGeometry, compose_addr


class ScenarioError(PlumberError):
    """Base error of the scenarios"""
    pass


class ScenarioConfigError(ScenarioError):
    pass


@dataclass
class ChannelScenario:
    name: str
    build: Callable[[int], Testcase]
    decode: Callable[[Observation], int]
    probes: List[int] = field(default_factory=list)
    priming: List[int] = field(default_factory=list)
    description: str = ""


def _bits(bits: Iterable[int]) -> List[int]:
    result = []
    for b in bits:
        if b not in (0, 1, True, False):
            raise ScenarioConfigError(f"not a bit: {b!r}")
        result.append(int(b))
    return result


class _Layout:
    """Random but valid addresses for one scenario instance"""

    def __init__(self, geom: CacheGeometry, seed: int):
        self.geom = geom
        self.rng = np.random.default_rng(seed)

    def tags(self, n: int) -> List[int]:
        return [int(t) for t in self.rng.choice(np.arange(1, 1 << 12), size=n, replace=False)]

    def set_index(self) -> int:
        return int(self.rng.integers(0, self.geom.num_sets))

    def pages(self, n: int) -> List[int]:
        return [int(p) for p in self.rng.choice(np.arange(1, 1 << 10), size=n, replace=False)]

    def addr(self, tag: int, set_index: int, offset: int = 0) -> int:
        return compose_addr(self.geom, tag, set_index, offset).value

    def page_line(self, page: int, line: int) -> int:
        return (page * self.geom.page_size_bytes) + line * self.geom.line_size_bytes


def _previction_flush_reload(geom: CacheGeometry, seed: int) -> ChannelScenario:
    layout = _Layout(geom, seed)
    t, u, v = layout.tags(3)
    s = layout.set_index()
    bus = geom.bus_size_bytes
    target = layout.addr(t, s)

    def build(bit: int) -> Testcase:
        first = 2 if bit else 1
        loads = [layout.addr(t, s, first * bus), target, target, layout.addr(u, s), layout.addr(v, s)]
        return Testcase(f"PR_FR-{bit}", tuple(Instruction.load(a) for a in loads))

    return ChannelScenario("PR_FR", build, lambda obs: int(not obs.probes[target]), [target],
                           description="first triple load on bus 2 (previct) or bus 1 (keep)")


def _previction_prime_probe(geom: CacheGeometry, seed: int) -> ChannelScenario:
    layout = _Layout(geom, seed)
    p1, p2, t, u = layout.tags(4)
    s = layout.set_index()
    bus = geom.bus_size_bytes
    primed = [layout.addr(p1, s), layout.addr(p2, s)]

    def build(bit: int) -> Testcase:
        first = 2 if bit else 1
        loads = [layout.addr(t, s, first * bus), layout.addr(t, s), layout.addr(t, s),
                 layout.addr(u, s), layout.addr(u, s)]
        return Testcase(f"PR_PP-{bit}", tuple(Instruction.load(a) for a in loads), tuple(primed))

    def decode(obs: Observation) -> int:
        return int(not all(obs.probes[a] for a in primed))

    return ChannelScenario("PR_PP", build, decode, list(primed), list(primed),
                           description="receiver primes two lines; previction evicts one of them")


def _prefetch_control_flow(geom: CacheGeometry, seed: int) -> ChannelScenario:
    layout = _Layout(geom, seed)
    x1 = layout.page_line(layout.pages(1)[0], 0)
    line = geom.line_size_bytes
    probe = x1 + 8 * line

    def build(bit: int) -> Testcase:
        program = (
            Instruction.set_var("s", bool(bit)),
            Instruction.load(x1),
            Instruction.load(x1 + line),
            Instruction.branch("s", False, 2),
            Instruction.arith(),
            Instruction.arith(),
            Instruction.arith(),
            Instruction.load(x1 + 2 * line),
        )
        return Testcase(f"PRF_CF-{bit}", program)

    return ChannelScenario("PRF_CF", build, lambda obs: int(obs.probes[probe]), [probe],
                           description="secret branch leaves 3 (bit 0) or 4 (bit 1) non-loads before the third load")


def _prefetch_interrupted_stream(geom: CacheGeometry, seed: int) -> ChannelScenario:
    layout = _Layout(geom, seed)
    page_a, page_b = layout.pages(2)
    a = layout.page_line(page_a, 0)
    x10 = layout.page_line(page_b, int(layout.rng.integers(0, geom.lines_per_page)))
    line = geom.line_size_bytes
    probe = a + 6 * line

    def build(bit: int) -> Testcase:
        program = tuple(Instruction.load(addr) for addr in (a, a + line, x10, a + 2 * line))
        return Testcase(f"PRF_IS-{bit}", program, (x10,) if bit else ())

    return ChannelScenario("PRF_IS", build, lambda obs: int(not obs.probes[probe]), [probe],
                           description="a miss on x10 between the stream loads adds one line")


def _prefetch_occupied_streams(geom: CacheGeometry, seed: int) -> ChannelScenario:
    layout = _Layout(geom, seed)
    line = geom.line_size_bytes
    heads = [layout.page_line(p, 0) for p in layout.pages(3)]
    probe = heads[2] + 3 * line

    def build(bit: int) -> Testcase:
        order = [heads[stream] + k * line for k in range(3) for stream in range(3)]
        return Testcase(f"PRF_OS-{bit}", tuple(Instruction.load(a) for a in order),
                        (heads[0],) if bit else ())

    return ChannelScenario("PRF_OS", build, lambda obs: int(obs.probes[probe]), [probe],
                           description="the third of three interleaved streams prefetches only "
                                       "when the first one is preloaded")


SCENARIOS: Dict[str, Callable[[CacheGeometry, int], ChannelScenario]] = {
    'PR_FR': _previction_flush_reload,
    'PR_PP': _previction_prime_probe,
    'PRF_CF': _prefetch_control_flow,
    'PRF_IS': _prefetch_interrupted_stream,
    'PRF_OS': _prefetch_occupied_streams,
}


def get_scenario(name: str, geom: CacheGeometry = DEFAULT_GEOMETRY, seed: int = 0) -> ChannelScenario:
    factory = SCENARIOS.get(str(name).upper())
    if factory is None:
        raise ScenarioConfigError(f"unknown channel '{name}', expected one of {sorted(SCENARIOS)}")
    return factory(geom, seed)


def transmit_bit(scn: ChannelScenario, bit: int, config: Optional[SimConfig] = None) -> int:
    sim = Simulator(config or SimConfig())
    sim.reset()
    obs = sim.execute(scn.build(bit), scn.probes)
    return scn.decode(obs)


def encode_decode(scn: ChannelScenario, bits: Iterable[int], config: Optional[SimConfig] = None) -> List[int]:
    """Receiver-decoded bits, one fresh simulator state per bit"""
    config = config or SimConfig()
    if config.policy.value != 'lru':
        logging.getLogger(__name__).warning(f"{scn.name} decoding assumes LRU; running {config.policy.value}")
    received = [transmit_bit(scn, bit, config) for bit in _bits(bits)]
    logging.getLogger(__name__).debug(f"{scn.name}: {len(received)} bits transmitted")
    return received


def bit_errors(sent: Iterable[int], received: Iterable[int]) -> int:
    return sum(1 for s, r in zip(sent, received) if int(s) != int(r))
