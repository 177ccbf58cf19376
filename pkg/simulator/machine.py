# -*- coding: utf-8 -*-
"""
Simulator
In-order execution of testcases against the cache, prefetcher, previction
detector and branch predictor

Cache contents and predictor state persist across executions until reset();
prefetcher streams, the previction window and branch variables are
per-execution.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from generator.instantiator import Instruction, InstrKind, Testcase
from simulator.branch_predictor import BranchPredictor
from simulator.cache import AccessResult, LineOrigin, ReplacementPolicy, SetAssociativeCache
from simulator.observation import Observation
from simulator.prefetcher import StridePrefetcher
from simulator.previction import PrevictionDetector, PrevictionTrigger
from utils.geometry import DEFAULT_GEOMETRY, CacheGeometry


@dataclass
class SimConfig:
    geometry: CacheGeometry = DEFAULT_GEOMETRY
    policy: ReplacementPolicy = ReplacementPolicy.LRU
    seed: int = 0
    enable_prefetcher: bool = True
    enable_previction: bool = True

    def __post_init__(self):
        self.policy = ReplacementPolicy.parse(self.policy)

    @classmethod
    def from_settings(cls, settings: Dict) -> 'SimConfig':
        return cls(
            geometry=CacheGeometry.from_dict(settings.get('geometry', {})),
            policy=ReplacementPolicy.parse(settings.get('replacement_policy', 'lru')),
            seed=int(settings.get('root_seed', 0)),
            enable_prefetcher=bool(settings.get('enable_prefetcher', True)),
            enable_previction=bool(settings.get('enable_previction', True)),
        )


@dataclass
class _Run:
    """Mutable bookkeeping of the execution in progress"""
    obs: Observation = field(default_factory=Observation)
    nonloads: int = 0


class Simulator:
    """Ground-truth model of the memory subsystem and branch predictor"""

    def __init__(self, config: Optional[SimConfig] = None, rng: Optional[np.random.Generator] = None):
        self.config = config or SimConfig()
        self.geom = self.config.geometry
        self.logger = logging.getLogger(__name__)
        self.rng = rng if rng is not None else np.random.default_rng(self.config.seed)
        self.cache = SetAssociativeCache(self.geom, self.config.policy, self.rng)
        self.prefetcher = StridePrefetcher(self.geom, self._issue_prefetch)
        self.previction = PrevictionDetector(self.geom)
        self.predictor = BranchPredictor()
        self.pmu = {'mispredictions': 0, 'previctions': 0, 'prefetches': 0}
        self.instructions_retired = 0
        self._run: Optional[_Run] = None

    def reset(self):
        """Clear cache, streams, window, predictor and counters"""
        self.cache.clear()
        self.prefetcher.reset()
        self.previction.reset()
        self.predictor.reset()
        self.pmu = {k: 0 for k in self.pmu}
        self.instructions_retired = 0

    # Primitive operations

    def cache_access(self, addr: int) -> bool:
        """Demand access without prefetcher or previction side effects; True on hit"""
        return self.cache.access(int(addr)).hit

    def probe(self, addr: int) -> bool:
        """Inspection-mode presence check; does not touch recency"""
        return self.cache.contains(int(addr))

    def branch_execute(self, instr: Instruction, address: int, variables: Dict[str, bool]) -> Tuple[bool, bool]:
        """(taken, mispredicted) for a conditional branch at an instruction address"""
        taken = variables.get(instr.var, False) == bool(instr.value)
        outcome = self.predictor.execute(address, taken)
        if outcome.mispredicted:
            self.pmu['mispredictions'] += 1
        return taken, outcome.mispredicted

    def prefetcher_on_miss(self, line: int, instr_idx: int) -> List[int]:
        nonloads = self._run.nonloads if self._run else 0
        return self.prefetcher.on_miss(line, instr_idx, nonloads)

    def previction_check(self) -> Optional[PrevictionTrigger]:
        trigger = self.previction.check()
        if trigger is not None:
            self._apply_previction(trigger)
        return trigger

    # Execution

    def execute(self, tc: Testcase, probes: Iterable[int] = ()) -> Observation:
        self.prefetcher.reset()
        self.previction.reset()
        self._run = _Run()
        obs = self._run.obs

        for addr in tc.precondition:
            self._note_eviction(self.cache.access(int(addr), LineOrigin.PRECONDITION))

        variables: Dict[str, bool] = {}
        pc = 0
        program = tc.instructions
        while pc < len(program):
            instr = program[pc]
            self.instructions_retired += 1

            if instr.kind is InstrKind.LOAD:
                self._load(instr.addr, pc)
            elif instr.kind is InstrKind.BRANCH:
                self._run.nonloads += 1
                obs.branches_executed += 1
                taken, mispredicted = self.branch_execute(instr, pc, variables)
                if mispredicted:
                    obs.branches_mispredicted += 1
                    obs.mispredicted_pcs.append(pc)
                pc += instr.steps if taken else 1
                continue
            elif instr.kind is InstrKind.SET_VAR:
                self._run.nonloads += 1
                variables[instr.var] = bool(instr.value)
            else:
                self._run.nonloads += 1
            pc += 1

        obs.prefetched = list(self.prefetcher.prefetched)
        obs.streams = len(self.prefetcher.streams)
        obs.final_cache = self.cache.snapshot()
        obs.probes = {int(a): self.probe(a) for a in probes}
        self._run = None
        return obs

    def _load(self, addr: int, pc: int):
        obs = self._run.obs
        result = self.cache.access(addr)
        obs.load_hits.append(result.hit)
        self._note_eviction(result)

        if self.config.enable_prefetcher:
            if not result.hit:
                self.prefetcher_on_miss(result.line.line_addr, pc)
            elif result.line.origin is LineOrigin.PREFETCH:
                self.prefetcher.on_prefetch_hit(result.line.line_addr)

        if self.config.enable_previction:
            self.previction.record(addr, pc)
            self.previction_check()

    def _issue_prefetch(self, line: int) -> bool:
        result = self.cache.insert_line(line, LineOrigin.PREFETCH)
        if result is None:
            return False
        self.pmu['prefetches'] += 1
        self._note_eviction(result)
        return True

    def _apply_previction(self, trigger: PrevictionTrigger):
        obs = self._run.obs if self._run else None
        preloaded = [l for l in self.cache.lines_in_set(trigger.set_index)
                     if l.origin is LineOrigin.PRECONDITION]

        self.cache.evict_line(trigger.line)
        if len(preloaded) == 2:
            victim = preloaded[0].line_addr
            self.cache.evict_line(victim)
            if obs is not None:
                obs.preloaded_evicted.append(victim)

        self.pmu['previctions'] += 1
        if obs is not None:
            obs.previctions.append((trigger.line, trigger.instr_idx))
        self.logger.debug(f"Previction of line {trigger.line:#x} at instruction {trigger.instr_idx}")

    def _note_eviction(self, result: Optional[AccessResult]):
        if result is None or result.evicted is None or self._run is None:
            return
        if result.evicted.origin is LineOrigin.PRECONDITION:
            self._run.obs.preloaded_evicted.append(result.evicted.line_addr)


def run_program(instructions: Iterable[Instruction], precondition: Iterable[int] = (),
                config: Optional[SimConfig] = None, probes: Iterable[int] = ()) -> Observation:
    """Reset a fresh simulator and execute one program"""
    sim = Simulator(config)
    tc = Testcase("adhoc", tuple(instructions), tuple(int(a) for a in precondition))
    return sim.execute(tc, probes)
