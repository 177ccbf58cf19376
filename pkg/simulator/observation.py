# -*- coding: utf-8 -*-
"""
Observations
Behavioural outcome of one execution and the per-testcase aggregate written to archives
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple


@dataclass
class Observation:
    """Difference between the initial and final state of one execution"""
    final_cache: Dict[int, List[Tuple[int, str]]] = field(default_factory=dict)
    previctions: List[Tuple[int, int]] = field(default_factory=list)
    prefetched: List[int] = field(default_factory=list)
    load_hits: List[bool] = field(default_factory=list)
    branches_executed: int = 0
    branches_mispredicted: int = 0
    mispredicted_pcs: List[int] = field(default_factory=list)
    probes: Dict[int, bool] = field(default_factory=dict)
    preloaded_evicted: List[int] = field(default_factory=list)
    streams: int = 0

    @property
    def previction_occurred(self) -> bool:
        return bool(self.previctions)

    @property
    def prefetch_count(self) -> int:
        return len(self.prefetched)

    @property
    def misprediction_rate(self) -> float:
        if not self.branches_executed:
            return 0.0
        return self.branches_mispredicted / self.branches_executed

    def cached_lines(self) -> List[int]:
        return sorted(line for ways in self.final_cache.values() for line, _ in ways)

    def to_dict(self) -> Dict:
        return {
            'final_cache': {str(s): [[line, origin] for line, origin in ways]
                            for s, ways in sorted(self.final_cache.items())},
            'previctions': [list(p) for p in self.previctions],
            'prefetched': list(self.prefetched),
            'load_hits': list(self.load_hits),
            'branches_executed': self.branches_executed,
            'branches_mispredicted': self.branches_mispredicted,
            'mispredicted_pcs': list(self.mispredicted_pcs),
            'probes': {str(a): hit for a, hit in sorted(self.probes.items())},
            'preloaded_evicted': list(self.preloaded_evicted),
            'streams': self.streams,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'Observation':
        return cls(
            final_cache={int(s): [(int(l), o) for l, o in ways] for s, ways in data.get('final_cache', {}).items()},
            previctions=[(int(a), int(b)) for a, b in data.get('previctions', [])],
            prefetched=[int(l) for l in data.get('prefetched', [])],
            load_hits=[bool(h) for h in data.get('load_hits', [])],
            branches_executed=int(data.get('branches_executed', 0)),
            branches_mispredicted=int(data.get('branches_mispredicted', 0)),
            mispredicted_pcs=[int(p) for p in data.get('mispredicted_pcs', [])],
            probes={int(a): bool(h) for a, h in data.get('probes', {}).items()},
            preloaded_evicted=[int(l) for l in data.get('preloaded_evicted', [])],
            streams=int(data.get('streams', 0)),
        )


@dataclass
class ObservationRecord:
    """All trials of one testcase: the archive unit"""
    testcase_id: str
    variant_id: int
    coordinates: Tuple[int, ...]
    mutation_mode: str
    mutated_addresses: Tuple[int, ...]
    load_addresses: Tuple[int, ...]
    mutated_loads: Tuple[int, ...]
    trials: int
    outcomes: Dict[str, Dict[str, int]]
    observation: Observation
    provenance: str = ""
    params: Dict[str, int] = field(default_factory=dict)
    seed: Optional[int] = None

    def to_dict(self) -> Dict:
        return {
            'testcase_id': self.testcase_id,
            'variant_id': self.variant_id,
            'coordinates': list(self.coordinates),
            'mutation_mode': self.mutation_mode,
            'mutated_addresses': list(self.mutated_addresses),
            'load_addresses': list(self.load_addresses),
            'mutated_loads': list(self.mutated_loads),
            'trials': self.trials,
            'outcomes': {k: dict(sorted(v.items())) for k, v in sorted(self.outcomes.items())},
            'observation': self.observation.to_dict(),
            'provenance': self.provenance,
            'params': dict(sorted(self.params.items())),
            'seed': self.seed,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'ObservationRecord':
        return cls(
            testcase_id=data['testcase_id'],
            variant_id=int(data.get('variant_id', 0)),
            coordinates=tuple(data.get('coordinates', ())),
            mutation_mode=data.get('mutation_mode', 'none'),
            mutated_addresses=tuple(data.get('mutated_addresses', ())),
            load_addresses=tuple(data.get('load_addresses', ())),
            mutated_loads=tuple(data.get('mutated_loads', ())),
            trials=int(data.get('trials', 1)),
            outcomes={k: {lk: int(c) for lk, c in v.items()} for k, v in data.get('outcomes', {}).items()},
            observation=Observation.from_dict(data.get('observation', {})),
            provenance=data.get('provenance', ""),
            params={k: int(v) for k, v in data.get('params', {}).items()},
            seed=data.get('seed'),
        )
