"""
Simulator package
Deterministic cache, prefetcher, previction and branch predictor model
"""

from .cache import AccessResult, CacheLine, LineOrigin, ReplacementPolicy, SetAssociativeCache
from .prefetcher import StridePrefetcher, prefetch_count, TESTED_INTERMEDIATE_RANGE
from .previction import PrevictionDetector, PrevictionTrigger
from .branch_predictor import BranchPredictor, BranchOutcome
from .observation import Observation, ObservationRecord
from .machine import SimConfig, Simulator, run_program
from .oracle import eviction_trace, lru_evicts, lru_replay

__all__ = [
    'AccessResult',
    'CacheLine',
    'LineOrigin',
    'ReplacementPolicy',
    'SetAssociativeCache',
    'StridePrefetcher',
    'prefetch_count',
    'TESTED_INTERMEDIATE_RANGE',
    'PrevictionDetector',
    'PrevictionTrigger',
    'BranchPredictor',
    'BranchOutcome',
    'Observation',
    'ObservationRecord',
    'SimConfig',
    'Simulator',
    'run_program',
    'eviction_trace',
    'lru_evicts',
    'lru_replay',
]
