# -*- coding: utf-8 -*-
"""
Classifier
Maps observations to behaviour labels and partitions testcases into behaviour classes

A testcase with several trials joins the class of its majority label only if
that label reaches the agreement threshold; otherwise it is "unstable".
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

from simulator.observation import Observation, ObservationRecord
from utils.errors import PlumberError

UNSTABLE = "unstable"
DEFAULT_THRESHOLD = 0.95


class AnalysisError(PlumberError):
    """Base error of the analyzer"""
    pass


class UnknownKey(AnalysisError):
    """Classification key that no labeler exists for"""
    pass


def _previction(obs: Observation, anchor: Optional[int]) -> str:
    return "previction" if obs.previction_occurred else "no-previction"


def _prefetch_count(obs: Observation, anchor: Optional[int]) -> str:
    return f"P{obs.prefetch_count}"


def _prefetched_set(obs: Observation, anchor: Optional[int]) -> str:
    if not obs.prefetched:
        return "none"
    if anchor is None:
        return ",".join(f"{line:#x}" for line in sorted(obs.prefetched))
    return ",".join(f"{line - anchor:+d}" for line in sorted(obs.prefetched))


def _eviction(obs: Observation, anchor: Optional[int]) -> str:
    return "evict" if obs.preloaded_evicted else "no-evict"


def _misprediction_bucket(obs: Observation, anchor: Optional[int]) -> str:
    return f"M{min(9, int(obs.misprediction_rate * 10))}"


LABELERS = {
    'previction-occurred': _previction,
    'prefetch-count': _prefetch_count,
    'prefetched-address-set': _prefetched_set,
    'eviction-of-preloaded': _eviction,
    'misprediction-rate-bucket': _misprediction_bucket,
}


def label_observation(key: str, obs: Observation, anchor: Optional[int] = None) -> str:
    """Behaviour label of one execution; anchor is the line relative labels refer to"""
    labeler = LABELERS.get(key)
    if labeler is None:
        raise UnknownKey(f"unknown classification key '{key}'")
    return labeler(obs, anchor)


def label_sort_key(label: str) -> Tuple:
    """Natural order: P0 < P3 < P4 < P10, unstable last"""
    if label == UNSTABLE:
        return (1,)
    return (0,) + tuple(int(p) if p.isdigit() else p for p in re.split(r'(\d+)', label))


@dataclass
class BehaviorClass:
    label: str
    members: List[str] = field(default_factory=list)
    trials: Dict[str, Tuple[int, int]] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.members)

    def __contains__(self, testcase_id: str) -> bool:
        return testcase_id in self.trials


class Classifier:
    """Threshold classification of archive records"""

    def __init__(self, key: str, threshold: float = DEFAULT_THRESHOLD):
        if key not in LABELERS:
            raise UnknownKey(f"unknown classification key '{key}'")
        if not 0.5 < threshold <= 1.0:
            raise AnalysisError(f"threshold must be in (0.5, 1], got {threshold}")
        self.key = key
        self.threshold = threshold
        self.logger = logging.getLogger(__name__)
        self.stats = {'classified': 0, 'unstable': 0}

    def _counts(self, record: ObservationRecord) -> Dict[str, int]:
        counts = record.outcomes.get(self.key)
        if counts:
            return counts
        return {label_observation(self.key, record.observation): record.trials}

    def label_record(self, record: ObservationRecord) -> Tuple[str, int, int]:
        """(label, agreeing trials, total trials)"""
        counts = self._counts(record)
        total = sum(counts.values())
        label, fires = max(sorted(counts.items()), key=lambda kv: kv[1])
        if total and fires / total >= self.threshold:
            return label, fires, total
        return UNSTABLE, fires, total

    def classify(self, records: Iterable[ObservationRecord]) -> List[BehaviorClass]:
        classes: Dict[str, BehaviorClass] = {}
        self.stats = {'classified': 0, 'unstable': 0}

        for record in sorted(records, key=lambda r: r.testcase_id):
            label, fires, total = self.label_record(record)
            cls = classes.setdefault(label, BehaviorClass(label))
            cls.members.append(record.testcase_id)
            cls.trials[record.testcase_id] = (fires, total)
            self.stats['unstable' if label == UNSTABLE else 'classified'] += 1

        if self.stats['unstable']:
            self.logger.warning(f"{self.stats['unstable']} testcases unstable under "
                                f"threshold {self.threshold:.2f}; excluded from bit tables")
        result = [classes[label] for label in sorted(classes, key=label_sort_key)]
        self.logger.info(f"Classified {self.stats['classified']} testcases into "
                         f"{len([c for c in result if c.label != UNSTABLE])} classes by {self.key}")
        return result


def classify(records: Iterable[ObservationRecord], key: str,
             threshold: float = DEFAULT_THRESHOLD) -> List[BehaviorClass]:
    return Classifier(key, threshold).classify(records)
