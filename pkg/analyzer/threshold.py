# -*- coding: utf-8 -*-
"""
Parameter Thresholds
Learns minimal-step thresholds of parameterised families (eviction grid over S, C, D, L)

For each combination of the other parameters, the classes along the step
parameter must switch at most once from the negative to the positive label.
Parameters whose value does not change any threshold are dropped from the rule.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from analyzer.classifier import AnalysisError, BehaviorClass, UNSTABLE
from simulator.observation import ObservationRecord

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ThresholdRule:
    """conditions AND step >= minimum"""
    conditions: Tuple[Tuple[str, int], ...]
    step: str
    minimum: int

    def predicate(self) -> str:
        atoms = [f"{name} = {value}" for name, value in self.conditions]
        atoms.append(f"{self.step} >= {self.minimum}")
        return " and ".join(atoms)

    def matches(self, params: Dict[str, int]) -> bool:
        return all(params.get(k) == v for k, v in self.conditions) and params.get(self.step, 0) >= self.minimum


@dataclass
class ThresholdResult:
    positive: str
    negative: str
    rules: List[ThresholdRule] = field(default_factory=list)
    non_monotone: List[Tuple[Tuple[str, int], ...]] = field(default_factory=list)

    def classify(self, params: Dict[str, int]) -> str:
        return self.positive if any(r.matches(params) for r in self.rules) else self.negative


def _labels_by_params(classes: Iterable[BehaviorClass],
                      records: Dict[str, ObservationRecord]) -> List[Tuple[Dict[str, int], str]]:
    result = []
    for cls in classes:
        if cls.label == UNSTABLE:
            continue
        for tid in cls.members:
            result.append((records[tid].params, cls.label))
    return result


def learn_thresholds(classes: Sequence[BehaviorClass], records: Dict[str, ObservationRecord],
                     params: Sequence[str] = ('S', 'C', 'D', 'L'), step: str = 'S',
                     positive: str = 'evict', negative: str = 'no-evict') -> ThresholdResult:
    points = _labels_by_params(classes, records)
    if not points:
        raise AnalysisError("no classified grid points")
    others = [p for p in params if p != step]

    def thresholds(keys: Sequence[str]) -> Tuple[Dict[Tuple, Optional[int]], List[Tuple]]:
        groups: Dict[Tuple, List[Tuple[int, str]]] = {}
        for values, label in points:
            group = tuple((k, int(values[k])) for k in keys)
            groups.setdefault(group, []).append((int(values[step]), label))
        result, broken = {}, []
        for group, series in sorted(groups.items()):
            series.sort()
            minimum = None
            for value, label in series:
                if label == positive and minimum is None:
                    minimum = value
                elif label != positive and minimum is not None:
                    broken.append(group)
                    break
            result[group] = minimum
        return result, broken

    keys = list(others)
    table, broken = thresholds(keys)
    for name in list(others):
        trial = [k for k in keys if k != name]
        reduced, reduced_broken = thresholds(trial)
        consistent = not reduced_broken and all(
            reduced[tuple((k, v) for k, v in group if k != name)] == minimum
            for group, minimum in table.items())
        if consistent and not broken:
            keys, table = trial, reduced

    result = ThresholdResult(positive, negative, non_monotone=broken)
    for group, minimum in table.items():
        if minimum is not None and group not in broken:
            result.rules.append(ThresholdRule(group, step, minimum))
    if broken:
        logger.warning(f"{len(broken)} parameter groups are not monotone in {step}")
    logger.info(f"Learned {len(result.rules)} threshold rules over {', '.join(keys) or step}")
    return result


def learn_count_ranges(classes: Sequence[BehaviorClass], records: Dict[str, ObservationRecord],
                       param: str) -> Dict[str, List[Tuple[int, int]]]:
    """Contiguous value ranges of one swept parameter per behaviour label

    A parameter value whose testcases disagree on the label is left out.
    """
    labels: Dict[int, set] = {}
    for values, label in _labels_by_params(classes, records):
        if param in values:
            labels.setdefault(int(values[param]), set()).add(label)
    if not labels:
        raise AnalysisError(f"no classified testcase carries parameter {param}")

    result: Dict[str, List[Tuple[int, int]]] = {}
    previous: Optional[Tuple[str, int]] = None
    for value in sorted(labels):
        if len(labels[value]) != 1:
            logger.warning(f"{param}={value} maps to several labels: {sorted(labels[value])}")
            previous = None
            continue
        label = next(iter(labels[value]))
        ranges = result.setdefault(label, [])
        if previous == (label, value - 1):
            ranges[-1] = (ranges[-1][0], value)
        else:
            ranges.append((value, value))
        previous = (label, value)
    return result
