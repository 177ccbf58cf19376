# -*- coding: utf-8 -*-
"""
Analysis Pipeline
classify -> bit table per class -> candidates, relations, validation
"""

import logging
import queue
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional

from analyzer.bit_table import BitTable, DegenerateTable, build_bit_table
from analyzer.classifier import DEFAULT_THRESHOLD, UNSTABLE, BehaviorClass, Classifier
from analyzer.relations import TableAnalysis, analyze_table
from simulator.observation import ObservationRecord
from utils.geometry import CacheGeometry


@dataclass
class FamilyAnalysis:
    """Analyzer output for one archive"""
    key: str
    classes: List[BehaviorClass]
    records: Dict[str, ObservationRecord]
    tables: Dict[str, BitTable] = field(default_factory=dict)
    analyses: Dict[str, TableAnalysis] = field(default_factory=dict)
    degenerate: List[str] = field(default_factory=list)
    stats: Dict[str, int] = field(default_factory=dict)

    @property
    def labels(self) -> List[str]:
        return [c.label for c in self.classes if c.label != UNSTABLE]

    def relations_by_label(self) -> Dict[str, List[str]]:
        result = {}
        for label, analysis in self.analyses.items():
            atoms = []
            for relation in analysis.valid_relations:
                atoms.extend(relation.predicates(analysis.table))
            result[label] = atoms
        return result


class AnalysisPipeline:
    """Runs the analyzer over all records of one testcase family"""

    def __init__(self, geom: CacheGeometry, key: str, threshold: float = DEFAULT_THRESHOLD,
                 progress_queue: Optional[queue.Queue] = None):
        self.geom = geom
        self.key = key
        self.threshold = threshold
        self.progress_queue = progress_queue
        self.logger = logging.getLogger(__name__)

    def _update_progress(self, percent: int, message: str):
        if self.progress_queue is not None:
            self.progress_queue.put(("progress", (percent, message)))

    def run(self, records: Iterable[ObservationRecord]) -> FamilyAnalysis:
        by_id = {r.testcase_id: r for r in records}
        classifier = Classifier(self.key, self.threshold)
        classes = classifier.classify(by_id.values())
        result = FamilyAnalysis(self.key, classes, by_id, stats=dict(classifier.stats))

        stable = [c for c in classes if c.label != UNSTABLE]
        self._update_progress(10, f"{len(stable)} behaviour classes")
        for n, cls in enumerate(stable, 1):
            table = build_bit_table(cls, by_id, self.geom)
            result.tables[cls.label] = table
            try:
                analysis = analyze_table(table)
            except DegenerateTable as e:
                self.logger.warning(f"Class {cls.label}: {e}")
                result.degenerate.append(cls.label)
                continue
            result.analyses[cls.label] = analysis
            valid = len(analysis.valid_relations)
            self.logger.info(f"Class {cls.label}: {table.rows} rows, {len(analysis.relations)} relations, "
                             f"{valid} valid{' (' + analysis.note + ')' if analysis.note else ''}")
            self._update_progress(10 + int(90 * n / len(stable)), f"Analyzed class {cls.label}")

        result.stats['degenerate'] = len(result.degenerate)
        return result


def analyze_records(records: Iterable[ObservationRecord], geom: CacheGeometry, key: str,
                    threshold: float = DEFAULT_THRESHOLD) -> FamilyAnalysis:
    return AnalysisPipeline(geom, key, threshold).run(records)
