# -*- coding: utf-8 -*-
"""
Plain-Text Reports
Archive summaries, analysis verdicts and matcher results
"""

import logging
from collections import Counter
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Union

from analyzer.classifier import label_observation, label_sort_key
from analyzer.pipeline import FamilyAnalysis
from exporter.archive import Archive
from matcher.asm_pattern import CandidateSection
from matcher.confusion import ConfusionMatrix
from template.leakage_template import LeakageTemplate

RULE = "=" * 72

logger = logging.getLogger(__name__)


def _section(title: str) -> List[str]:
    return ["", title, "-" * len(title)]


def archive_report(archive: Archive, key: Optional[str] = None) -> str:
    settings = archive.settings
    family = archive.header.get('family', {})
    key = key or settings.get('classification_key', 'previction-occurred')

    lines = [RULE, "Observation archive", RULE]
    lines.append(f"records:      {len(archive.records)}")
    lines.append(f"variants:     {family.get('variants', '?')}")
    lines.append(f"policy:       {settings.get('replacement_policy', 'lru')}  seed {settings.get('root_seed', 0)}")
    lines.append(f"geometry:     {settings.get('geometry', {})}")
    for gts in family.get('gts', []):
        lines.append(f"gts:          {gts}")

    labels: Counter = Counter()
    trials = 0
    for record in archive.records:
        counts = record.outcomes.get(key) or {label_observation(key, record.observation): record.trials}
        labels.update(counts)
        trials += record.trials
    lines += _section(f"Outcomes by {key} ({trials} trials)")
    for label in sorted(labels, key=label_sort_key):
        lines.append(f"  {label:<24} {labels[label]:>10}")
    return "\n".join(lines) + "\n"


def analysis_report(analysis: FamilyAnalysis) -> str:
    lines = [RULE, f"Analysis by {analysis.key}", RULE]
    for cls in analysis.classes:
        lines.append(f"class {cls.label}: {cls.size} testcases")

    for label, result in analysis.analyses.items():
        table = result.table
        lines += _section(f"Class {label}")
        if result.candidates.empty:
            lines.append("  no candidates")
        else:
            flagged = [table.columns[c] for c in result.candidates.columns]
            lines.append(f"  candidate columns: {', '.join(flagged) or '-'}")
            pairs = [f"({table.columns[i]}, {table.columns[j]})" for i, j in result.candidates.pairs]
            if pairs:
                lines.append(f"  candidate pairs:   {', '.join(pairs)}")
        if result.note:
            lines.append(f"  note: {result.note}")
        for relation, verdict in zip(result.relations, result.validations):
            status = "valid" if verdict.valid else f"INVALID ({verdict.reason})"
            lines.append(f"  [{relation.kind.value}] {' and '.join(relation.predicates(table))}: {status}")
            if verdict.witness:
                lines.append(f"      counterexample: {verdict.witness}")

    if analysis.degenerate:
        lines += _section("Degenerate classes")
        lines += [f"  {label}" for label in analysis.degenerate]
    return "\n".join(lines) + "\n"


def lt_report(lt: LeakageTemplate) -> str:
    lines = [RULE, f"Leakage template  {lt.code_template.render()}", RULE]
    for behavior in lt.behaviors:
        conjunctions = lt.relation_map.get(behavior, [])
        marker = " (default)" if behavior == lt.default else ""
        lines.append(f"{behavior}{marker}")
        lines += [f"  {p.text}" for p in conjunctions]
    notes = lt.metadata.get('notes', {})
    if notes:
        lines += _section("Notes")
        lines += [f"  {label}: {note}" for label, note in sorted(notes.items())]
    if lt.tested_ranges:
        lines += _section("Tested ranges")
        lines += [f"  {name}: {lo}..{hi}" for name, (lo, hi) in sorted(lt.tested_ranges.items())]
    return "\n".join(lines) + "\n"


def match_report(candidates: Iterable[CandidateSection], labels: Optional[Dict[str, str]] = None,
                 matrix: Optional[ConfusionMatrix] = None) -> str:
    candidates = list(candidates)
    lines = [RULE, f"Candidates: {len(candidates)}", RULE]
    for c in candidates:
        gaps = ", ".join(f"n{i} = {n}" for i, n in enumerate(c.gaps, 1))
        addresses = " ".join(f"{a:#x}" for a in c.addresses)
        lines.append(f"{c.section:<20} {addresses}  {gaps}")
    if labels:
        lines += _section("Trace labels")
        lines += [f"  {name}: {label}" for name, label in sorted(labels.items())]
    if matrix is not None:
        lines += _section("Confusion matrix")
        lines.append(matrix.render())
    return "\n".join(lines) + "\n"


def write_report(text: str, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding='utf-8')
    logger.info(f"Report written to {path}")
    return path
