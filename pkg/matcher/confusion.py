# -*- coding: utf-8 -*-
"""
Confusion Report
Actual behaviour (rows) against the behaviour expected from the template (columns)
"""

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from analyzer.classifier import label_sort_key
from matcher.asm_listing import MatcherError
from template.leakage_template import UNDECIDABLE


class LengthMismatch(MatcherError):
    pass


@dataclass
class ConfusionMatrix:
    rows: List[str]
    columns: List[str]
    counts: np.ndarray
    misclassified: int = 0
    undecidable: int = 0

    @property
    def failed(self) -> bool:
        return self.misclassified > 0

    def cell(self, actual: str, expected: str) -> int:
        return int(self.counts[self.rows.index(actual), self.columns.index(expected)])

    def render(self) -> str:
        width = max([len(c) for c in self.columns + self.rows] + [8]) + 2
        lines = ["actual \\ expected".ljust(width * 2) + "".join(c.rjust(width) for c in self.columns)]
        for label, row in zip(self.rows, self.counts):
            lines.append(label.ljust(width * 2) + "".join(str(int(v)).rjust(width) for v in row))
        verdict = "FAIL" if self.failed else "PASS"
        lines.append(f"misclassified: {self.misclassified}  undecidable: {self.undecidable}  [{verdict}]")
        return "\n".join(lines)


def confusion_report(expected: Sequence[str], actual: Sequence[str]) -> ConfusionMatrix:
    """Misclassifications are off-diagonal cells outside the undecidable column"""
    if len(expected) != len(actual):
        raise LengthMismatch(f"{len(expected)} expected labels for {len(actual)} actual labels")

    rows = sorted(set(actual), key=label_sort_key)
    columns = sorted({e for e in expected if e != UNDECIDABLE} | set(rows), key=label_sort_key)
    columns.append(UNDECIDABLE)

    counts = np.zeros((len(rows), len(columns)), dtype=np.int64)
    for e, a in zip(expected, actual):
        counts[rows.index(a), columns.index(e)] += 1

    misclassified = sum(int(counts[i, j]) for i, r in enumerate(rows)
                        for j, c in enumerate(columns) if c != UNDECIDABLE and c != r)
    undecidable = int(counts[:, -1].sum()) if rows else 0
    return ConfusionMatrix(rows, columns, counts, misclassified, undecidable)
