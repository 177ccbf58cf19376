# -*- coding: utf-8 -*-
"""
Bit Table CSV Export
One row per testcase, one column per operand, cells as fixed-width binary strings
"""

import csv
import logging
from pathlib import Path
from typing import Dict, Union

from analyzer.bit_table import BitTable
from utils.path_validator import PathValidator

logger = logging.getLogger(__name__)


def write_bit_table(table: BitTable, path: Union[str, Path]) -> Path:
    path = PathValidator.output_file(path)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['testcase_id'] + list(table.columns))
        mutated = []
        for bounds in table.mutated:
            mutated.append(f"{bounds[0]}..{bounds[1]}" if bounds else "")
        writer.writerow(['# mutated'] + mutated)
        for tid, row in zip(table.testcase_ids, table.binary_rows()):
            writer.writerow([tid] + row)
    logger.debug(f"Bit table {table.label}: {table.rows} rows -> {path}")
    return path


def write_bit_tables(tables: Dict[str, BitTable], output_dir: Union[str, Path]) -> Dict[str, Path]:
    output_dir = Path(output_dir)
    written = {}
    for label, table in tables.items():
        name = f"bits_{PathValidator.sanitize_label(label)}.csv"
        written[label] = write_bit_table(table, output_dir / name)
    logger.info(f"Wrote {len(written)} bit tables to {output_dir}")
    return written
