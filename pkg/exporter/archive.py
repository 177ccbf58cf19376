# -*- coding: utf-8 -*-
"""
Observation Archive
JSON Lines file: one header line, then one record per testcase ordered by testcase id

Lines are written with sorted keys and compact separators so equal runs give
byte-identical archives.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Union

from simulator.observation import ObservationRecord
from utils.errors import PlumberError
from utils.text_io import read_text_file

ARCHIVE_SCHEMA_VERSION = 1
HEADER_KIND = "plumber-archive"

logger = logging.getLogger(__name__)


class ArchiveError(PlumberError):
    """Unreadable or inconsistent observation archive"""
    pass


@dataclass
class Archive:
    header: Dict[str, Any]
    records: List[ObservationRecord] = field(default_factory=list)

    @property
    def settings(self) -> Dict[str, Any]:
        return self.header.get('config', {}).get('settings', {})

    def by_id(self) -> Dict[str, ObservationRecord]:
        return {r.testcase_id: r for r in self.records}


def _line(data: Dict) -> str:
    return json.dumps(data, sort_keys=True, separators=(',', ':'), ensure_ascii=False)


def make_header(config: Dict[str, Any], family: Dict[str, Any]) -> Dict[str, Any]:
    return {
        'kind': HEADER_KIND,
        'schema_version': ARCHIVE_SCHEMA_VERSION,
        'config': config,
        'family': family,
    }


def write_archive(path: Union[str, Path], header: Dict[str, Any], records: Iterable[ObservationRecord]) -> int:
    """Single appender: records are canonicalised by testcase id before writing"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    ordered = sorted(records, key=lambda r: r.testcase_id)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(_line(header) + "\n")
        for record in ordered:
            f.write(_line(record.to_dict()) + "\n")
    logger.info(f"Archive written: {path} ({len(ordered)} records)")
    return len(ordered)


def read_archive(path: Union[str, Path]) -> Archive:
    path = Path(path)
    try:
        lines = [l for l in read_text_file(path).splitlines() if l.strip()]
    except OSError as e:
        raise ArchiveError(f"cannot read archive {path}: {e}") from e
    if not lines:
        raise ArchiveError(f"archive {path} is empty")

    try:
        header = json.loads(lines[0])
    except ValueError as e:
        raise ArchiveError(f"{path}:1: invalid header: {e}") from None
    if header.get('kind') != HEADER_KIND:
        raise ArchiveError(f"{path}: not an observation archive")
    if header.get('schema_version') != ARCHIVE_SCHEMA_VERSION:
        raise ArchiveError(f"{path}: archive schema {header.get('schema_version')} unsupported")

    records = []
    for lineno, text in enumerate(lines[1:], 2):
        try:
            records.append(ObservationRecord.from_dict(json.loads(text)))
        except (ValueError, KeyError, TypeError) as e:
            raise ArchiveError(f"{path}:{lineno}: bad record: {e}") from None
    logger.info(f"Archive {path.name}: {len(records)} records")
    return Archive(header, records)


def merge_archives(paths: Iterable[Union[str, Path]], output: Union[str, Path]) -> int:
    """Merge shard archives of one family into one canonical archive"""
    archives = [read_archive(p) for p in paths]
    if not archives:
        raise ArchiveError("nothing to merge")

    header = dict(archives[0].header)
    family = dict(header.get('family', {}))
    for other in archives[1:]:
        if other.header.get('family', {}).get('gts') != family.get('gts'):
            raise ArchiveError("archives come from different testcase families")
    family.pop('shard', None)
    header['family'] = family
    config = json.loads(json.dumps(header.get('config', {})))
    config.get('settings', {})['shard'] = '0/1'
    header['config'] = config

    merged: Dict[str, ObservationRecord] = {}
    for archive in archives:
        for record in archive.records:
            if record.testcase_id in merged:
                raise ArchiveError(f"testcase {record.testcase_id} appears in several shards")
            merged[record.testcase_id] = record
    return write_archive(output, header, merged.values())
