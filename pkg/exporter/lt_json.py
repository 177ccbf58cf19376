# -*- coding: utf-8 -*-
"""
Leakage Template JSON Codec
Versioned .lt.json files (schema in docs/lt.schema.json)

Serialization is canonical (sorted keys, two-space indent, trailing newline),
so serialize(deserialize(b)) == b for any file this module wrote.
"""

import json
import logging
from pathlib import Path
from typing import Any, Union

from template.leakage_template import LeakageTemplate, SlotKind
from template.predicate import PredicateSyntaxError, TemplateError, parse_predicate
from utils.text_io import read_text_file

SCHEMA_VERSION = 1

logger = logging.getLogger(__name__)


class SchemaVersionMismatch(TemplateError):
    def __init__(self, found: Any, expected: int = SCHEMA_VERSION):
        self.found = found
        self.expected = expected
        super().__init__(f"LT schema version {found}, reader supports {expected}")


class LtParseError(TemplateError):
    """Malformed template document; path locates the offending field"""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def serialize_lt(lt: LeakageTemplate) -> bytes:
    document = {'schema_version': SCHEMA_VERSION}
    document.update(lt.to_dict())
    text = json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False)
    return (text + "\n").encode('utf-8')


def _require(condition: bool, path: str, message: str):
    if not condition:
        raise LtParseError(path, message)


def _check_document(doc: Any):
    _require(isinstance(doc, dict), "$", "expected an object")
    version = doc.get('schema_version')
    if version != SCHEMA_VERSION:
        raise SchemaVersionMismatch(version)

    slots = doc.get('code_template')
    _require(isinstance(slots, list), "$.code_template", "expected a list of slots")
    kinds = {k.value for k in SlotKind}
    for i, slot in enumerate(slots):
        path = f"$.code_template[{i}]"
        _require(isinstance(slot, dict), path, "expected an object")
        _require(slot.get('kind') in kinds, f"{path}.kind", f"expected one of {sorted(kinds)}")
        _require(isinstance(slot.get('symbol'), str) and slot['symbol'], f"{path}.symbol",
                 "expected a nonempty string")

    behaviors = doc.get('behaviors')
    _require(isinstance(behaviors, list) and behaviors and all(isinstance(b, str) for b in behaviors),
             "$.behaviors", "expected a nonempty list of labels")

    relation_map = doc.get('relation_map')
    _require(isinstance(relation_map, dict), "$.relation_map", "expected an object")
    for behavior, predicates in relation_map.items():
        path = f"$.relation_map.{behavior}"
        _require(behavior in behaviors, path, "behaviour not listed in behaviors")
        _require(isinstance(predicates, list), path, "expected a list of predicates")
        for i, text in enumerate(predicates):
            _require(isinstance(text, str), f"{path}[{i}]", "expected a predicate string")
            try:
                parse_predicate(text)
            except PredicateSyntaxError as e:
                raise LtParseError(f"{path}[{i}]", str(e)) from None

    metadata = doc.get('metadata', {})
    _require(isinstance(metadata, dict), "$.metadata", "expected an object")
    for name, bounds in metadata.get('tested_ranges', {}).items():
        _require(isinstance(bounds, list) and len(bounds) == 2 and all(isinstance(b, int) for b in bounds),
                 f"$.metadata.tested_ranges.{name}", "expected [lo, hi]")


def deserialize_lt(data: Union[bytes, str]) -> LeakageTemplate:
    try:
        doc = json.loads(data)
    except ValueError as e:
        raise LtParseError("$", f"invalid JSON: {e}") from None
    _check_document(doc)
    doc.pop('schema_version')
    return LeakageTemplate.from_dict(doc)


def save_lt(lt: LeakageTemplate, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(serialize_lt(lt))
    logger.info(f"Leakage template written to {path}")
    return path


def load_lt(path: Union[str, Path]) -> LeakageTemplate:
    lt = deserialize_lt(read_text_file(path))
    logger.info(f"Loaded leakage template {Path(path).name}: behaviours {lt.behaviors}")
    return lt
