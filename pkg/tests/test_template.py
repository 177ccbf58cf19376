# -*- coding: utf-8 -*-
import json

import pytest

from exporter.lt_json import LtParseError, SchemaVersionMismatch, deserialize_lt, load_lt, save_lt, serialize_lt
from scenarios import build_prefetch_lt, build_previction_lt
from template import (
    CodeTemplate, LeakageTemplate, MissingBinding, PredicateSyntaxError, UNDECIDABLE, UnboundSymbol,
    assemble_lt, conjoin, parse_predicate,
)
from utils.geometry import compose_addr


def _stream_binding(geom, first_set, stride, tag=5):
    return {f"l{i + 1}": compose_addr(geom, tag, first_set + i * stride, 0).value for i in range(3)}


# Predicates


def test_field_arithmetic(geom):
    p = parse_predicate("set(l3) - set(l2) = set(l2) - set(l1) and tag(l1) = tag(l2)")
    assert p.evaluate(_stream_binding(geom, 10, 2), geom=geom)
    binding = _stream_binding(geom, 10, 2)
    binding['l3'] += 64
    assert not p.evaluate(binding, geom=geom)


def test_modular_comparison(geom):
    p = parse_predicate("bus(l1) != bus(l2) + 1 mod 4")
    assert not p.evaluate({'l1': 0x00, 'l2': 0x30}, geom=geom)
    assert p.evaluate({'l1': 0x00, 'l2': 0x00}, geom=geom)


def test_membership_and_counts(geom):
    p = parse_predicate("set(l2) - set(l1) in [-4..4] and n2 in [0..2]")
    binding = _stream_binding(geom, 10, -3)
    assert p.evaluate(binding, {'n2': 2}, geom)
    assert not p.evaluate(binding, {'n2': 3}, geom)


def test_bits_term(geom):
    p = parse_predicate("bits(l1, 4, 5) = 2")
    assert p.evaluate({'l1': 0x20}, geom=geom)


def test_text_is_canonical():
    text = "set(l3) - set(l2) = set(l2) - set(l1) and set(l2) - set(l1) != 0 and n2 = 4"
    assert parse_predicate(text).text == text
    assert parse_predicate("true").text == "true"
    assert parse_predicate("tag(l1)=tag(l2)").text == "tag(l1) = tag(l2)"


def test_conjoin_drops_duplicates():
    p = conjoin("tag(l1) = tag(l2)", "tag(l1) = tag(l2) and set(l1) = 3")
    assert p.text == "tag(l1) = tag(l2) and set(l1) = 3"


def test_syntax_errors():
    for text in ("set(l1) ==", "colour(l1) = 1", "set(l1) in [1..]"):
        with pytest.raises(PredicateSyntaxError):
            parse_predicate(text)


def test_missing_binding(geom):
    with pytest.raises(MissingBinding):
        parse_predicate("tag(l1) = tag(l2)").evaluate({'l1': 0}, geom=geom)
    with pytest.raises(MissingBinding):
        parse_predicate("n1 = 0").evaluate({}, {}, geom)


# Leakage templates


def test_code_template_rendering():
    assert CodeTemplate.with_gaps(3).render() == "l1 #n1 l2 #n2 l3"


def test_unbound_symbol_rejected():
    with pytest.raises(UnboundSymbol):
        assemble_lt(CodeTemplate.with_gaps(3), ["A", "B"], {"A": ["tag(l4) = tag(l1)"]})


def test_single_empty_behaviour_becomes_default():
    lt = assemble_lt(CodeTemplate.with_gaps(1), ["hit", "miss"], {"hit": ["set(l1) = 0"]})
    assert lt.default == "miss"
    assert lt.behaviors == ["hit", "miss"]


def test_empty_behaviours_are_inconclusive():
    lt = assemble_lt(CodeTemplate.with_gaps(1), ["a", "b", "c"], {"a": ["set(l1) = 0"]})
    assert lt.default is None
    assert lt.metadata['notes'] == {"b": "inconclusive", "c": "inconclusive"}


def test_more_specific_conjunction_wins(geom):
    lt = assemble_lt(CodeTemplate.with_gaps(1), ["broad", "narrow", "other"],
                     {"broad": ["set(l1) in [0..7]"], "narrow": ["set(l1) in [0..7] and tag(l1) = 1"]},
                     {'default': 'other'})
    assert lt.behaviors[0] == "narrow"
    assert lt.evaluate({'l1': compose_addr(geom, 1, 3, 0).value}) == "narrow"
    assert lt.evaluate({'l1': compose_addr(geom, 2, 3, 0).value}) == "broad"
    assert lt.evaluate({'l1': compose_addr(geom, 2, 9, 0).value}) == "other"


def test_prefetch_lt_behaviours(geom):
    lt = build_prefetch_lt()
    binding = _stream_binding(geom, 10, 1)
    assert [lt.evaluate(binding, {'n1': 0, 'n2': g}) for g in range(11)] == \
        ["P3", "P3", "P3", "P4", "P7", "P3", "P3", "P3", "P3", "P3", "P3"]
    scattered = {'l1': compose_addr(geom, 5, 10, 0).value, 'l2': compose_addr(geom, 9, 40, 0).value,
                 'l3': compose_addr(geom, 7, 3, 0).value}
    assert lt.evaluate(scattered, {'n1': 0, 'n2': 3}) == "P0"


def test_counts_outside_tested_range_are_undecidable(geom):
    lt = build_prefetch_lt()
    binding = _stream_binding(geom, 10, 1)
    assert lt.evaluate(binding, {'n1': 0, 'n2': 11}) == UNDECIDABLE
    assert lt.evaluate(binding, {'n1': 12, 'n2': 0}) == UNDECIDABLE
    with pytest.raises(MissingBinding):
        lt.evaluate(binding, {'n2': 0})


def test_previction_lt(geom):
    lt = build_previction_lt()
    loads = [(10, 0), (10, 0), (10, 0), (11, 0), (12, 0)]
    binding = {f"l{i + 1}": compose_addr(geom, t, 5, o).value for i, (t, o) in enumerate(loads)}
    counts = {f"n{i}": 0 for i in range(1, 5)}
    assert lt.evaluate(binding, counts) == "previction"
    binding['l1'] += 16
    assert lt.evaluate(binding, counts) == "no-previction"


# Serialization


def test_prefetch_lt_matches_fixture(fixtures_dir):
    assert serialize_lt(build_prefetch_lt()) == (fixtures_dir / "prefetch.lt.json").read_bytes()


def test_fixture_reserializes_byte_identical(fixtures_dir):
    data = (fixtures_dir / "prefetch.lt.json").read_bytes()
    assert serialize_lt(deserialize_lt(data)) == data


def test_save_and_load(tmp_path):
    lt = build_previction_lt()
    path = save_lt(lt, tmp_path / "out" / "previction.lt.json")
    loaded = load_lt(path)
    assert loaded.behaviors == lt.behaviors
    assert [p.text for p in loaded.relation_map['previction']] == [p.text for p in lt.relation_map['previction']]


def test_schema_version_mismatch(fixtures_dir):
    doc = json.loads((fixtures_dir / "prefetch.lt.json").read_text(encoding="utf-8"))
    doc['schema_version'] = 2
    with pytest.raises(SchemaVersionMismatch):
        deserialize_lt(json.dumps(doc))


def test_malformed_documents(fixtures_dir):
    doc = json.loads((fixtures_dir / "prefetch.lt.json").read_text(encoding="utf-8"))
    broken = dict(doc, relation_map={"P3": ["set(l1) =="]})
    with pytest.raises(LtParseError) as info:
        deserialize_lt(json.dumps(broken))
    assert "$.relation_map.P3[0]" in str(info.value)
    with pytest.raises(LtParseError):
        deserialize_lt(json.dumps(dict(doc, behaviors=[])))
    with pytest.raises(LtParseError):
        deserialize_lt("{not json")


def test_leakage_template_needs_behaviours():
    from template import TemplateError
    with pytest.raises(TemplateError):
        LeakageTemplate(CodeTemplate.with_gaps(1), [], {})
