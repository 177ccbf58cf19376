# -*- coding: utf-8 -*-
import numpy as np
import pytest

from analyzer import (
    AnalysisError, And, AnalysisPipeline, BadRange, BitsEq, BitTable, Classifier, DegenerateTable, FieldEq, Not,
    RelationKind, UNSTABLE, UnknownKey, analyze_table, candidate_selection, count, label_observation,
    learn_count_ranges, learn_thresholds, nocc, select,
)
from analyzer.classifier import label_sort_key
from simulator import Observation, prefetch_count
from simulator.observation import ObservationRecord
from template import parse_predicate
from threads import run_gts
from utils.geometry import Field


def _record(tid, label, key='eviction-of-preloaded', trials=1, params=None, outcomes=None):
    return ObservationRecord(
        testcase_id=tid, variant_id=0, coordinates=(), mutation_mode='none', mutated_addresses=(),
        load_addresses=(), mutated_loads=(), trials=trials,
        outcomes=outcomes or {key: {label: trials}}, observation=Observation(), params=params or {},
    )


def _table(geom, rows, label="c"):
    values = np.array(rows, dtype=np.uint64)
    width = values.shape[1]
    return BitTable(label, [f"t{i:04d}" for i in range(len(rows))], [f"l{i + 1}" for i in range(width)],
                    values, [geom.field_range(Field.WORD)] * width, geom)


# Classification


def test_labels():
    obs = Observation(prefetched=[1, 2, 3], previctions=[(5, 4)])
    assert label_observation('prefetch-count', obs) == "P3"
    assert label_observation('previction-occurred', obs) == "previction"
    assert label_observation('eviction-of-preloaded', obs) == "no-evict"
    assert label_observation('prefetched-address-set', obs, anchor=0) == "+1,+2,+3"
    with pytest.raises(UnknownKey):
        label_observation('colour', obs)


def test_label_order():
    assert sorted(["P10", "unstable", "P3", "P0"], key=label_sort_key) == ["P0", "P3", "P10", "unstable"]


def test_threshold_classification():
    key = 'previction-occurred'
    stable = _record("a", None, outcomes={key: {"previction": 96, "no-previction": 4}}, trials=100)
    shaky = _record("b", None, outcomes={key: {"previction": 60, "no-previction": 40}}, trials=100)
    classes = Classifier(key, 0.95).classify([shaky, stable])
    assert [(c.label, c.members) for c in classes] == [("previction", ["a"]), (UNSTABLE, ["b"])]


def test_classifier_rejects_bad_threshold():
    with pytest.raises(AnalysisError):
        Classifier('previction-occurred', 0.4)


# Bit tables and conditions


def test_conditions(geom):
    table = _table(geom, [[0x00], [0x10], [0x14], [0x30]])
    assert count(table) == 4
    assert nocc(table, FieldEq(0, Field.BUS, 1)) == 2
    assert nocc(table, And(FieldEq("l1", Field.BUS, 1), BitsEq(0, 2, 2, 1))) == 1
    assert nocc(table, Not(FieldEq(0, Field.BUS, 1))) == 2
    assert select(table, FieldEq(0, Field.BUS, 3)).testcase_ids == ["t0003"]


def test_bad_ranges(geom):
    table = _table(geom, [[0x00]])
    with pytest.raises(BadRange):
        table.bits(0, 5, 2)
    with pytest.raises(BadRange):
        table.bits("l9", 0, 1)


def test_degenerate_table(geom):
    table = BitTable("c", ["t0"], ["l1"], np.array([[0]], dtype=np.uint64), [None], geom)
    with pytest.raises(DegenerateTable):
        candidate_selection(table)


def test_uniform_table_has_no_candidates(geom):
    rows = [[4 * a, 4 * b] for a in range(16) for b in range(16)]
    result = analyze_table(_table(geom, rows))
    assert result.candidates.empty
    assert result.note == "no candidates"


# Relation extraction


def _bus(word):
    return word // 4


def test_negated_linear_relation(geom):
    rows = [[4 * a, 4 * b] for a in range(16) for b in range(16) if _bus(a) != (_bus(b) + 1) % 4]
    assert len(rows) == 192
    table = _table(geom, rows)
    candidates = candidate_selection(table)
    assert (0, 1) in candidates.pairs

    result = analyze_table(table)
    negated = [r for r in result.valid_relations if r.kind is RelationKind.NEGATED_LINEAR]
    assert negated
    (text,) = negated[0].predicates(table)
    predicate = parse_predicate(text)
    assert all(predicate.evaluate({'l1': int(a), 'l2': int(b)}, geom=geom) for a, b in rows)
    assert not predicate.evaluate({'l1': 0x10, 'l2': 0x00}, geom=geom)


def test_column_constraint(geom):
    rows = [[4 * a, 4 * b] for a in range(4) for b in range(16)]
    table = _table(geom, rows)
    candidates = candidate_selection(table)
    assert 0 in candidates.columns and 0 in candidates.explained

    result = analyze_table(table)
    constraints = [r for r in result.valid_relations if r.kind is RelationKind.CONSTRAINT]
    assert constraints
    atoms = [parse_predicate(t) for r in constraints for t in r.predicates(table)]
    assert all(p.evaluate({'l1': 0x0c, 'l2': 0}, geom=geom) for p in atoms)
    assert not all(p.evaluate({'l1': 0x10, 'l2': 0}, geom=geom) for p in atoms)


def test_linear_fit_is_unique(geom):
    rows = [[4 * a, 4 * ((3 * a + 5) % 16)] for a in range(16)]
    table = _table(geom, rows)
    result = analyze_table(table)
    (linear,) = [r for r in result.valid_relations if r.kind is RelationKind.LINEAR]
    assert (linear.a, linear.b, linear.modulus) == (3, 5, 16)
    assert [r.column for r in linear.ranges] == [0, 1]

    xs, ys = (table.range_values(r) for r in linear.ranges)
    n = linear.modulus
    fits = [(a, b) for a in range(n) for b in range(n) if np.all(ys == (a * xs + b) % n)]
    assert fits == [(3, 5)]


def test_tied_orientations_are_both_reported(geom):
    rows = [[4 * a, 4 * a] for a in range(16)]
    table = _table(geom, rows)
    result = analyze_table(table)
    linear = [r for r in result.valid_relations if r.kind is RelationKind.LINEAR]
    assert sorted(tuple(r.column for r in rel.ranges) for rel in linear) == [(0, 1), (1, 0)]
    assert all((r.a, r.b) == (1, 0) for r in linear)
    texts = sorted(t for r in linear for t in r.predicates(table))
    assert texts == ["word(l1) = word(l2) mod 16", "word(l2) = word(l1) mod 16"]


def test_pipeline_on_small_previction_family(geom):
    key = 'previction-occurred'
    records = run_gts("offmut{M[t=T] M[t=T,w=0] M[t=T,w=0] M[t=U,w=0] M[t=V,w=0]}",
                      {'classification_key': key, 'enable_prefetcher': False})
    assert len(records) == 16
    analysis = AnalysisPipeline(geom, key).run(records)
    sizes = {c.label: c.size for c in analysis.classes}
    assert sizes == {"previction": 12, "no-previction": 4}

    relations = analysis.relations_by_label()
    for label, expected in (("previction", True), ("no-previction", False)):
        predicate = parse_predicate(" and ".join(relations[label]))
        assert predicate.evaluate({'l1': 0x00}, geom=geom) is expected
        assert predicate.evaluate({'l1': 0x10}, geom=geom) is not expected


# Thresholds


def test_learn_count_ranges():
    records = {}
    for g in range(11):
        tid = f"g{g:02d}"
        records[tid] = _record(tid, f"P{prefetch_count(g)}", key='prefetch-count', params={'n2': g})
    classes = Classifier('prefetch-count').classify(records.values())
    ranges = learn_count_ranges(classes, records, 'n2')
    assert ranges == {'P3': [(0, 2), (5, 10)], 'P4': [(3, 3)], 'P7': [(4, 4)]}


def test_learn_thresholds_drops_irrelevant_parameters():
    records = {}
    for s in range(1, 5):
        for c in (1, 2):
            for d in (1, 2):
                tid = f"s{s}c{c}d{d}"
                label = "evict" if s * c >= 4 else "no-evict"
                records[tid] = _record(tid, label, params={'S': s, 'C': c, 'D': d})
    classes = Classifier('eviction-of-preloaded').classify(records.values())
    result = learn_thresholds(classes, records, params=('S', 'C', 'D'))
    assert sorted(r.predicate() for r in result.rules) == ["C = 1 and S >= 4", "C = 2 and S >= 2"]
    assert result.classify({'S': 3, 'C': 2, 'D': 1}) == "evict"
    assert result.classify({'S': 3, 'C': 1, 'D': 2}) == "no-evict"
