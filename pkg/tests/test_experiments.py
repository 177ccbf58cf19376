# -*- coding: utf-8 -*-
import numpy as np
import pytest

from analyzer import AnalysisError, RelationKind, analyze_records
from exporter.lt_json import serialize_lt
from scenarios import (
    STRIDE_PREDICATE, SUCCESSOR_BUS_RELATION, BusRelation, build_prefetch_lt, build_previction_lt,
    bus_relation_from, eviction_grid, eviction_gts, learn_prefetch_lt, learn_previction_lt, load_witnesses,
    run_bus_relation, run_eviction_grid, run_eviction_stability, run_intermediate_sweep, run_line_mutation,
    run_long_stream, run_minimality, run_ordering, run_ordering_family, run_page_closure, run_preloaded_stream,
    run_priming, run_repetition, run_stream_limit,
)
from scenarios.experiments import DEFAULT_COUNT_RANGES
from template import parse_predicate
from threads import run_gts
from utils.geometry import compose_addr


@pytest.fixture(scope="module")
def witnesses():
    return load_witnesses()


# Previction


def test_witnesses_load(witnesses):
    assert len(witnesses) == 20
    assert all(len(w.loads) == 5 for w in witnesses)


def test_subsets_of_witnesses_do_not_previct(witnesses):
    result = run_minimality(witnesses[:3], mutated_up_to=1)
    assert result['status'] == 'ok', result['errors'][:5]
    assert result['stats']['witness_failures'] == 0
    assert result['stats']['previctions'] == 0


@pytest.mark.slow
def test_minimality_all_witnesses(witnesses):
    result = run_minimality(witnesses)
    assert result['stats']['programs'] > 100000
    assert result['stats']['previctions'] == 0
    assert result['status'] == 'ok'


def test_previcting_orders_keep_the_triple_adjacent(witnesses):
    result = run_ordering(witnesses)
    assert result['stats']['orderings'] == 20 * 120
    assert result['stats']['previcting'] > 0
    assert result['stats']['violations'] == 0


@pytest.mark.slow
def test_ordering_family_relations_match_simulator():
    result = run_ordering_family()
    assert result['stats']['variants'] == 120
    assert result['stats']['testcases'] == 120 * 16
    assert result['stats']['previcting'] > 0
    assert result['stats']['violations'] == 0
    assert result['stats']['disagreements'] == 0
    assert result['stats']['triple_starts'] == [1, 2, 3]


def test_repetition_is_stable():
    result = run_repetition()
    assert result['stats']['trials'] == 10000 * result['stats']['testcases']
    assert "unstable" not in result['stats']['classes']


@pytest.mark.slow
def test_bus_relation_is_negated():
    result = run_bus_relation()
    assert result['stats']['testcases'] == 16 ** 3
    assert result['stats']['negated_linear'] >= 1
    assert result['stats']['disagreements'] == 0
    assert result['status'] == 'ok'
    assert result['bus'] == SUCCESSOR_BUS_RELATION
    assert serialize_lt(result['lt']) == serialize_lt(build_previction_lt())


@pytest.mark.slow
def test_learned_previction_template_matches_shipped():
    result = learn_previction_lt()
    assert result['status'] == 'ok', result['errors'][:5]
    assert serialize_lt(result['lt']) == serialize_lt(build_previction_lt())


def test_bus_relation_atoms():
    assert SUCCESSOR_BUS_RELATION.atom(1, 4) == "bus(l1) != bus(l2) + 1 mod 4"
    assert SUCCESSOR_BUS_RELATION.atom(3, 4) == "bus(l3) != bus(l4) + 1 mod 4"
    assert BusRelation(left=1, right=0, a=3, b=2).atom(1, 4) == "bus(l2) != 3 * bus(l1) + 2 mod 4"
    assert BusRelation(b=0).atom(2, 4) == "bus(l2) != bus(l3) mod 4"


def test_previction_template_per_triple_position():
    lt = build_previction_lt(starts=(2,))
    (conjunction,) = lt.relation_map['previction']
    assert "bus(l2) != bus(l3) + 1 mod 4" in conjunction.text
    assert "tag(l1) != tag(l2)" in conjunction.text
    assert len(build_previction_lt().relation_map['previction']) == 3


def test_bus_relation_needs_a_mutated_pair(geom):
    # only the first load moves, so the class is explained by a single-column constraint
    key = 'previction-occurred'
    records = run_gts("offmut{M[t=T] M[t=T,w=0] M[t=T,w=0] M[t=U,w=0] M[t=V,w=0]}",
                      {'classification_key': key, 'enable_prefetcher': False})
    analysis = analyze_records(records, geom, key)
    with pytest.raises(AnalysisError):
        bus_relation_from(analysis, geom)


def test_priming_reports_preloaded_evictions():
    result = run_priming()
    assert result['stats']['testcases'] == len(result['stats']['preloaded_evicted'])
    assert all(n >= 0 for n in result['stats']['preloaded_evicted'])


# Prefetching


@pytest.mark.slow
def test_line_mutation_classes():
    result = run_line_mutation()
    assert result['stats']['testcases'] == 16 ** 3
    assert result['stats']['classes'] == ["P0", "P3"]
    assert result['stats']['disagreements'] == 0
    assert result['status'] == 'ok'

    analysis = result['analysis']
    relations = analysis.analyses["P3"].valid_relations
    assert sorted(r.kind.value for r in relations) == sorted(k.value for k in (
        RelationKind.DIFFERENCE_RANGE, RelationKind.DIFFERENCE_LINEAR, RelationKind.EQUALITY, RelationKind.EQUALITY))
    stride = result['stride_predicate']
    assert set(stride.split(" and ")) == set(STRIDE_PREDICATE.split(" and "))

    # learned and shipped conjunctions agree on every row of the family
    geom = analysis.tables["P3"].geom
    learned, shipped = parse_predicate(stride), parse_predicate(STRIDE_PREDICATE)
    for record in analysis.records.values():
        binding = {f"l{i + 1}": a for i, a in enumerate(record.load_addresses)}
        assert learned.evaluate(binding, geom=geom) == shipped.evaluate(binding, geom=geom)
        assert learned.evaluate(binding, geom=geom) == (record.observation.prefetch_count == 3)
    assert result['lt'].relation_map["P3"] == [parse_predicate(stride)]


def _stream_bindings(geom, count, seed=0):
    rng = np.random.default_rng(seed)
    while count:
        tag = int(rng.integers(1, 64))
        first, stride = int(rng.integers(0, geom.num_sets)), int(rng.integers(-5, 6))
        sets = [first, first + stride, first + 2 * stride + int(rng.choice([0, 0, 0, 1, -1]))]
        if all(0 <= s < geom.num_sets for s in sets):
            count -= 1
            yield {f"l{i + 1}": compose_addr(geom, tag, s, 0).value for i, s in enumerate(sets)}


@pytest.mark.slow
def test_learned_prefetch_template_matches_shipped(geom):
    result = learn_prefetch_lt()
    assert result['status'] == 'ok', result['errors'][:5]
    learned, shipped = result['lt'], build_prefetch_lt()
    assert learned.behaviors == shipped.behaviors
    for binding in _stream_bindings(geom, 2000):
        for gap in range(11):
            counts = {'n1': 0, 'n2': gap}
            assert learned.evaluate(binding, counts) == shipped.evaluate(binding, counts)


def test_five_load_stream_prefetches_four():
    assert run_long_stream()['stats']['classes'] == ["P4"]


def test_intermediate_sweep():
    result = run_intermediate_sweep()
    expected = {g: "P3" for g in range(11)}
    expected.update({3: "P4", 4: "P7"})
    assert result['stats']['observed'] == expected
    assert {k: [tuple(r) for r in v] for k, v in result['count_ranges'].items()} == DEFAULT_COUNT_RANGES
    assert result['lt'].tested_ranges['n2'] == [0, 10]


def test_sweep_is_deterministic():
    first, second = run_intermediate_sweep(), run_intermediate_sweep()
    assert serialize_lt(first['lt']) == serialize_lt(second['lt'])


def test_page_closure_small():
    result = run_page_closure(placements=500, seed=1)
    assert result['stats']['crossings'] == 0
    assert result['stats']['prefetching'] > 0
    assert result['stats']['truncated'] > 0


@pytest.mark.slow
def test_page_closure_full():
    result = run_page_closure(placements=10000)
    assert result['status'] == 'ok'
    assert result['stats']['crossings'] == 0


def test_only_two_streams_prefetch():
    result = run_stream_limit()
    assert result['stats']['testcases'] == 1680
    assert result['stats']['shapes'] == {"2/2": 1680}
    assert result['status'] == 'ok'


def test_preloaded_head_suppresses_stream():
    assert run_preloaded_stream()['stats']['prefetched'] == [0]


# Parameterised eviction


def test_eviction_gts_shape():
    assert eviction_gts(2, 1, 3, 1) == "pre{M[t=t2,s=s1]} (((M[t=t1,s=s1])^{3,t+=1})^{1})^{2,t+=1}"
    assert eviction_gts(1, 1, 1, 2, rep=5).startswith("pre{M[t=t2,s=s1]} rep{")
    assert len(eviction_grid()) == 8 * 4 * 4 * 2


def test_eviction_matches_lru_oracle():
    result = run_eviction_grid()
    stats = result['stats']
    assert stats['points'] == 256
    assert stats['mismatches'] == 0, result['errors'][:5]
    assert 0 < stats['evict'] < 256
    assert stats['rules'] >= 1
    assert result['lt'].default == result['thresholds'].negative


def test_eviction_thresholds_reproduce_grid():
    result = run_eviction_grid(eviction_grid(steps=range(1, 6), repeats=(1, 2), distinct=(1, 2), strides=(1,)))
    by_params = {tuple(sorted(r.params.items())): r for r in result['records']}
    assert result['thresholds'].classify({'S': 1, 'C': 1, 'D': 1, 'L': 1}) == "no-evict"
    assert len(by_params) == 20


def test_eviction_stability_small():
    grid = eviction_grid(steps=range(1, 4), repeats=(1,), distinct=(1,), strides=(1,))
    result = run_eviction_stability(grid, seeds=(0, 1), rep=50)
    assert result['stats']['points'] == 3
    assert result['stats']['fraction'] == 1.0


@pytest.mark.slow
def test_eviction_stability_random_policy():
    grid = eviction_grid(steps=range(1, 5), repeats=(1,), distinct=(1, 2), strides=(1,))
    result = run_eviction_stability(grid, rep=200)
    assert result['stats']['fraction'] >= 0.99
