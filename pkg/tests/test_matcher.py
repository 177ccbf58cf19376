# -*- coding: utf-8 -*-
import json

import numpy as np
import pytest

from matcher import (
    BadBackreference, BadQuantifier, InsufficientTrace, InstrClass, LengthMismatch, ListingTooBroken,
    PatternSyntaxError, TraceRecord, access_trace, actual_label, check_error_rate, classify_trace,
    compile_pattern, confusion_report, generate_corpus, match_pattern, parse_listing, random_trace_program,
    read_trace, write_trace,
)
from matcher.asm_pattern import normalize_operand
from scenarios import build_prefetch_lt
from simulator import SimConfig
from template import UNDECIDABLE
from utils.text_io import read_text_file

LISTING = """\
# hand-written sample
SECTION main
1000: ldr x1, [x2, #8]
1004: add x3, x3, x1
1008: ldr x4, [x2, x5]
100c: nop
1010: ldr x6, [x2, #16]   // third
this line is garbage
1010: ret
SECTION other
2000: b.ne 2008
"""


@pytest.fixture
def pattern(fixtures_dir):
    return compile_pattern(read_text_file(fixtures_dir / "prefetch.pattern"))


# Listings


def test_listing_sections_and_classes():
    listing = parse_listing(LISTING)
    assert list(listing.sections) == ["main", "other"]
    main = listing.section("main")
    assert [i.address for i in main] == [0x1000, 0x1004, 0x1008, 0x100c, 0x1010]
    assert [i.iclass for i in main] == [InstrClass.LOAD, InstrClass.ARITH, InstrClass.LOAD, InstrClass.NOP,
                                        InstrClass.LOAD]
    assert main[0].operands == ("x1", "[x2", "#8]")
    assert listing.section("other")[0].iclass is InstrClass.BRANCH


def test_listing_errors_are_counted():
    listing = parse_listing(LISTING)
    assert len(listing.errors) == 2
    assert listing.error_rate == pytest.approx(0.2)
    check_error_rate(listing, 0.25)
    with pytest.raises(ListingTooBroken):
        check_error_rate(listing, 0.1)


# Patterns


def test_pattern_compilation(pattern):
    assert len(pattern.elements) == 3
    assert [(g.low, g.high) for g in pattern.gaps] == [(0, 5), (0, 5)]
    assert pattern.captures == ["g1"]
    assert pattern.backreferences == ["g1"]


def test_repeat_expands_backreferences():
    p = compile_pattern("LOAD(op1>b){3}")
    assert [c.kind for e in p.elements for c in e.constraints] == ["capture", "ref", "ref"]


def test_pattern_errors():
    with pytest.raises(BadBackreference):
        compile_pattern("LOAD(op1=g1)")
    with pytest.raises(BadBackreference):
        compile_pattern("LOAD(op1>g1) LOAD(op1>g1)")
    with pytest.raises(BadQuantifier):
        compile_pattern("LOAD .{3,1} LOAD")
    with pytest.raises(BadQuantifier):
        compile_pattern("LOAD{0}")
    with pytest.raises(PatternSyntaxError):
        compile_pattern("LOAD(op1~x)")
    with pytest.raises(PatternSyntaxError):
        compile_pattern(".{0,2}")


def test_match_on_sample(pattern):
    (candidate,) = match_pattern(parse_listing(LISTING), pattern)
    assert candidate.section == "main"
    assert candidate.addresses == [0x1000, 0x1008, 0x1010]
    assert candidate.gaps == [1, 1]
    assert candidate.captures == {'g1': "x2"}
    assert candidate.to_dict()['addresses'] == ["0x1000", "0x1008", "0x1010"]


def test_backreference_must_match(pattern):
    listing = parse_listing(LISTING.replace("[x2, #16]", "[x9, #16]"))
    assert match_pattern(listing, pattern) == []


def test_gap_bound_is_respected(pattern):
    filler = "".join(f"{0x1004 + 4 * i:x}: nop\n" for i in range(6))
    text = f"1000: ldr x1, [x2, #8]\n{filler}1020: ldr x4, [x2, x5]\n1024: ldr x6, [x2, #16]\n"
    assert match_pattern(parse_listing(text), pattern) == []


def test_corpus_is_seeded():
    assert generate_corpus(20, 5, seed=3).text == generate_corpus(20, 5, seed=3).text


def test_corpus_recall(pattern):
    corpus = generate_corpus(functions=500, plants=50, seed=0)
    listing = parse_listing(corpus.text)
    assert listing.errors == []
    candidates = match_pattern(listing, pattern)
    found = {(c.section, c.start): c for c in candidates}
    plants = corpus.plant_index()
    assert len(plants) == 50
    assert set(plants) <= set(found)
    assert len(candidates) == len(plants)
    for key, plant in plants.items():
        assert found[key].addresses == list(plant.addresses)
        assert found[key].gaps == list(plant.gaps)
        assert found[key].captures['g1'] == plant.base_register
    for c in candidates:
        bases = {normalize_operand(listing.instructions[i].operands[1]) for i in c.indices}
        assert len(bases) == 1


# Traces


def test_trace_files(tmp_path):
    trace = [TraceRecord(0x1000, 0x4000), TraceRecord(0x1008, 0x4040)]
    path = write_trace(trace, tmp_path / "trace.jsonl")
    assert read_trace(path) == trace


def test_trace_binding_counts_gaps(geom):
    lt = build_prefetch_lt()
    base = (9 * 64 + 10) << 6
    trace = [TraceRecord(0x1000, base), TraceRecord(0x1004, base + 4), TraceRecord(0x1008, base + 64),
             TraceRecord(0x1018, base + 128)]
    # second access to the first line is skipped; n1 = 1, n2 = 3
    assert classify_trace(trace, lt) == "P4"


def test_short_trace(geom):
    with pytest.raises(InsufficientTrace):
        classify_trace([TraceRecord(0x1000, 0x4000)], build_prefetch_lt())
    with pytest.raises(InsufficientTrace):
        classify_trace([], build_prefetch_lt())


def test_in_range_traces_are_classified_soundly(geom):
    lt = build_prefetch_lt()
    config = SimConfig(enable_previction=False)
    rng = np.random.default_rng(0)
    expected, actual = [], []
    for _ in range(100):
        tc = random_trace_program(rng, geom, in_range=True)
        expected.append(classify_trace(access_trace(tc), lt))
        actual.append(actual_label(tc, config))
    report = confusion_report(expected, actual)
    assert report.misclassified == 0
    assert report.undecidable == 0
    assert not report.failed


def test_out_of_range_traces_are_undecidable(geom):
    lt = build_prefetch_lt()
    rng = np.random.default_rng(1)
    for _ in range(20):
        tc = random_trace_program(rng, geom, in_range=False)
        assert classify_trace(access_trace(tc), lt) == UNDECIDABLE


# Confusion matrix


def test_confusion_matrix_from_fixture(fixtures_dir):
    pairs = json.loads(read_text_file(fixtures_dir / "corpus_labels.json"))
    expected = [e for e, _ in pairs]
    actual = [a for _, a in pairs]
    report = confusion_report(expected, actual)
    assert len(pairs) == 100
    assert report.misclassified == 0
    assert report.undecidable == 28
    assert report.cell("P3", UNDECIDABLE) == 28
    assert report.cell("P0", "P0") == 66
    assert "PASS" in report.render()


def test_confusion_matrix_counts_misclassifications():
    report = confusion_report(["P3", "P0", UNDECIDABLE], ["P3", "P3", "P0"])
    assert report.misclassified == 1
    assert report.failed
    assert "FAIL" in report.render()


def test_confusion_length_mismatch():
    with pytest.raises(LengthMismatch):
        confusion_report(["P3"], [])
