# -*- coding: utf-8 -*-
from pathlib import Path

import numpy as np
import pytest

from parser import (
    GtsAst, GtsSyntaxError, GtsValueError, MalformedAttribute, NestedMutation, UnknownDirective, load_gts_file,
    parse_gts, render_gts,
)
from parser.gts_ast import DirectiveKind, LineMutation, Merge, OffsetMutation, Power, Repetition, Seq, Shuffle


def test_single_load_with_attributes():
    ast = parse_gts("M[t=t1,s=s1+2,w=3]")
    assert isinstance(ast.body, Seq)
    (d,) = ast.body.items
    assert d.kind is DirectiveKind.MEM
    assert d.tag.symbol.name == "t1" and d.tag.delta == 0
    assert d.set.symbol.name == "s1" and d.set.delta == 2
    assert d.word == 3


def test_symbols_are_interned():
    ast = parse_gts("M[t=T] M[t=T] M[t=U]")
    a, b, c = ast.body.items
    assert a.tag.symbol is b.tag.symbol
    assert a.tag.symbol != c.tag.symbol


def test_operators():
    assert isinstance(parse_gts("shuffle{M M}").body, Shuffle)
    assert isinstance(parse_gts("merge{M | M}").body, Merge)
    assert isinstance(parse_gts("offmut{M M}").body, OffsetMutation)
    assert isinstance(parse_gts("linemut{M}").body, LineMutation)
    rep = parse_gts("rep{M; 10000}").body
    assert isinstance(rep, Repetition) and rep.n == 10000


def test_power_with_increment():
    (power,) = parse_gts("(M[t=t1,s=s1])^{4,t+=1}").body.items
    assert isinstance(power, Power)
    assert power.n == 4 and power.attr == "t" and power.increment == 1


def test_precondition():
    ast = parse_gts("pre{M[t=t2,s=s1]} M[t=t1,s=s1]")
    assert len(ast.precondition) == 1
    assert ast.precondition[0].tag.symbol.name == "t2"


def test_precondition_only_loads():
    with pytest.raises(MalformedAttribute):
        parse_gts("pre{A} M")


def test_comments_and_empty_text():
    assert parse_gts("") == GtsAst()
    assert parse_gts("# nothing here\n") == GtsAst()
    assert len(parse_gts("# three loads\nM M M").body.items) == 3


def test_unknown_directive():
    with pytest.raises(UnknownDirective):
        parse_gts("M Q")


def test_malformed_attributes():
    with pytest.raises(MalformedAttribute):
        parse_gts("M[x=1]")
    with pytest.raises(MalformedAttribute):
        parse_gts("M[t=a,t=b]")


def test_nested_mutation_rejected():
    with pytest.raises(NestedMutation):
        parse_gts("offmut{linemut{M}}")


def test_syntax_errors_carry_position():
    with pytest.raises(GtsSyntaxError) as info:
        parse_gts("M\nshuffle{M M")
    assert info.value.line == 2


@pytest.mark.parametrize("text,line,col,message", [
    ("M\nrep{M; 0}", 2, 8, "rep count must be >= 1, got 0"),
    ("slide{M M;\n  0}", 2, 3, "slide count must be >= 1, got 0"),
    ("M (M)^{0}", 1, 8, "power count must be >= 1, got 0"),
    ("M\n  W(-2)", 2, 5, "wildcard count must be >= 0, got -2"),
    ("SB(x,true) B(x,false,0)", 1, 22, "branch step count must be >= 1, got 0"),
])
def test_count_errors_point_at_the_count(text, line, col, message):
    with pytest.raises(GtsValueError) as info:
        parse_gts(text)
    assert (info.value.line, info.value.col, info.value.message) == (line, col, message)
    assert str(info.value) == f"semantic error at line {line}, col {col}: {message}"


def test_arith_before_power():
    ast = parse_gts("A (M)^{2} A(x) (M M)^{3,t+=1}")
    arith, power, arith_x, power2 = ast.body.items
    assert arith.kind is DirectiveKind.ARITH and arith.operands == ()
    assert isinstance(power, Power) and power.n == 2
    assert arith_x.operands == ("x",)
    assert isinstance(power2, Power) and power2.attr == "t"


# Rendering

EXPERIMENTS = Path(__file__).resolve().parent.parent / "experiments"


def _assert_round_trip(ast):
    text = render_gts(ast)
    again = parse_gts(text)
    assert again == ast
    assert render_gts(again) == text


def test_shipped_gts_files_parse():
    files = sorted(EXPERIMENTS.glob("*.gts"))
    assert files
    for path in files:
        assert load_gts_file(path).body is not None


@pytest.mark.parametrize("path", sorted(EXPERIMENTS.glob("*.gts")), ids=lambda p: p.stem)
def test_shipped_gts_files_round_trip(path):
    _assert_round_trip(load_gts_file(path))


@pytest.mark.parametrize("text", [
    "pre{M[t=t2,s=s1]} (((M[t=t1,s=s1])^{2,t+=1})^{2})^{4,t+=1}",
    "merge{merge{M[t=a] | M[t=b]} | merge{M[t=c] M | shuffle{M[t=d] M[t=e]}}}",
    "rep{offmut{M[t=T] M[t=T,w=0] (M[t=U,s=s1-1])^{3,s+=2}}; 100}",
    "linemut{slide{subset{M[t=t1] A(x,y) NOP}; 4}}",
    "SB(r,true) (M[t=t1] B(r,false,2) W(3))^{2} NOP",
    "pre{M M[t=t1]} offmut{rep{merge{M[t=T,w=1] | rep{M[t=T]; 2}}; 10}}",
])
def test_nested_text_round_trips(text):
    _assert_round_trip(parse_gts(text))


def _attr(rng, key, names):
    name = names[rng.integers(len(names))]
    delta = int(rng.integers(-2, 3))
    return f"{key}={name}{delta:+d}" if delta else f"{key}={name}"


def _load(rng):
    attrs = []
    if rng.random() < 0.7:
        attrs.append(_attr(rng, "t", ("t1", "t2", "T")))
    if rng.random() < 0.5:
        attrs.append(_attr(rng, "s", ("s1", "s2")))
    if rng.random() < 0.3:
        attrs.append(f"w={rng.integers(16)}")
    return "M[" + ",".join(attrs) + "]" if attrs else "M"


def _item(rng, depth):
    kinds = ["M", "M", "M", "A", "NOP", "SB", "B", "W"] + (["power", "power"] if depth > 0 else [])
    kind = kinds[rng.integers(len(kinds))]
    flag = "true" if rng.random() < 0.5 else "false"
    if kind == "M":
        return _load(rng)
    if kind == "A":
        return "A(x,y)" if rng.random() < 0.5 else "A"
    if kind == "SB":
        return f"SB(r,{flag})"
    if kind == "B":
        return f"B(r,{flag},{rng.integers(1, 5)})"
    if kind == "W":
        return f"W({rng.integers(0, 4)})"
    if kind == "power":
        attr = f",{'ts'[rng.integers(2)]}+={rng.integers(1, 4)}" if rng.random() < 0.6 else ""
        return f"({_seq(rng, depth - 1)})^{{{rng.integers(1, 5)}{attr}}}"
    return kind


def _seq(rng, depth):
    return " ".join(_item(rng, depth) for _ in range(rng.integers(1, 4)))


def _opexpr(rng, depth):
    if depth == 0 or rng.random() < 0.25:
        return _seq(rng, 2)
    op = ("shuffle", "subset", "slide", "merge", "rep")[rng.integers(5)]
    inner = _opexpr(rng, depth - 1)
    if op == "merge":
        return f"merge{{{inner} | {_opexpr(rng, depth - 1)}}}"
    if op in ("slide", "rep"):
        return f"{op}{{{inner}; {rng.integers(1, 6)}}}"
    return f"{op}{{{inner}}}"


def _random_gts(rng):
    body = _opexpr(rng, 3)
    if rng.random() < 0.3:
        body = f"{('offmut', 'linemut')[rng.integers(2)]}{{{body}}}"
    if rng.random() < 0.4:
        body = "pre{" + " ".join(_load(rng) for _ in range(rng.integers(1, 3))) + "} " + body
    return body


@pytest.mark.parametrize("seed", range(40))
def test_random_gts_round_trips(seed):
    _assert_round_trip(parse_gts(_random_gts(np.random.default_rng(seed))))
