# -*- coding: utf-8 -*-
import itertools
import math

import pytest

from generator import ExpansionTooLarge, MixedMutationModes, MutationMode, Preprocessor, expand
from parser import parse_gts


def _bodies(gts, **kwargs):
    return [seq.instructions for seq, _ in expand(parse_gts(gts), **kwargs)]


def _loads(k):
    return " ".join(f"M[t=t{i}]" for i in range(k))


@pytest.mark.parametrize("k", [1, 3, 5])
def test_shuffle_yields_all_orderings(k):
    ast = parse_gts(f"shuffle{{{_loads(k)}}}")
    directives = ast.body.child.items
    bodies = _bodies(f"shuffle{{{_loads(k)}}}")
    assert len(bodies) == math.factorial(k)
    assert set(bodies) == set(itertools.permutations(directives))


def test_shuffle_drops_duplicate_orderings():
    # M M M[t=b]: the two unnamed loads are indistinguishable
    assert len(_bodies("shuffle{M M M[t=b]}")) == 3


@pytest.mark.parametrize("k", [1, 3, 4])
def test_subset_yields_nonempty_subsequences(k):
    directives = parse_gts(_loads(k)).body.items
    bodies = _bodies(f"subset{{{_loads(k)}}}")
    assert len(bodies) == 2 ** k - 1
    expected = {tuple(directives[i] for i in idx)
                for size in range(1, k + 1) for idx in itertools.combinations(range(k), size)}
    assert set(bodies) == expected


@pytest.mark.parametrize("p,q", [(1, 1), (2, 3), (3, 3)])
def test_merge_yields_order_preserving_interleavings(p, q):
    left = " ".join(f"M[t=a{i}]" for i in range(p))
    right = " ".join(f"M[t=b{i}]" for i in range(q))
    bodies = _bodies(f"merge{{{left} | {right}}}")
    assert len(bodies) == math.comb(p + q, p)
    assert len(set(bodies)) == len(bodies)
    for body in bodies:
        names = [d.tag.symbol.name for d in body]
        assert [n for n in names if n.startswith("a")] == [f"a{i}" for i in range(p)]
        assert [n for n in names if n.startswith("b")] == [f"b{i}" for i in range(q)]


def test_subset_with_repeated_loads():
    plain, _, named = parse_gts("M M M[t=t1,s=s1]").body.items
    bodies = _bodies("subset{M M M[t=t1,s=s1]}")
    # the four proper subsequences plus the whole sequence
    assert set(bodies) == {(plain, plain), (plain, named), (plain,), (named,), (plain, plain, named)}
    assert len(bodies) == 5


def test_merge_of_two_pairs():
    bodies = _bodies("merge{M[t=a1] M[t=a2] | M[t=b1] M[t=b2]}")
    orders = {tuple(d.tag.symbol.name for d in body) for body in bodies}
    assert len(bodies) == 6
    assert orders == {
        ("a1", "a2", "b1", "b2"), ("a1", "b1", "a2", "b2"), ("a1", "b1", "b2", "a2"),
        ("b1", "a1", "a2", "b2"), ("b1", "a1", "b2", "a2"), ("b1", "b2", "a1", "a2"),
    }


def test_power_shifts_attribute_per_copy():
    (body,) = _bodies("(M[t=t1,s=s1])^{4,t+=1}")
    assert [d.tag.delta for d in body] == [0, 1, 2, 3]
    assert all(d.set.delta == 0 for d in body)


def test_nested_power_eviction_shape():
    (body,) = _bodies("(((M[t=t1,s=s1])^{2,t+=1})^{2})^{4,t+=1}")
    assert len(body) == 16
    assert [d.tag.delta for d in body[:8]] == [0, 1, 0, 1, 1, 2, 1, 2]


def test_nested_operators_multiply():
    # two orderings, each interleaved three ways with the single right-hand load
    assert len(_bodies("merge{shuffle{M[t=a] M[t=b]} | M[t=c]}")) == 2 * 3


def test_wildcard_is_seeded():
    first = _bodies("W(8)", seed=3)
    assert len(first) == 1 and len(first[0]) == 8
    assert first == _bodies("W(8)", seed=3)


def test_slide_shifts_sets():
    bodies = _bodies("slide{M[t=a,s=s1]; 3}")
    assert [b[0].set.delta for b in bodies] == [0, 1, 2]


def test_repetition_multiplies_run_count():
    ((seq, _),) = expand(parse_gts("rep{rep{M; 10}; 5}"))
    assert seq.run_count == 50


def test_offset_mutation_pins_fixed_words():
    ((seq, plan),) = expand(parse_gts("offmut{M[t=T] M[t=T,w=0] M[t=T] M[t=U,w=0]}"))
    assert plan.mode is MutationMode.WORD_OFFSET
    assert plan.targets == (0, 2)


def test_line_mutation_targets_all_loads():
    ((seq, plan),) = expand(parse_gts("linemut{M[t=t1] A M[t=t1]}"))
    assert plan.mode is MutationMode.SET_INDEX
    assert plan.targets == (0, 2)


def test_mixed_mutation_modes_rejected():
    with pytest.raises(MixedMutationModes):
        expand(parse_gts("merge{offmut{M} | linemut{M}}"))


def test_expansion_cap():
    with pytest.raises(ExpansionTooLarge) as info:
        expand(parse_gts(f"shuffle{{{_loads(6)}}}"), cap=100)
    assert info.value.limit == 100


def test_expansion_is_deterministic():
    gts = parse_gts("shuffle{M[t=a] M[t=b] W(2)}")
    first = Preprocessor(seed=7).expand(gts)
    second = Preprocessor(seed=7).expand(gts)
    assert [s.instructions for s, _ in first] == [s.instructions for s, _ in second]
    assert [s.variant_id for s, _ in first] == list(range(len(first)))
