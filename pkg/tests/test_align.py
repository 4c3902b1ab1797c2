import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import ALPHABET, brute_distance, minimal_scripts, random_words
from miscue.align import DELETE, INSERT, MATCH, SUBSTITUTE, align_words, edit_distance

words = st.lists(st.sampled_from(ALPHABET), max_size=7)


def kinds(script):
    return tuple(op.kind for op in script.ops)


def test_identity_alignment():
    script = align_words(["a", "b"], ["a", "b"])
    assert kinds(script) == (MATCH, MATCH)
    assert script.cost == 0


def test_single_deletion_unique_minimum():
    ref, hyp = ("a", "b", "c"), ("a", "c")
    assert minimal_scripts(ref, hyp) == [(MATCH, DELETE, MATCH)]
    script = align_words(ref, hyp)
    assert kinds(script) == (MATCH, DELETE, MATCH)
    assert script.ops[1].ref_index == 1
    assert script.cost == 1


def test_insert_before_match_tie_break():
    ref, hyp = ("a",), ("b", "a")
    assert minimal_scripts(ref, hyp) == [(INSERT, MATCH)]
    script = align_words(ref, hyp)
    assert kinds(script) == (INSERT, MATCH)
    assert script.cost == 1


@pytest.mark.parametrize(
    "ref,hyp,expected",
    [
        (("a", "b", "c"), ("a", "b", "c"), 0),
        (("a", "b", "c", "d"), ("a", "x", "c"), 2),
        ((), ("a", "a"), 2),
        (("a", "b"), (), 2),
        ((), (), 0),
    ],
)
def test_edit_distance_examples(ref, hyp, expected):
    assert brute_distance(ref, hyp) == expected
    assert edit_distance(ref, hyp) == expected


def test_cost_matches_edit_distance_exhaustive_short():
    seqs = [
        tuple(s)
        for n in range(4)
        for s in itertools.product(ALPHABET, repeat=n)
    ]
    for ref in seqs:
        for hyp in seqs:
            script = align_words(ref, hyp)
            assert script.cost == brute_distance(ref, hyp)
            assert script.cost == edit_distance(ref, hyp)


def assert_valid_script(ref, hyp, script):
    ref_indices = [op.ref_index for op in script.ops if op.ref_index is not None]
    hyp_indices = [op.hyp_index for op in script.ops if op.hyp_index is not None]
    assert ref_indices == list(range(len(ref)))
    assert hyp_indices == list(range(len(hyp)))
    for op in script.ops:
        if op.kind == MATCH:
            assert ref[op.ref_index] == hyp[op.hyp_index]
        elif op.kind == SUBSTITUTE:
            assert ref[op.ref_index] != hyp[op.hyp_index]
        elif op.kind == DELETE:
            assert op.hyp_index is None
        else:
            assert op.kind == INSERT and op.ref_index is None
    replayed = []
    for op in script.ops:
        if op.kind == MATCH:
            replayed.append(ref[op.ref_index])
        elif op.kind in (SUBSTITUTE, INSERT):
            replayed.append(hyp[op.hyp_index])
    assert replayed == list(hyp)
    assert script.cost == sum(1 for op in script.ops if op.kind != MATCH)


def test_script_validity_random():
    rng = random.Random(1234)
    for _ in range(10_000):
        ref = random_words(rng, max_len=6, lexicon=ALPHABET)
        hyp = random_words(rng, max_len=6, lexicon=ALPHABET)
        assert_valid_script(ref, hyp, align_words(ref, hyp))


@settings(max_examples=1_000, deadline=None)
@given(words, words)
def test_cost_symmetry(a, b):
    assert edit_distance(a, b) == edit_distance(b, a)


@settings(max_examples=1_000, deadline=None)
@given(words, words, words)
def test_triangle_inequality(a, b, c):
    assert edit_distance(a, c) <= edit_distance(a, b) + edit_distance(b, c)


def test_determinism():
    rng = random.Random(7)
    for _ in range(200):
        ref = random_words(rng, max_len=6, lexicon=ALPHABET)
        hyp = random_words(rng, max_len=6, lexicon=ALPHABET)
        assert align_words(ref, hyp) == align_words(ref, hyp)
