"""Shared test oracles and random generators, independent of the library paths."""

from __future__ import annotations

import random
from functools import lru_cache

from miscue.annotation import AnnotatedTranscript, MiscueEvent

ALPHABET = ("a", "b", "c")
LEXICON = (
    "the cat sat on a mat dog ran far away big red sun moon star tree "
    "bird fish boat lake hill road town king queen book page word line"
).split()


@lru_cache(maxsize=None)
def brute_distance(ref: tuple[str, ...], hyp: tuple[str, ...]) -> int:
    """Exhaustive-recursion minimum edit distance (the alignment oracle)."""
    if not ref:
        return len(hyp)
    if not hyp:
        return len(ref)
    return min(
        brute_distance(ref[1:], hyp[1:]) + (0 if ref[0] == hyp[0] else 1),
        brute_distance(ref[1:], hyp) + 1,
        brute_distance(ref, hyp[1:]) + 1,
    )


def enumerate_scripts(ref: tuple[str, ...], hyp: tuple[str, ...]) -> list[tuple[str, ...]]:
    """Every edit script from ref to hyp as kind sequences, for uniqueness checks."""
    if not ref and not hyp:
        return [()]
    scripts = []
    if ref and hyp and ref[0] == hyp[0]:
        scripts += [("match",) + s for s in enumerate_scripts(ref[1:], hyp[1:])]
    if ref and hyp and ref[0] != hyp[0]:
        scripts += [("substitute",) + s for s in enumerate_scripts(ref[1:], hyp[1:])]
    if ref:
        scripts += [("delete",) + s for s in enumerate_scripts(ref[1:], hyp)]
    if hyp:
        scripts += [("insert",) + s for s in enumerate_scripts(ref, hyp[1:])]
    return scripts


def minimal_scripts(ref: tuple[str, ...], hyp: tuple[str, ...]) -> list[tuple[str, ...]]:
    scripts = enumerate_scripts(ref, hyp)
    cost = {s: sum(1 for kind in s if kind != "match") for s in scripts}
    best = min(cost.values())
    return [s for s in scripts if cost[s] == best]


def random_words(rng: random.Random, max_len: int = 8, lexicon=LEXICON) -> list[str]:
    return [rng.choice(lexicon) for _ in range(rng.randint(0, max_len))]


def random_transcript(rng: random.Random, lexicon=LEXICON) -> AnnotatedTranscript:
    """A random transcript satisfying every MiscueEvent invariant."""
    events: list[MiscueEvent] = []
    for _ in range(rng.randint(0, 8)):
        kind = rng.choice(("correct", "substitute", "omit", "insert"))
        word = rng.choice(lexicon)
        if kind == "correct":
            events.append(MiscueEvent.correct(word))
        elif kind == "omit":
            events.append(MiscueEvent.omit(word))
        elif kind == "insert":
            events.append(MiscueEvent.insert(word))
        else:
            spoken = rng.choice(lexicon)
            while spoken == word:
                spoken = rng.choice(lexicon)
            events.append(MiscueEvent.substitute(word, spoken))
    return AnnotatedTranscript(events=tuple(events))
