"""Minimum-edit-distance alignment between two word sequences.

Classical Levenshtein with unit costs and a deterministic backtrace.  Word
equality is exact string equality on normalized words; utterances are
sentence-length, so the quadratic table is fine.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

MATCH = "match"
SUBSTITUTE = "substitute"
DELETE = "delete"
INSERT = "insert"


@dataclass(frozen=True)
class EditOp:
    """One alignment step.

    match/substitute carry both indices, delete only ``ref_index``,
    insert only ``hyp_index``.
    """

    kind: str
    ref_index: int | None = None
    hyp_index: int | None = None


@dataclass(frozen=True)
class AlignmentScript:
    ops: tuple[EditOp, ...]
    cost: int


def edit_distance(ref: Sequence[str], hyp: Sequence[str]) -> int:
    """Levenshtein distance under unit costs, rolling-row variant."""
    if not ref:
        return len(hyp)
    if not hyp:
        return len(ref)
    prev = list(range(len(hyp) + 1))
    for i in range(1, len(ref) + 1):
        cur = [i] + [0] * len(hyp)
        for j in range(1, len(hyp) + 1):
            same = ref[i - 1] == hyp[j - 1]
            cur[j] = min(prev[j - 1] + (0 if same else 1), prev[j] + 1, cur[j - 1] + 1)
        prev = cur
    return prev[-1]


def align_words(ref: Sequence[str], hyp: Sequence[str]) -> AlignmentScript:
    """Minimal-cost alignment script from ``ref`` to ``hyp``.

    Ties are broken deterministically during the backtrace from the sequence
    ends: match > substitute > delete > insert.
    """
    n, m = len(ref), len(hyp)
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        dist[i][0] = i
    for j in range(m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        row = dist[i]
        above = dist[i - 1]
        for j in range(1, m + 1):
            same = ref[i - 1] == hyp[j - 1]
            row[j] = min(above[j - 1] + (0 if same else 1), above[j] + 1, row[j - 1] + 1)

    ops: list[EditOp] = []
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and dist[i][j] == dist[i - 1][j - 1]:
            ops.append(EditOp(MATCH, ref_index=i - 1, hyp_index=j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and ref[i - 1] != hyp[j - 1] and dist[i][j] == dist[i - 1][j - 1] + 1:
            ops.append(EditOp(SUBSTITUTE, ref_index=i - 1, hyp_index=j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and dist[i][j] == dist[i - 1][j] + 1:
            ops.append(EditOp(DELETE, ref_index=i - 1))
            i -= 1
        else:
            ops.append(EditOp(INSERT, hyp_index=j - 1))
            j -= 1
    ops.reverse()
    return AlignmentScript(ops=tuple(ops), cost=dist[n][m])
