"""Miscue events, their derivation, and the marker-token transcript grammar.

The grammar keeps serialized output a pure verbatim-plus-markers string:
each ``<substitute>`` / ``<insert>`` marker precedes the word that was
actually spoken, ``<omit>`` stands alone, and the omitted or substituted
target word is recovered positionally from the target text at parse time.
Stripping the three marker tokens therefore recovers the verbatim exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .align import DELETE, MATCH, SUBSTITUTE as OP_SUBSTITUTE, align_words
from .textnorm import normalize_text

MARKER_OMIT = "<omit>"
MARKER_SUBSTITUTE = "<substitute>"
MARKER_INSERT = "<insert>"
MARKERS = (MARKER_OMIT, MARKER_SUBSTITUTE, MARKER_INSERT)

CORRECT = "correct"
SUBSTITUTE = "substitute"
OMIT = "omit"
INSERT = "insert"
EVENT_KINDS = (CORRECT, SUBSTITUTE, OMIT, INSERT)


@dataclass(frozen=True)
class MiscueEvent:
    """One annotation unit: how one word position was read.

    correct: target_word == spoken_word, both present.
    substitute: both present, different.
    omit: only target_word.  insert: only spoken_word.
    """

    kind: str
    target_word: str | None = None
    spoken_word: str | None = None

    def __post_init__(self) -> None:
        if self.kind == CORRECT:
            ok = self.target_word is not None and self.target_word == self.spoken_word
        elif self.kind == SUBSTITUTE:
            ok = (
                self.target_word is not None
                and self.spoken_word is not None
                and self.target_word != self.spoken_word
            )
        elif self.kind == OMIT:
            ok = self.target_word is not None and self.spoken_word is None
        elif self.kind == INSERT:
            ok = self.target_word is None and self.spoken_word is not None
        else:
            raise ValueError(f"unknown miscue kind {self.kind!r}")
        if not ok:
            raise ValueError(f"invalid {self.kind} event: {self.target_word!r} / {self.spoken_word!r}")

    @classmethod
    def correct(cls, word: str) -> "MiscueEvent":
        return cls(CORRECT, target_word=word, spoken_word=word)

    @classmethod
    def substitute(cls, target_word: str, spoken_word: str) -> "MiscueEvent":
        return cls(SUBSTITUTE, target_word=target_word, spoken_word=spoken_word)

    @classmethod
    def omit(cls, target_word: str) -> "MiscueEvent":
        return cls(OMIT, target_word=target_word)

    @classmethod
    def insert(cls, spoken_word: str) -> "MiscueEvent":
        return cls(INSERT, spoken_word=spoken_word)


@dataclass(frozen=True)
class AnnotatedTranscript:
    """Ordered miscue events for one utterance.

    ``warnings`` is empty for well-formed input and carries one note per
    grammar recovery applied during parsing.
    """

    events: tuple[MiscueEvent, ...]
    warnings: tuple[str, ...] = field(default_factory=tuple)

    @property
    def target_words(self) -> list[str]:
        """Target-text projection: correct/substitute/omit events, in order."""
        return [e.target_word for e in self.events if e.target_word is not None]

    @property
    def verbatim_words(self) -> list[str]:
        """Spoken projection: correct/substitute/insert events, in order."""
        return [e.spoken_word for e in self.events if e.spoken_word is not None]


def derive_events(target: Sequence[str], verbatim: Sequence[str]) -> AnnotatedTranscript:
    """Post-hoc miscue derivation: map the minimal alignment script onto events."""
    script = align_words(target, verbatim)
    events = []
    for op in script.ops:
        if op.kind == MATCH:
            events.append(MiscueEvent.correct(target[op.ref_index]))
        elif op.kind == OP_SUBSTITUTE:
            events.append(MiscueEvent.substitute(target[op.ref_index], verbatim[op.hyp_index]))
        elif op.kind == DELETE:
            events.append(MiscueEvent.omit(target[op.ref_index]))
        else:
            events.append(MiscueEvent.insert(verbatim[op.hyp_index]))
    return AnnotatedTranscript(events=tuple(events))


def serialize(annotated: AnnotatedTranscript) -> str:
    """Render events as the marker-token string the end-to-end model emits."""
    if annotated.warnings:
        raise ValueError("refusing to serialize a transcript with recovery warnings")
    parts: list[str] = []
    for event in annotated.events:
        if event.kind == CORRECT:
            parts.append(event.spoken_word)
        elif event.kind == SUBSTITUTE:
            parts.append(MARKER_SUBSTITUTE)
            parts.append(event.spoken_word)
        elif event.kind == INSERT:
            parts.append(MARKER_INSERT)
            parts.append(event.spoken_word)
        else:
            parts.append(MARKER_OMIT)
    return " ".join(parts)


def parse(marked: str, target: Sequence[str]) -> AnnotatedTranscript:
    """Parse a marker string against its target text.

    Inverse of :func:`serialize` on well-formed input.  Never fails: malformed
    model output is repaired (dropped markers, insert/omit coercions), with one
    warning per repair.  The returned events always cover ``target`` exactly.
    """
    events: list[MiscueEvent] = []
    warnings: list[str] = []
    pending: str | None = None
    ti = 0

    def drop_pending() -> None:
        nonlocal pending
        if pending is not None:
            warnings.append(f"dangling {pending} marker followed by another marker; dropped")
            pending = None

    for token in marked.split():
        if token == MARKER_OMIT:
            drop_pending()
            if ti < len(target):
                events.append(MiscueEvent.omit(target[ti]))
                ti += 1
            else:
                warnings.append("omit marker past end of target; dropped")
            continue
        if token == MARKER_SUBSTITUTE or token == MARKER_INSERT:
            drop_pending()
            pending = SUBSTITUTE if token == MARKER_SUBSTITUTE else INSERT
            continue
        for word in normalize_text(token):
            if pending == INSERT:
                events.append(MiscueEvent.insert(word))
                pending = None
            elif pending == SUBSTITUTE:
                pending = None
                if ti >= len(target):
                    warnings.append(f"substituted word {word!r} past end of target; coerced to insert")
                    events.append(MiscueEvent.insert(word))
                elif target[ti] == word:
                    warnings.append(f"substituted word {word!r} equals its target word; coerced to correct")
                    events.append(MiscueEvent.correct(word))
                    ti += 1
                else:
                    events.append(MiscueEvent.substitute(target[ti], word))
                    ti += 1
            else:
                if ti >= len(target):
                    warnings.append(f"unmarked word {word!r} past end of target; coerced to insert")
                    events.append(MiscueEvent.insert(word))
                elif target[ti] == word:
                    events.append(MiscueEvent.correct(word))
                    ti += 1
                else:
                    warnings.append(
                        f"unmarked word {word!r} does not match target {target[ti]!r}; coerced to substitute"
                    )
                    events.append(MiscueEvent.substitute(target[ti], word))
                    ti += 1

    if pending is not None:
        # One repair event: the dangling marker means nothing more was read,
        # so whatever target remains was never reached.
        remaining = len(target) - ti
        if remaining:
            warnings.append(
                f"dangling {pending} marker at end of string; dropped,"
                f" {remaining} unread target word(s) coerced to omit"
            )
        else:
            warnings.append(f"dangling {pending} marker at end of string; dropped")
    elif ti < len(target):
        warnings.append(f"{len(target) - ti} unconsumed target word(s) at end; coerced to omit")
    while ti < len(target):
        events.append(MiscueEvent.omit(target[ti]))
        ti += 1

    return AnnotatedTranscript(events=tuple(events), warnings=tuple(warnings))


def strip_markers(marked: str) -> list[str]:
    """Remove marker tokens and normalize the rest: the verbatim word sequence."""
    words: list[str] = []
    for token in marked.split():
        if token in MARKERS:
            continue
        words.extend(normalize_text(token))
    return words


def event_tags(annotated: AnnotatedTranscript) -> list[tuple[str, str]]:
    """Project events to (tag, word) pairs; word is spoken if present else target."""
    return [
        (e.kind, e.spoken_word if e.spoken_word is not None else e.target_word)
        for e in annotated.events
    ]
