"""Training-data preparation: vocabulary extension, prompt packing, clipping.

Every packed example is laid out as [prompt][control][label][end] with the
loss mask false over prompt and control and true over label and end, so the
model is never trained to predict the reading-text prompt it is conditioned
on.  Marker tokens are encoded atomically through their extension ids, never
through word or subword fallback.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from .annotation import (
    CORRECT,
    INSERT,
    MARKER_INSERT,
    MARKER_OMIT,
    MARKER_SUBSTITUTE,
    OMIT,
    derive_events,
)
from .corpus import UtteranceRecord
from .textnorm import TokenizerAdapter, normalize_text

MAX_TOKENS = 448
MAX_DURATION_S = 30.0

MODES = ("verbatim", "e2e")
CLIP_POLICIES = ("skip", "truncate_prompt_tail")

_EXTENSION_SURFACES = (MARKER_OMIT, MARKER_SUBSTITUTE, MARKER_INSERT)


@dataclass(frozen=True)
class VocabExtension:
    """The three miscue marker tokens appended to a base vocabulary."""

    base_vocab_size: int

    @property
    def added(self) -> tuple[tuple[str, int], ...]:
        return tuple(
            (surface, self.base_vocab_size + offset)
            for offset, surface in enumerate(_EXTENSION_SURFACES)
        )

    @property
    def marker_ids(self) -> dict[str, int]:
        return dict(self.added)

    @property
    def extended_vocab_size(self) -> int:
        return self.base_vocab_size + len(_EXTENSION_SURFACES)

    def surface_of(self, token_id: int) -> str | None:
        offset = token_id - self.base_vocab_size
        if 0 <= offset < len(_EXTENSION_SURFACES):
            return _EXTENSION_SURFACES[offset]
        return None


def extend_vocab(base_vocab_size: int) -> VocabExtension:
    """Assign the marker tokens the first ids past the base vocabulary."""
    if base_vocab_size <= 0:
        raise ValueError(f"base_vocab_size must be positive, got {base_vocab_size}")
    return VocabExtension(base_vocab_size=base_vocab_size)


def save_extension(ext: VocabExtension, path) -> None:
    """Sidecar manifest: a base-size header line, then one line per marker."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"base_vocab_size": ext.base_vocab_size}) + "\n")
        for surface, token_id in ext.added:
            fh.write(json.dumps({"surface": surface, "id": token_id}) + "\n")


def load_extension(path) -> VocabExtension:
    with open(path, encoding="utf-8") as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    if not lines or "base_vocab_size" not in lines[0]:
        raise ValueError(f"{path}: missing base_vocab_size header")
    ext = extend_vocab(int(lines[0]["base_vocab_size"]))
    rows = tuple((row["surface"], int(row["id"])) for row in lines[1:])
    if rows != ext.added:
        raise ValueError(f"{path}: extension rows do not match {ext.added}")
    return ext


@dataclass(frozen=True)
class PromptedExample:
    """One training sequence: prompt-conditioned, loss-masked token ids."""

    utterance_id: str
    prompt_token_ids: tuple[int, ...]
    control_token_ids: tuple[int, ...]
    label_token_ids: tuple[int, ...]
    end_token_ids: tuple[int, ...]
    loss_mask: tuple[bool, ...]
    audio_path: str | None
    duration_s: float | None

    @property
    def input_ids(self) -> list[int]:
        return list(
            self.prompt_token_ids
            + self.control_token_ids
            + self.label_token_ids
            + self.end_token_ids
        )


@dataclass(frozen=True)
class SkipNotice:
    """Why a record was left out of the training set."""

    utterance_id: str
    reason: str  # "budget" or "duration"
    detail: str


PackResult = Union[PromptedExample, SkipNotice]


def _encode_label(record, adapter, ext, mode) -> list[int]:
    if mode == "verbatim":
        return adapter.encode(record.verbatim_text)
    annotated = derive_events(
        normalize_text(record.target_text), normalize_text(record.verbatim_text)
    )
    markers = ext.marker_ids
    ids: list[int] = []
    for event in annotated.events:
        if event.kind == CORRECT:
            ids.extend(adapter.encode(event.spoken_word))
        elif event.kind == OMIT:
            ids.append(markers[MARKER_OMIT])
        elif event.kind == INSERT:
            ids.append(markers[MARKER_INSERT])
            ids.extend(adapter.encode(event.spoken_word))
        else:
            ids.append(markers[MARKER_SUBSTITUTE])
            ids.extend(adapter.encode(event.spoken_word))
    return ids


def pack_example(
    record: UtteranceRecord,
    adapter: TokenizerAdapter,
    ext: VocabExtension,
    mode: str,
    budget: int = MAX_TOKENS,
    clip_policy: str = "skip",
) -> PackResult:
    """Pack one record into a prompted, loss-masked example.

    Over-duration records are always skipped; over-budget records are skipped
    or have their prompt tail truncated, per ``clip_policy``.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if clip_policy not in CLIP_POLICIES:
        raise ValueError(f"unknown clip policy {clip_policy!r}")

    if record.duration_s is not None and record.duration_s > MAX_DURATION_S:
        return SkipNotice(
            utterance_id=record.utterance_id,
            reason="duration",
            detail=f"{record.duration_s}s exceeds {MAX_DURATION_S}s limit",
        )

    prompt = adapter.encode(record.target_text)
    control = [adapter.sot_id, *adapter.task_ids]
    label = _encode_label(record, adapter, ext, mode)
    end = [adapter.eot_id]

    total = len(prompt) + len(control) + len(label) + len(end)
    if total > budget:
        if clip_policy == "skip":
            return SkipNotice(
                utterance_id=record.utterance_id,
                reason="budget",
                detail=f"{total} tokens exceed budget of {budget}",
            )
        keep = len(prompt) - (total - budget)
        if keep < 0:
            return SkipNotice(
                utterance_id=record.utterance_id,
                reason="budget",
                detail=f"{total - len(prompt)} non-prompt tokens exceed budget of {budget}",
            )
        prompt = prompt[:keep]

    mask = [False] * (len(prompt) + len(control)) + [True] * (len(label) + len(end))
    return PromptedExample(
        utterance_id=record.utterance_id,
        prompt_token_ids=tuple(prompt),
        control_token_ids=tuple(control),
        label_token_ids=tuple(label),
        end_token_ids=tuple(end),
        loss_mask=tuple(mask),
        audio_path=record.audio_path,
        duration_s=record.duration_s,
    )


def build_training_set(
    records: Iterable[UtteranceRecord],
    assignment: Mapping[str, str],
    adapter: TokenizerAdapter,
    ext: VocabExtension,
    mode: str,
    output_path,
    budget: int = MAX_TOKENS,
    clip_policy: str = "skip",
) -> tuple[dict[str, dict[str, int]], list[SkipNotice]]:
    """Pack a whole manifest into a training JSONL, sorted by utterance id.

    Returns per-split accounting of packed versus skipped examples plus the
    individual skip notices.
    """
    summary = {
        split: {"packed": 0, "skipped_budget": 0, "skipped_duration": 0}
        for split in ("train", "validation", "test")
    }
    notices: list[SkipNotice] = []
    with open(output_path, "w", encoding="utf-8") as fh:
        for record in sorted(records, key=lambda r: r.utterance_id):
            if record.speaker_id not in assignment:
                raise ValueError(f"speaker {record.speaker_id!r} missing from split assignment")
            split = assignment[record.speaker_id]
            result = pack_example(record, adapter, ext, mode, budget=budget, clip_policy=clip_policy)
            if isinstance(result, SkipNotice):
                summary[split][f"skipped_{result.reason}"] += 1
                notices.append(result)
                continue
            summary[split]["packed"] += 1
            fh.write(
                json.dumps(
                    {
                        "utterance_id": result.utterance_id,
                        "audio_path": result.audio_path,
                        "input_ids": result.input_ids,
                        "loss_mask": list(result.loss_mask),
                        "split": split,
                        "mode": mode,
                    }
                )
                + "\n"
            )
    return summary, notices
