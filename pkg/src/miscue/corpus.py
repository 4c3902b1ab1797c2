"""Dataset ingestion, speaker-disjoint splits, and the naive baseline.

Manifests and hypotheses are JSONL: one record per line, streamable and
diff-friendly.  Audio is referenced by path only and never decoded here.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from typing import Iterable, Sequence


class DataError(ValueError):
    """Malformed or inconsistent input data (exit code 2 at the CLI)."""


class ManifestError(DataError):
    """A manifest or hypotheses file violated its schema; message names the line."""


SPLIT_NAMES = ("train", "validation", "test")
DEFAULT_RATIOS = (0.70, 0.10, 0.20)

HYPOTHESIS_KINDS = ("plain", "annotated")


@dataclass(frozen=True)
class UtteranceRecord:
    """One read-aloud sample: who read what, and what they actually said."""

    utterance_id: str
    speaker_id: str
    target_text: str
    verbatim_text: str
    audio_path: str | None = None
    duration_s: float | None = None


@dataclass(frozen=True)
class HypothesisRecord:
    """One system output for one utterance, plain text or marker string."""

    utterance_id: str
    hypothesis_kind: str
    text: str
    system_label: str
    error: str | None = None


@dataclass(frozen=True)
class SplitSpec:
    seed: int
    ratios: tuple[float, float, float]
    assignment: dict[str, str]

    def speakers(self, split: str) -> list[str]:
        return sorted(s for s, name in self.assignment.items() if name == split)


_REQUIRED_FIELDS = ("utterance_id", "speaker_id", "target_text", "verbatim_text")


def _parse_line(path, lineno: int, line: str) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}:{lineno}: invalid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise ManifestError(f"{path}:{lineno}: expected a JSON object")
    return obj


def load_manifest(path) -> list[UtteranceRecord]:
    """Read a manifest file, checking invariants; errors name the line."""
    records: list[UtteranceRecord] = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = _parse_line(path, lineno, line)
            for name in _REQUIRED_FIELDS:
                if name not in obj:
                    raise ManifestError(f"{path}:{lineno}: missing required field {name!r}")
                if not isinstance(obj[name], str):
                    raise ManifestError(f"{path}:{lineno}: field {name!r} must be a string")
            utterance_id = obj["utterance_id"]
            if utterance_id in seen:
                raise ManifestError(
                    f"{path}:{lineno}: duplicate utterance_id {utterance_id!r}"
                    f" (first seen on line {seen[utterance_id]})"
                )
            if not obj["target_text"].strip():
                raise ManifestError(f"{path}:{lineno}: target_text is empty")
            duration = obj.get("duration_s")
            if duration is not None and not isinstance(duration, (int, float)):
                raise ManifestError(f"{path}:{lineno}: duration_s must be a number")
            seen[utterance_id] = lineno
            records.append(
                UtteranceRecord(
                    utterance_id=utterance_id,
                    speaker_id=obj["speaker_id"],
                    target_text=obj["target_text"],
                    verbatim_text=obj["verbatim_text"],
                    audio_path=obj.get("audio_path"),
                    duration_s=float(duration) if duration is not None else None,
                )
            )
    return records


def save_manifest(records: Iterable[UtteranceRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            obj = {
                "utterance_id": record.utterance_id,
                "speaker_id": record.speaker_id,
                "target_text": record.target_text,
                "verbatim_text": record.verbatim_text,
            }
            if record.audio_path is not None:
                obj["audio_path"] = record.audio_path
            if record.duration_s is not None:
                obj["duration_s"] = record.duration_s
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def load_hypotheses(path) -> list[HypothesisRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = _parse_line(path, lineno, line)
            for name in ("utterance_id", "hypothesis_kind", "text", "system_label"):
                if name not in obj:
                    raise ManifestError(f"{path}:{lineno}: missing required field {name!r}")
            if obj["hypothesis_kind"] not in HYPOTHESIS_KINDS:
                raise ManifestError(
                    f"{path}:{lineno}: hypothesis_kind must be one of {HYPOTHESIS_KINDS}"
                )
            records.append(
                HypothesisRecord(
                    utterance_id=obj["utterance_id"],
                    hypothesis_kind=obj["hypothesis_kind"],
                    text=obj["text"],
                    system_label=obj["system_label"],
                    error=obj.get("error"),
                )
            )
    return records


def save_hypotheses(records: Iterable[HypothesisRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            obj = {
                "utterance_id": record.utterance_id,
                "hypothesis_kind": record.hypothesis_kind,
                "text": record.text,
                "system_label": record.system_label,
            }
            if record.error is not None:
                obj["error"] = record.error
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def _largest_remainder(n: int, ratios: Sequence[float]) -> list[int]:
    """Apportion n items to ratios; every bucket keeps at least one item."""
    quotas = [r * n for r in ratios]
    counts = [math.floor(q) for q in quotas]
    remainders = sorted(
        range(len(ratios)), key=lambda i: (-(quotas[i] - counts[i]), i)
    )
    leftover = n - sum(counts)
    for i in range(leftover):
        counts[remainders[i % len(ratios)]] += 1
    while any(c == 0 for c in counts):
        counts[counts.index(0)] += 1
        counts[counts.index(max(counts))] -= 1
    return counts


def make_speaker_splits(
    records: Sequence[UtteranceRecord],
    seed: int,
    ratios: tuple[float, float, float] = DEFAULT_RATIOS,
) -> SplitSpec:
    """Partition speakers into train/validation/test with no overlap.

    Speakers are shuffled by a seeded PRNG and partitioned by largest-remainder
    rounding on speaker counts (floor of one speaker per split).  Deterministic
    for fixed (records, seed); independent of record order.
    """
    if len(ratios) != len(SPLIT_NAMES):
        raise ValueError(f"expected {len(SPLIT_NAMES)} ratios, got {len(ratios)}")
    if any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must be non-negative and sum to 1, got {ratios}")
    speakers = sorted({r.speaker_id for r in records})
    if len(speakers) < len(SPLIT_NAMES):
        raise ValueError(f"need at least {len(SPLIT_NAMES)} speakers, got {len(speakers)}")
    random.Random(seed).shuffle(speakers)
    counts = _largest_remainder(len(speakers), ratios)
    assignment: dict[str, str] = {}
    start = 0
    for name, count in zip(SPLIT_NAMES, counts):
        for speaker in speakers[start : start + count]:
            assignment[speaker] = name
        start += count
    return SplitSpec(seed=seed, ratios=tuple(ratios), assignment=assignment)


def save_split(spec: SplitSpec, path) -> None:
    """Write the assignment sorted by speaker id (byte-stable per seed)."""
    with open(path, "w", encoding="utf-8") as fh:
        for speaker in sorted(spec.assignment):
            fh.write(json.dumps({"speaker_id": speaker, "split": spec.assignment[speaker]}) + "\n")


def load_split(path) -> dict[str, str]:
    assignment: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = _parse_line(path, lineno, line)
            if "speaker_id" not in obj or "split" not in obj:
                raise ManifestError(f"{path}:{lineno}: expected speaker_id and split fields")
            if obj["split"] not in SPLIT_NAMES:
                raise ManifestError(f"{path}:{lineno}: unknown split {obj['split']!r}")
            assignment[obj["speaker_id"]] = obj["split"]
    return assignment


def naive_predict(record: UtteranceRecord, label: str = "naive") -> HypothesisRecord:
    """The no-model baseline: predict the reading prompt itself.

    It can never flag a miscue; its WER reflects how much readers deviate
    from the prompt.
    """
    return HypothesisRecord(
        utterance_id=record.utterance_id,
        hypothesis_kind="plain",
        text=record.target_text,
        system_label=label,
    )
