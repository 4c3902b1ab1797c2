"""Speaker-level WER, event-tag pairing, per-class F1, and report rendering.

Speaker-level WER is micro within a speaker (summed edits over summed
reference words) and macro across speakers (unweighted mean with population
standard deviation).  Tag pairing aligns on words, carrying tags along;
events left unpaired receive ``no_tag``, which participates in the other
classes' error counts but gets no metrics row of its own.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .align import DELETE, INSERT as OP_INSERT, align_words, edit_distance
from .annotation import (
    CORRECT,
    INSERT,
    OMIT,
    SUBSTITUTE,
    derive_events,
    event_tags,
    parse,
    strip_markers,
)
from .corpus import DataError

NO_TAG = "no_tag"
# Paper-style tag order used for every report column block.
TAG_ORDER = (SUBSTITUTE, OMIT, INSERT, CORRECT)

REPORT_FORMATS = ("tsv", "markdown")

CALC = "calc"
PRED = "pred"


class EvalDataError(DataError):
    """Input data cannot be evaluated (unresolved ids, mixed kinds, empty refs)."""


@dataclass(frozen=True)
class WerResult:
    edits: int
    ref_words: int

    @property
    def wer(self) -> float:
        return self.edits / self.ref_words


def utterance_wer(ref_verbatim: Sequence[str], hyp_marked: str) -> WerResult:
    """WER numerator/denominator for one utterance.

    The hypothesis is stripped of miscue markers before scoring.  An empty
    reference leaves WER undefined and raises.
    """
    if not ref_verbatim:
        raise EvalDataError("empty reference verbatim: WER undefined")
    hyp = strip_markers(hyp_marked)
    return WerResult(edits=edit_distance(ref_verbatim, hyp), ref_words=len(ref_verbatim))


def speaker_wer(by_speaker: Mapping[str, Sequence[WerResult]]) -> dict[str, float]:
    """Pool each speaker's utterances: summed edits over summed reference words."""
    out = {}
    for speaker in sorted(by_speaker):
        results = by_speaker[speaker]
        if not results:
            raise EvalDataError(f"speaker {speaker!r} has no utterances")
        out[speaker] = sum(r.edits for r in results) / sum(r.ref_words for r in results)
    return out


@dataclass(frozen=True)
class TagPairing:
    """Aligned (ground-truth tag, predicted tag) pairs, ``no_tag`` as filler."""

    pairs: tuple[tuple[str, str], ...]


def pair_tags(
    gt: Sequence[tuple[str, str]], pred: Sequence[tuple[str, str]]
) -> TagPairing:
    """Align two (tag, word) sequences by their words, carrying tags along."""
    script = align_words([w for _, w in gt], [w for _, w in pred])
    pairs = []
    for op in script.ops:
        if op.kind == DELETE:
            pairs.append((gt[op.ref_index][0], NO_TAG))
        elif op.kind == OP_INSERT:
            pairs.append((NO_TAG, pred[op.hyp_index][0]))
        else:
            pairs.append((gt[op.ref_index][0], pred[op.hyp_index][0]))
    return TagPairing(pairs=tuple(pairs))


@dataclass
class Counts:
    """Per-tag true positives, false positives, false negatives."""

    tp: int = 0
    fp: int = 0
    fn: int = 0

    def add(self, other: "Counts") -> None:
        self.tp += other.tp
        self.fp += other.fp
        self.fn += other.fn

    @property
    def support(self) -> int:
        return self.tp + self.fn

    @property
    def predicted(self) -> int:
        return self.tp + self.fp


def pair_counts(pairing: TagPairing) -> dict[str, Counts]:
    """Confusion counts for each real tag; ``no_tag`` contributes only to others."""
    counts = {tag: Counts() for tag in TAG_ORDER}
    for gt_tag, pred_tag in pairing.pairs:
        if gt_tag == pred_tag:
            if gt_tag != NO_TAG:  # a (no_tag, no_tag) pair carries no information
                counts[gt_tag].tp += 1
            continue
        if gt_tag != NO_TAG:
            counts[gt_tag].fn += 1
        if pred_tag != NO_TAG:
            counts[pred_tag].fp += 1
    return counts


@dataclass(frozen=True)
class TagMetrics:
    precision: float
    recall: float
    f1: float
    support: int


def metrics_from_counts(counts: Counts) -> TagMetrics:
    # A class never predicted gets precision 0 (and so F1 0); a class with
    # zero support gets recall 0.  No undefined divisions.
    precision = counts.tp / counts.predicted if counts.predicted else 0.0
    recall = counts.tp / counts.support if counts.support else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return TagMetrics(precision=precision, recall=recall, f1=f1, support=counts.support)


def class_metrics(pairing: TagPairing) -> dict[str, TagMetrics]:
    """Precision/recall/F1 per real tag for one pairing."""
    return {tag: metrics_from_counts(c) for tag, c in pair_counts(pairing).items()}


@dataclass(frozen=True)
class UtteranceEval:
    """Everything one utterance contributes to a report."""

    utterance_id: str
    speaker_id: str
    wer: WerResult
    counts: dict[str, dict[str, Counts]]  # variant -> tag -> Counts


def evaluate_utterance(
    utterance_id: str,
    speaker_id: str,
    target_words: Sequence[str],
    verbatim_words: Sequence[str],
    hypothesis_kind: str,
    hypothesis_text: str,
) -> UtteranceEval:
    """Score one hypothesis against one record.

    Plain hypotheses get post-hoc derived miscues (calc).  Annotated ones get
    both the events they predict (pred) and the post-hoc derivation from their
    stripped transcript (calc).
    """
    gt = event_tags(derive_events(target_words, verbatim_words))
    wer = utterance_wer(verbatim_words, hypothesis_text)
    stripped = strip_markers(hypothesis_text)
    counts = {CALC: pair_counts(pair_tags(gt, event_tags(derive_events(target_words, stripped))))}
    if hypothesis_kind == "annotated":
        pred = event_tags(parse(hypothesis_text, target_words))
        counts[PRED] = pair_counts(pair_tags(gt, pred))
    return UtteranceEval(utterance_id=utterance_id, speaker_id=speaker_id, wer=wer, counts=counts)


@dataclass(frozen=True)
class TagSummary:
    """Per-tag trial result: speaker-mean F1/recall plus pooled counterparts."""

    f1: float
    recall: float
    f1_pooled: float
    recall_pooled: float
    support: int


@dataclass(frozen=True)
class EvalReport:
    """One evaluated trial: per-speaker WERs and per-tag summaries per variant."""

    group: tuple[tuple[str, str], ...]
    speaker_wers: tuple[tuple[str, float], ...]
    wer_mean: float
    wer_std: float
    variants: dict[str, dict[str, TagSummary]] = field(default_factory=dict)

    @property
    def speaker_count(self) -> int:
        return len(self.speaker_wers)


def parse_label(label: str) -> tuple[tuple[str, str], ...]:
    """Split a system label into grouping keys.

    Labels of the form ``model=tiny,data=xc,trial=0`` become ordered key/value
    pairs; anything else is a single ``system`` key.
    """
    if "=" not in label:
        return (("system", label),)
    pairs = []
    for part in label.split(","):
        if "=" not in part:
            raise EvalDataError(f"system label {label!r} mixes key=value and bare parts")
        key, value = part.split("=", 1)
        pairs.append((key.strip(), value.strip()))
    return tuple(pairs)


def summarize(group: tuple[tuple[str, str], ...], evals: Iterable[UtteranceEval]) -> EvalReport:
    """Reduce per-utterance results into one trial report.

    Merge order is deterministic: sorted by (speaker id, utterance id).  The
    per-tag F1 mean covers speakers with ground-truth support or predictions
    for the tag; the recall mean covers speakers with support.
    """
    ordered = sorted(evals, key=lambda e: (e.speaker_id, e.utterance_id))
    if not ordered:
        raise EvalDataError("no utterances to summarize")

    by_speaker: dict[str, list[UtteranceEval]] = {}
    for ev in ordered:
        by_speaker.setdefault(ev.speaker_id, []).append(ev)

    wers = speaker_wer({s: [e.wer for e in evs] for s, evs in by_speaker.items()})
    speakers = sorted(wers)
    wer_values = [wers[s] for s in speakers]

    variants = sorted({v for ev in ordered for v in ev.counts})
    variant_summaries: dict[str, dict[str, TagSummary]] = {}
    for variant in variants:
        per_tag: dict[str, TagSummary] = {}
        for tag in TAG_ORDER:
            pooled = Counts()
            f1_values: list[float] = []
            recall_values: list[float] = []
            for speaker in speakers:
                counts = Counts()
                for ev in by_speaker[speaker]:
                    if variant in ev.counts:
                        counts.add(ev.counts[variant][tag])
                pooled.add(counts)
                metrics = metrics_from_counts(counts)
                if counts.support or counts.predicted:
                    f1_values.append(metrics.f1)
                if counts.support:
                    recall_values.append(metrics.recall)
            pooled_metrics = metrics_from_counts(pooled)
            per_tag[tag] = TagSummary(
                f1=statistics.fmean(f1_values) if f1_values else 0.0,
                recall=statistics.fmean(recall_values) if recall_values else 0.0,
                f1_pooled=pooled_metrics.f1,
                recall_pooled=pooled_metrics.recall,
                support=pooled.support,
            )
        variant_summaries[variant] = per_tag

    return EvalReport(
        group=group,
        speaker_wers=tuple((s, wers[s]) for s in speakers),
        wer_mean=statistics.fmean(wer_values),
        wer_std=statistics.pstdev(wer_values),
        variants=variant_summaries,
    )


@dataclass(frozen=True)
class GroupResult:
    """One report row: a key projection, a variant, and its trials."""

    keys: tuple[tuple[str, str], ...]
    variant: str
    trials: tuple[EvalReport, ...]


def _fmt3(value: float) -> str:
    s = f"{value:.3f}"
    return s[1:] if s.startswith("0.") else s


def _fmt_tag(f1: float, recall: float) -> str:
    return f"{_fmt3(f1)} ({_fmt3(recall)})"


def _fmt_wer(mean: float, std: float) -> str:
    return f"{mean * 100:.1f} ± {std * 100:.1f}"


def build_report(groups: Sequence[GroupResult], fmt: str = "tsv") -> str:
    """Render grouped results as a TSV or Markdown table, byte-stable.

    Column order: group keys, variant, WER mean ± std (single trial: across
    speakers; several trials: across trial means), then per-tag F1 with recall
    parenthesized, speaker-mean first and pooled after.
    """
    if not groups:
        raise ValueError("no groups to report")
    if fmt not in REPORT_FORMATS:
        raise ValueError(f"unknown report format {fmt!r}")

    key_names = [name for name, _ in groups[0].keys]
    for group in groups:
        if [name for name, _ in group.keys] != key_names:
            raise ValueError("inconsistent grouping keys across report rows")

    header = (
        key_names
        + ["variant", "wer"]
        + [f"{tag}_f1" for tag in TAG_ORDER]
        + [f"{tag}_f1_pooled" for tag in TAG_ORDER]
    )

    rows = []
    for group in sorted(groups, key=lambda g: (tuple(v for _, v in g.keys), g.variant)):
        trials = group.trials
        if len(trials) == 1:
            wer_cell = _fmt_wer(trials[0].wer_mean, trials[0].wer_std)
        else:
            means = [t.wer_mean for t in trials]
            wer_cell = _fmt_wer(statistics.fmean(means), statistics.pstdev(means))
        cells = [value for _, value in group.keys] + [group.variant, wer_cell]
        for pooled in (False, True):
            for tag in TAG_ORDER:
                summaries = [t.variants[group.variant][tag] for t in trials]
                if pooled:
                    f1 = statistics.fmean(s.f1_pooled for s in summaries)
                    recall = statistics.fmean(s.recall_pooled for s in summaries)
                else:
                    f1 = statistics.fmean(s.f1 for s in summaries)
                    recall = statistics.fmean(s.recall for s in summaries)
                cells.append(_fmt_tag(f1, recall))
        rows.append(cells)

    if fmt == "tsv":
        lines = ["\t".join(header)] + ["\t".join(row) for row in rows]
        return "\n".join(lines) + "\n"
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join([" --- "] * len(header)) + "|"]
    lines += ["| " + " | ".join(row) + " |" for row in rows]
    return "\n".join(lines) + "\n"
