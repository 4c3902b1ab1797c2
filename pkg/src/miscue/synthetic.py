"""Seeded synthetic read-aloud corpora with injected miscues.

Stands in for licensed recordings: target sentences are sampled from a small
lexicon and the "reader" substitutes, omits, and inserts words at configurable
rates.  Generation is deterministic for a fixed seed, and utterances flagged
as over-budget or over-duration are tracked so skip accounting can be checked
exactly.
"""

from __future__ import annotations

import argparse
import random
from dataclasses import dataclass, field

from .corpus import UtteranceRecord, save_manifest

LEXICON = (
    "the quick brown fox jumps over a lazy dog while birds sing near "
    "green hills and children read small books about boats stars rivers "
    "trees wind rain summer winter light dark morning night tiny big red "
    "blue yellow house garden road bridge water stone cloud dream song "
    "story friend school teacher paper letter window door floor table"
).split()


@dataclass(frozen=True)
class SyntheticCorpus:
    records: list[UtteranceRecord]
    over_budget_ids: frozenset[str] = field(default_factory=frozenset)
    over_duration_ids: frozenset[str] = field(default_factory=frozenset)


def _read_aloud(rng: random.Random, target: list[str], sub_rate, omit_rate, ins_rate) -> list[str]:
    spoken: list[str] = []
    for word in target:
        roll = rng.random()
        if roll < sub_rate:
            other = rng.choice(LEXICON)
            while other == word:
                other = rng.choice(LEXICON)
            spoken.append(other)
        elif roll < sub_rate + omit_rate:
            pass
        else:
            spoken.append(word)
        if rng.random() < ins_rate:
            spoken.append(rng.choice(LEXICON))
    if not spoken:
        # WER needs a non-empty verbatim; an all-omitted reading is re-voiced
        # with its first word intact.
        spoken.append(target[0])
    return spoken


def _decorate(words: list[str], rng: random.Random) -> str:
    # Prompts look like prose: capitalized, punctuated, occasionally a comma.
    text = " ".join(words)
    if len(words) > 4 and rng.random() < 0.3:
        cut = rng.randrange(2, len(words) - 1)
        text = " ".join(words[:cut]) + ", " + " ".join(words[cut:])
    return text[0].upper() + text[1:] + "."


def generate_corpus(
    n_utterances: int = 100,
    n_speakers: int = 10,
    seed: int = 0,
    sub_rate: float = 0.06,
    omit_rate: float = 0.05,
    ins_rate: float = 0.05,
    words_per_utterance: tuple[int, int] = (4, 12),
    n_over_budget: int = 0,
    n_over_duration: int = 0,
    over_budget_words: int = 500,
) -> SyntheticCorpus:
    """Generate a corpus of ``n_utterances`` across ``n_speakers``.

    The first ``n_over_budget`` utterances get prompts of
    ``over_budget_words`` words; the next ``n_over_duration`` get durations
    over thirty seconds.  The two sets never overlap.
    """
    if n_over_budget + n_over_duration > n_utterances:
        raise ValueError("more over-limit utterances requested than utterances")
    rng = random.Random(seed)
    records = []
    over_budget = []
    over_duration = []
    for i in range(n_utterances):
        utterance_id = f"utt{i:05d}"
        speaker_id = f"spk{i % n_speakers:03d}"
        if i < n_over_budget:
            n_words = over_budget_words
            over_budget.append(utterance_id)
        else:
            n_words = rng.randint(*words_per_utterance)
        target = [rng.choice(LEXICON) for _ in range(n_words)]
        spoken = _read_aloud(rng, target, sub_rate, omit_rate, ins_rate)
        if n_over_budget <= i < n_over_budget + n_over_duration:
            duration = rng.uniform(31.0, 60.0)
            over_duration.append(utterance_id)
        else:
            duration = rng.uniform(1.0, 10.0)
        records.append(
            UtteranceRecord(
                utterance_id=utterance_id,
                speaker_id=speaker_id,
                target_text=_decorate(target, rng),
                verbatim_text=" ".join(spoken),
                audio_path=f"audio/{utterance_id}.wav",
                duration_s=round(duration, 2),
            )
        )
    return SyntheticCorpus(
        records=records,
        over_budget_ids=frozenset(over_budget),
        over_duration_ids=frozenset(over_duration),
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Generate a synthetic read-aloud manifest.")
    parser.add_argument("--output", required=True, help="manifest JSONL to write")
    parser.add_argument("--utterances", type=int, default=100)
    parser.add_argument("--speakers", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--sub-rate", type=float, default=0.06)
    parser.add_argument("--omit-rate", type=float, default=0.05)
    parser.add_argument("--ins-rate", type=float, default=0.05)
    args = parser.parse_args(argv)
    corpus = generate_corpus(
        n_utterances=args.utterances,
        n_speakers=args.speakers,
        seed=args.seed,
        sub_rate=args.sub_rate,
        omit_rate=args.omit_rate,
        ins_rate=args.ins_rate,
    )
    save_manifest(corpus.records, args.output)
    print(f"wrote {len(corpus.records)} records to {args.output}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
