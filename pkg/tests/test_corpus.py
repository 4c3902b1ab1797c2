import json
import random

import pytest

from miscue.annotation import derive_events
from miscue.corpus import (
    ManifestError,
    SPLIT_NAMES,
    UtteranceRecord,
    load_hypotheses,
    load_manifest,
    load_split,
    make_speaker_splits,
    naive_predict,
    save_hypotheses,
    save_manifest,
    save_split,
)
from miscue.textnorm import normalize_text


def record(i, speaker="s0", target="a b c", verbatim="a b c"):
    return UtteranceRecord(
        utterance_id=f"u{i}", speaker_id=speaker, target_text=target, verbatim_text=verbatim
    )


def write_lines(path, lines):
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")


class TestLoadManifest:
    def test_happy_path(self, tmp_path):
        path = tmp_path / "m.jsonl"
        save_manifest([record(0), record(1, speaker="s1"), record(2)], path)
        records = load_manifest(path)
        assert [r.utterance_id for r in records] == ["u0", "u1", "u2"]
        assert records[1].speaker_id == "s1"
        assert records[0].audio_path is None

    def test_duplicate_id_names_line(self, tmp_path):
        path = tmp_path / "m.jsonl"
        line = json.dumps(
            {"utterance_id": "u0", "speaker_id": "s", "target_text": "a", "verbatim_text": "a"}
        )
        write_lines(path, [line, line])
        with pytest.raises(ManifestError, match=r":2: duplicate utterance_id"):
            load_manifest(path)

    def test_missing_field_names_line(self, tmp_path):
        path = tmp_path / "m.jsonl"
        write_lines(path, [json.dumps({"utterance_id": "u0", "speaker_id": "s"})])
        with pytest.raises(ManifestError, match=r":1: missing required field 'target_text'"):
            load_manifest(path)

    def test_invalid_json_names_line(self, tmp_path):
        path = tmp_path / "m.jsonl"
        write_lines(path, ["{not json"])
        with pytest.raises(ManifestError, match=r":1: invalid JSON"):
            load_manifest(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "m.jsonl"
        path.write_text("", encoding="utf-8")
        assert load_manifest(path) == []

    def test_empty_target_rejected(self, tmp_path):
        path = tmp_path / "m.jsonl"
        write_lines(
            path,
            [json.dumps({"utterance_id": "u0", "speaker_id": "s", "target_text": " ", "verbatim_text": "a"})],
        )
        with pytest.raises(ManifestError, match="target_text is empty"):
            load_manifest(path)

    def test_bad_duration(self, tmp_path):
        path = tmp_path / "m.jsonl"
        write_lines(
            path,
            [
                json.dumps(
                    {
                        "utterance_id": "u0",
                        "speaker_id": "s",
                        "target_text": "a",
                        "verbatim_text": "a",
                        "duration_s": "long",
                    }
                )
            ],
        )
        with pytest.raises(ManifestError, match="duration_s"):
            load_manifest(path)

    def test_round_trip_optional_fields(self, tmp_path):
        path = tmp_path / "m.jsonl"
        rec = UtteranceRecord("u0", "s", "a", "a", audio_path="x.wav", duration_s=2.5)
        save_manifest([rec], path)
        assert load_manifest(path) == [rec]


class TestSpeakerSplits:
    def make_records(self, n_speakers, per_speaker=3):
        return [
            record(f"{s}_{i}", speaker=f"spk{s:03d}")
            for s in range(n_speakers)
            for i in range(per_speaker)
        ]

    def test_ten_speakers_default_ratios(self):
        spec = make_speaker_splits(self.make_records(10), seed=0)
        sizes = {name: len(spec.speakers(name)) for name in SPLIT_NAMES}
        assert sizes == {"train": 7, "validation": 1, "test": 2}

    def test_deterministic(self):
        records = self.make_records(12)
        assert make_speaker_splits(records, seed=5) == make_speaker_splits(records, seed=5)

    def test_record_order_irrelevant(self):
        records = self.make_records(12)
        shuffled = list(records)
        random.Random(9).shuffle(shuffled)
        assert make_speaker_splits(records, seed=5) == make_speaker_splits(shuffled, seed=5)

    def test_three_speakers_floor_one_each(self):
        spec = make_speaker_splits(self.make_records(3), seed=0)
        sizes = {name: len(spec.speakers(name)) for name in SPLIT_NAMES}
        assert sizes == {"train": 1, "validation": 1, "test": 1}

    def test_too_few_speakers(self):
        with pytest.raises(ValueError, match="at least 3 speakers"):
            make_speaker_splits(self.make_records(2), seed=0)

    def test_bad_ratios(self):
        records = self.make_records(5)
        with pytest.raises(ValueError, match="sum to 1"):
            make_speaker_splits(records, seed=0, ratios=(0.5, 0.5, 0.5))

    def test_disjoint_cover_random(self):
        rng = random.Random(0)
        for _ in range(100):
            n = rng.randint(3, 40)
            records = self.make_records(n, per_speaker=rng.randint(1, 4))
            spec = make_speaker_splits(records, seed=rng.randint(0, 1000))
            assert sorted(spec.assignment) == sorted({r.speaker_id for r in records})
            assert set(spec.assignment.values()) <= set(SPLIT_NAMES)
            assert all(len(spec.speakers(name)) >= 1 for name in SPLIT_NAMES)

    def test_split_file_round_trip(self, tmp_path):
        spec = make_speaker_splits(self.make_records(10), seed=3)
        path = tmp_path / "split.jsonl"
        save_split(spec, path)
        assert load_split(path) == spec.assignment

    def test_split_file_byte_stable(self, tmp_path):
        spec = make_speaker_splits(self.make_records(10), seed=3)
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        save_split(spec, a)
        save_split(spec, b)
        assert a.read_bytes() == b.read_bytes()

    def test_three_seeds_differ(self):
        records = self.make_records(12)
        specs = [make_speaker_splits(records, seed=s).assignment for s in (0, 1, 2)]
        assert specs[0] != specs[1] or specs[1] != specs[2]

    def test_load_split_unknown_name(self, tmp_path):
        path = tmp_path / "split.jsonl"
        write_lines(path, [json.dumps({"speaker_id": "s", "split": "dev"})])
        with pytest.raises(ManifestError, match="unknown split"):
            load_split(path)


class TestNaivePredict:
    def test_copies_target(self):
        hyp = naive_predict(record(0, target="a b c"))
        assert hyp.text == "a b c"
        assert hyp.hypothesis_kind == "plain"
        assert hyp.system_label == "naive"

    def test_no_miscues_against_itself(self):
        rec = record(0, target="The quick fox.")
        hyp = naive_predict(rec)
        annotated = derive_events(normalize_text(rec.target_text), normalize_text(hyp.text))
        assert all(e.kind == "correct" for e in annotated.events)

    def test_wer_zero_when_verbatim_equals_target(self):
        from miscue.evaluation import utterance_wer

        rec = record(0, target="The quick fox.", verbatim="the quick fox")
        hyp = naive_predict(rec)
        assert utterance_wer(normalize_text(rec.verbatim_text), hyp.text).wer == 0.0


class TestHypothesesIO:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "h.jsonl"
        hyps = [naive_predict(record(i)) for i in range(3)]
        save_hypotheses(hyps, path)
        assert load_hypotheses(path) == hyps

    def test_error_note_preserved(self, tmp_path):
        from miscue.corpus import HypothesisRecord

        path = tmp_path / "h.jsonl"
        hyp = HypothesisRecord("u0", "plain", "", "asr", error="timeout")
        save_hypotheses([hyp], path)
        assert load_hypotheses(path)[0].error == "timeout"

    def test_bad_kind_rejected(self, tmp_path):
        path = tmp_path / "h.jsonl"
        write_lines(
            path,
            [json.dumps({"utterance_id": "u", "hypothesis_kind": "fancy", "text": "", "system_label": "x"})],
        )
        with pytest.raises(ManifestError, match="hypothesis_kind"):
            load_hypotheses(path)
