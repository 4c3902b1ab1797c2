"""Command-line pipeline: annotate, evaluate, transcribe, split, prepare, baseline.

One job per command, composed through files, so a full experimental grid is a
shell pipeline.  Exit codes: 0 success, 1 usage or configuration error,
2 data error.  Outputs are written in sorted order, so reports and hypothesis
files are byte-identical across runs and worker counts.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from .annotation import derive_events, serialize
from .asr import AsrAdapterConfig, transcribe_batch
from .corpus import (
    DataError,
    HypothesisRecord,
    UtteranceRecord,
    load_hypotheses,
    load_manifest,
    load_split,
    make_speaker_splits,
    naive_predict,
    save_hypotheses,
    save_split,
)
from .dataprep import build_training_set, extend_vocab, save_extension
from .evaluation import (
    EvalReport,
    GroupResult,
    REPORT_FORMATS,
    build_report,
    evaluate_utterance,
    parse_label,
    summarize,
)
from .textnorm import WordTokenizer, normalize_text

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

ENDPOINT_ENV = "MISCUE_ASR_ENDPOINT"


class _Parser(argparse.ArgumentParser):
    # usage errors are exit code 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _map_jobs(fn, items, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_annotate(args) -> int:
    records = load_manifest(args.manifest)

    def one(record: UtteranceRecord) -> HypothesisRecord:
        annotated = derive_events(
            normalize_text(record.target_text), normalize_text(record.verbatim_text)
        )
        return HypothesisRecord(
            utterance_id=record.utterance_id,
            hypothesis_kind="annotated",
            text=serialize(annotated),
            system_label=args.label,
        )

    hypotheses = _map_jobs(one, records, args.jobs)
    hypotheses.sort(key=lambda h: h.utterance_id)
    save_hypotheses(hypotheses, args.output)
    return EXIT_OK


def cmd_baseline(args) -> int:
    records = load_manifest(args.manifest)
    hypotheses = sorted(
        (naive_predict(record, label=args.label) for record in records),
        key=lambda h: h.utterance_id,
    )
    save_hypotheses(hypotheses, args.output)
    return EXIT_OK


def cmd_split(args) -> int:
    records = load_manifest(args.manifest)
    try:
        ratios = tuple(float(part) for part in args.ratios.split(","))
    except ValueError:
        raise ValueError(f"--ratios must be three comma-separated numbers, got {args.ratios!r}")
    spec = make_speaker_splits(records, seed=args.seed, ratios=ratios)
    save_split(spec, args.output)

    prompts: dict[str, set[str]] = {name: set() for name in ("train", "validation", "test")}
    counts: dict[str, int] = {name: 0 for name in prompts}
    for record in records:
        split = spec.assignment[record.speaker_id]
        prompts[split].add(" ".join(normalize_text(record.target_text)))
        counts[split] += 1
    summary = {
        "speakers": {name: len(spec.speakers(name)) for name in prompts},
        "utterances": counts,
        "prompt_overlap": {
            "train_validation": len(prompts["train"] & prompts["validation"]),
            "train_test": len(prompts["train"] & prompts["test"]),
            "validation_test": len(prompts["validation"] & prompts["test"]),
        },
    }
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_prepare(args) -> int:
    records = load_manifest(args.manifest)
    assignment = load_split(args.split_file)

    vocab_path = args.vocab
    if vocab_path is None:
        adapter = WordTokenizer()
        for record in sorted(records, key=lambda r: r.utterance_id):
            adapter.encode(record.target_text)
            adapter.encode(record.verbatim_text)
        adapter.freeze()
        vocab_path = args.output + ".vocab"
        adapter.save(vocab_path)
    else:
        adapter = WordTokenizer.load(vocab_path)

    ext = extend_vocab(adapter.vocab_size)
    ext_path = args.output + ".vocab_ext.jsonl"
    save_extension(ext, ext_path)

    summary, notices = build_training_set(
        records,
        assignment,
        adapter,
        ext,
        mode=args.mode,
        output_path=args.output,
        budget=args.budget,
        clip_policy=args.clip.replace("-", "_"),
    )
    for notice in notices:
        print(f"skip {notice.utterance_id}: {notice.reason}: {notice.detail}", file=sys.stderr)
    print(
        json.dumps(
            {
                "training_file": args.output,
                "vocab_file": vocab_path,
                "extension_file": ext_path,
                "base_vocab_size": ext.base_vocab_size,
                "splits": summary,
            },
            indent=2,
            sort_keys=True,
        )
    )
    return EXIT_OK


def cmd_transcribe(args) -> int:
    records = load_manifest(args.manifest)
    missing = [r.utterance_id for r in records if not r.audio_path]
    if missing:
        raise DataError(f"{len(missing)} record(s) lack audio_path (first: {missing[0]})")

    endpoint = args.endpoint or os.environ.get(ENDPOINT_ENV)
    if args.command and args.endpoint:
        raise ValueError("configure exactly one transport: --command or --endpoint")
    if args.command:
        config = AsrAdapterConfig(
            kind="subprocess",
            command_template=args.command,
            prompt_mode="prompt_field" if args.prompt == "on" else "none",
            max_concurrency=args.jobs,
            timeout_s=args.timeout,
        )
    elif endpoint:
        config = AsrAdapterConfig(
            kind="http",
            endpoint=endpoint,
            prompt_mode="prompt_field" if args.prompt == "on" else "none",
            max_concurrency=args.jobs,
            timeout_s=args.timeout,
        )
    else:
        raise ValueError(
            f"no transport configured: pass --command or --endpoint, or set {ENDPOINT_ENV}"
        )

    hypotheses = transcribe_batch(config, records, system_label=args.label)
    failures = [h for h in hypotheses if h.error is not None]
    hypotheses.sort(key=lambda h: h.utterance_id)
    save_hypotheses(hypotheses, args.output)
    for failed in failures:
        print(f"failed {failed.utterance_id}: {failed.error}", file=sys.stderr)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    records = load_manifest(args.manifest)
    by_id = {r.utterance_id: r for r in records}
    norm: dict[str, tuple[list[str], list[str]]] = {
        r.utterance_id: (normalize_text(r.target_text), normalize_text(r.verbatim_text))
        for r in records
    }

    hypotheses = load_hypotheses(args.hypotheses)
    by_label: dict[str, list[HypothesisRecord]] = {}
    for hyp in hypotheses:
        if hyp.utterance_id not in by_id:
            raise DataError(f"hypothesis references unknown utterance_id {hyp.utterance_id!r}")
        by_label.setdefault(hyp.system_label, []).append(hyp)

    for label, hyps in by_label.items():
        kinds = {h.hypothesis_kind for h in hyps}
        if len(kinds) > 1:
            raise DataError(f"mixed hypothesis kinds within system_label {label!r}")
        seen: set[str] = set()
        for hyp in hyps:
            if hyp.utterance_id in seen:
                raise DataError(
                    f"duplicate hypothesis for utterance {hyp.utterance_id!r}"
                    f" under system_label {label!r}"
                )
            seen.add(hyp.utterance_id)

    group_by = args.group_by.split(",") if args.group_by else None

    reports: list[tuple[tuple[tuple[str, str], ...], EvalReport]] = []
    for label in sorted(by_label):
        keys = parse_label(label)
        if group_by is not None:
            available = dict(keys)
            missing = [k for k in group_by if k not in available]
            if missing:
                raise ValueError(
                    f"--group-by key {missing[0]!r} not present in system_label {label!r}"
                )
            row_keys = tuple((k, available[k]) for k in group_by)
        else:
            row_keys = keys

        def one(hyp: HypothesisRecord):
            target_words, verbatim_words = norm[hyp.utterance_id]
            return evaluate_utterance(
                hyp.utterance_id,
                by_id[hyp.utterance_id].speaker_id,
                target_words,
                verbatim_words,
                hyp.hypothesis_kind,
                hyp.text,
            )

        evals = _map_jobs(one, by_label[label], args.jobs)
        reports.append((row_keys, summarize(keys, evals)))

    rows: dict[tuple[tuple[str, str], ...], list[EvalReport]] = {}
    for row_keys, report in reports:
        rows.setdefault(row_keys, []).append(report)

    groups: list[GroupResult] = []
    for row_keys, row_reports in rows.items():
        variant_sets = {tuple(sorted(r.variants)) for r in row_reports}
        if len(variant_sets) > 1:
            raise DataError(f"mixed hypothesis kinds within report row {dict(row_keys)}")
        trials = tuple(sorted(row_reports, key=lambda r: r.group))
        for variant in sorted(row_reports[0].variants):
            groups.append(GroupResult(keys=row_keys, variant=variant, trials=trials))

    _write_text(args.output, build_report(groups, fmt=args.format))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="miscue", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="command")

    default_jobs = os.cpu_count() or 1

    annotate = sub.add_parser("annotate", help="derive annotated transcripts from ground truth")
    annotate.add_argument("--manifest", required=True)
    annotate.add_argument("--output", required=True)
    annotate.add_argument("--label", default="annotate", help="system_label for the output")
    annotate.add_argument("--jobs", type=int, default=default_jobs)
    annotate.set_defaults(func=cmd_annotate)

    evaluate = sub.add_parser("evaluate", help="score hypotheses: WER and per-miscue-type F1")
    evaluate.add_argument("--manifest", required=True)
    evaluate.add_argument("--hypotheses", required=True)
    evaluate.add_argument("--output", default=None, help="report file (default: stdout)")
    evaluate.add_argument("--format", choices=REPORT_FORMATS, default="tsv")
    evaluate.add_argument("--group-by", default=None, help="comma-separated label keys")
    evaluate.add_argument("--jobs", type=int, default=default_jobs)
    evaluate.set_defaults(func=cmd_evaluate)

    transcribe = sub.add_parser("transcribe", help="produce hypotheses via an external ASR engine")
    transcribe.add_argument("--manifest", required=True)
    transcribe.add_argument("--output", required=True)
    transcribe.add_argument("--command", default=None, help="subprocess template with {audio}/{prompt}")
    transcribe.add_argument("--endpoint", default=None, help=f"HTTP endpoint (or ${ENDPOINT_ENV})")
    transcribe.add_argument("--prompt", choices=("on", "off"), default="off")
    transcribe.add_argument("--label", default="asr")
    transcribe.add_argument("--timeout", type=float, default=30.0)
    transcribe.add_argument("--jobs", type=int, default=default_jobs)
    transcribe.set_defaults(func=cmd_transcribe)

    split = sub.add_parser("split", help="speaker-disjoint train/validation/test split")
    split.add_argument("--manifest", required=True)
    split.add_argument("--output", required=True)
    split.add_argument("--seed", type=int, default=0)
    split.add_argument("--ratios", default="0.7,0.1,0.2")
    split.set_defaults(func=cmd_split)

    prepare = sub.add_parser("prepare", help="pack prompted, loss-masked training sequences")
    prepare.add_argument("--manifest", required=True)
    prepare.add_argument("--split-file", required=True)
    prepare.add_argument("--output", required=True)
    prepare.add_argument("--mode", choices=("verbatim", "e2e"), default="verbatim")
    prepare.add_argument("--budget", type=int, default=448)
    prepare.add_argument("--clip", choices=("skip", "truncate-prompt-tail"), default="skip")
    prepare.add_argument("--vocab", default=None, help="existing vocabulary file")
    prepare.set_defaults(func=cmd_prepare)

    baseline = sub.add_parser("baseline", help="naive baseline: predict the reading prompt")
    baseline.add_argument("--manifest", required=True)
    baseline.add_argument("--output", required=True)
    baseline.add_argument("--label", default="naive")
    baseline.set_defaults(func=cmd_baseline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not hasattr(args, "func"):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except DataError as exc:
        print(f"miscue: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (OSError, ValueError) as exc:
        print(f"miscue: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
