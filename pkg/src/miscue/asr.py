"""Adapters that obtain transcripts from an external ASR engine.

Two transports: a subprocess command template (transcript read from stdout)
and an HTTP endpoint (POST JSON, transcript in the ``text`` response field).
Per-record transport failures never abort a batch; they surface as empty-text
hypotheses with a failure note.
"""

from __future__ import annotations

import json
import shlex
import subprocess
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .corpus import HypothesisRecord, UtteranceRecord


class AsrError(RuntimeError):
    """A single transcription request failed."""


@dataclass(frozen=True)
class AsrAdapterConfig:
    kind: str  # "subprocess" or "http"
    command_template: str | None = None
    endpoint: str | None = None
    prompt_mode: str = "none"  # "none" or "prompt_field"
    max_concurrency: int = 1
    timeout_s: float = 30.0

    def __post_init__(self) -> None:
        if self.kind not in ("subprocess", "http"):
            raise ValueError(f"unknown adapter kind {self.kind!r}")
        if self.kind == "subprocess" and (not self.command_template or self.endpoint):
            raise ValueError("subprocess adapter needs a command template and no endpoint")
        if self.kind == "http" and (not self.endpoint or self.command_template):
            raise ValueError("http adapter needs an endpoint and no command template")
        if self.prompt_mode not in ("none", "prompt_field"):
            raise ValueError(f"unknown prompt_mode {self.prompt_mode!r}")
        if self.max_concurrency < 1:
            raise ValueError("max_concurrency must be at least 1")


def _subprocess_argv(template: str, audio: str, prompt: str | None) -> list[str]:
    argv = []
    for token in shlex.split(template):
        if "{prompt}" in token:
            if prompt is None:
                continue  # prompt disabled: the argument is omitted entirely
            token = token.replace("{prompt}", prompt)
        argv.append(token.replace("{audio}", audio))
    return argv


def transcribe_record(config: AsrAdapterConfig, record: UtteranceRecord) -> str:
    """One transcription request; raises :class:`AsrError` on failure."""
    prompt = record.target_text if config.prompt_mode == "prompt_field" else None
    if config.kind == "subprocess":
        argv = _subprocess_argv(config.command_template, record.audio_path, prompt)
        try:
            proc = subprocess.run(
                argv, capture_output=True, text=True, timeout=config.timeout_s
            )
        except (subprocess.TimeoutExpired, OSError) as exc:
            raise AsrError(f"command failed: {exc}") from exc
        if proc.returncode != 0:
            raise AsrError(f"command exited {proc.returncode}: {proc.stderr.strip()}")
        return proc.stdout.strip()

    payload: dict[str, str] = {"audio_path": record.audio_path}
    if prompt is not None:
        payload["prompt"] = prompt
    request = urllib.request.Request(
        config.endpoint,
        data=json.dumps(payload).encode("utf-8"),
        headers={"Content-Type": "application/json"},
    )
    try:
        with urllib.request.urlopen(request, timeout=config.timeout_s) as response:
            body = json.loads(response.read().decode("utf-8"))
    except (urllib.error.URLError, TimeoutError, json.JSONDecodeError) as exc:
        raise AsrError(f"request failed: {exc}") from exc
    if not isinstance(body, dict) or "text" not in body:
        raise AsrError("response lacks a text field")
    return body["text"]


def transcribe_batch(
    config: AsrAdapterConfig,
    records: Sequence[UtteranceRecord],
    system_label: str,
) -> list[HypothesisRecord]:
    """Transcribe every record, bounded by ``max_concurrency``.

    Failed records come back as empty-text hypotheses carrying the failure
    note; the batch itself never aborts.
    """

    def one(record: UtteranceRecord) -> HypothesisRecord:
        try:
            text = transcribe_record(config, record)
            return HypothesisRecord(
                utterance_id=record.utterance_id,
                hypothesis_kind="plain",
                text=text,
                system_label=system_label,
            )
        except AsrError as exc:
            return HypothesisRecord(
                utterance_id=record.utterance_id,
                hypothesis_kind="plain",
                text="",
                system_label=system_label,
                error=str(exc),
            )

    with ThreadPoolExecutor(max_workers=config.max_concurrency) as pool:
        return list(pool.map(one, records))
