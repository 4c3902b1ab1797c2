import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from miscue.asr import AsrAdapterConfig, AsrError, transcribe_batch, transcribe_record
from miscue.corpus import UtteranceRecord


def record(i, target="a b c"):
    return UtteranceRecord(
        utterance_id=f"u{i}",
        speaker_id="s0",
        target_text=target,
        verbatim_text=target,
        audio_path=f"audio/u{i}.wav",
    )


class TestConfig:
    def test_exactly_one_transport(self):
        with pytest.raises(ValueError):
            AsrAdapterConfig(kind="subprocess")
        with pytest.raises(ValueError):
            AsrAdapterConfig(kind="http", endpoint="http://x", command_template="cat {audio}")
        with pytest.raises(ValueError):
            AsrAdapterConfig(kind="http")

    def test_concurrency_floor(self):
        with pytest.raises(ValueError):
            AsrAdapterConfig(kind="http", endpoint="http://x", max_concurrency=0)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            AsrAdapterConfig(kind="carrier-pigeon", endpoint="http://x")


@pytest.fixture
def echo_script(tmp_path):
    """Stub engine: transcript is the prompt when given, else the audio path."""
    script = tmp_path / "echo_asr.sh"
    script.write_text(
        "#!/bin/sh\n"
        'if [ "$2" = FAIL ]; then echo boom >&2; exit 3; fi\n'
        'if [ -n "$2" ]; then echo "$2"; else echo "$1"; fi\n',
        encoding="utf-8",
    )
    script.chmod(0o755)
    return str(script)


class TestSubprocessAdapter:
    def test_prompt_passed_through(self, echo_script):
        config = AsrAdapterConfig(
            kind="subprocess",
            command_template=f"{echo_script} {{audio}} {{prompt}}",
            prompt_mode="prompt_field",
        )
        assert transcribe_record(config, record(0, target="hello there")) == "hello there"

    def test_prompt_off_drops_placeholder_tokens(self, echo_script):
        config = AsrAdapterConfig(
            kind="subprocess", command_template=f"{echo_script} {{audio}} {{prompt}}"
        )
        assert transcribe_record(config, record(0)) == "audio/u0.wav"

    def test_nonzero_exit_raises(self, echo_script):
        config = AsrAdapterConfig(
            kind="subprocess",
            command_template=f"{echo_script} {{audio}} {{prompt}}",
            prompt_mode="prompt_field",
        )
        with pytest.raises(AsrError, match="exited 3"):
            transcribe_record(config, record(0, target="FAIL"))

    def test_missing_binary_raises(self):
        config = AsrAdapterConfig(kind="subprocess", command_template="/no/such/engine {audio}")
        with pytest.raises(AsrError):
            transcribe_record(config, record(0))

    def test_batch_resilience(self, echo_script):
        config = AsrAdapterConfig(
            kind="subprocess",
            command_template=f"{echo_script} {{audio}} {{prompt}}",
            prompt_mode="prompt_field",
            max_concurrency=4,
        )
        records = [record(i, target="ok") for i in range(9)] + [record(9, target="FAIL")]
        hyps = transcribe_batch(config, records, system_label="stub")
        assert len(hyps) == 10
        failed = [h for h in hyps if h.error is not None]
        assert len(failed) == 1
        assert failed[0].utterance_id == "u9"
        assert failed[0].text == ""
        assert all(h.text == "ok" for h in hyps if h.error is None)


class _Handler(BaseHTTPRequestHandler):
    def do_POST(self):
        payload = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        self.server.requests.append(payload)
        if payload["audio_path"].endswith("u9.wav"):
            self.send_response(500)
            self.end_headers()
            return
        body = json.dumps({"text": payload.get("prompt", "fixed transcript")}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture
def http_stub():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
    server.requests = []
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield server
    server.shutdown()
    thread.join()


class TestHttpAdapter:
    def endpoint(self, server):
        return f"http://127.0.0.1:{server.server_address[1]}/"

    def test_prompt_field_present_only_when_on(self, http_stub):
        on = AsrAdapterConfig(
            kind="http", endpoint=self.endpoint(http_stub), prompt_mode="prompt_field"
        )
        off = AsrAdapterConfig(kind="http", endpoint=self.endpoint(http_stub))
        assert transcribe_record(on, record(0, target="say this")) == "say this"
        assert transcribe_record(off, record(1)) == "fixed transcript"
        with_prompt, without_prompt = http_stub.requests
        assert with_prompt == {"audio_path": "audio/u0.wav", "prompt": "say this"}
        assert without_prompt == {"audio_path": "audio/u1.wav"}

    def test_server_error_becomes_failure_note(self, http_stub):
        config = AsrAdapterConfig(
            kind="http", endpoint=self.endpoint(http_stub), max_concurrency=2
        )
        records = [record(i) for i in range(10)]
        hyps = transcribe_batch(config, records, system_label="stub")
        assert len(hyps) == 10
        failed = [h for h in hyps if h.error is not None]
        assert [h.utterance_id for h in failed] == ["u9"]

    def test_unreachable_endpoint(self):
        config = AsrAdapterConfig(kind="http", endpoint="http://127.0.0.1:1/", timeout_s=2)
        with pytest.raises(AsrError):
            transcribe_record(config, record(0))
