"""Chat-completion backends: a live OpenAI-compatible HTTP client and a
scriptable deterministic mock.

A backend is anything with ``complete(transcript, params) -> str``. The mock
matches substring rules against the concatenated transcript contents (turns
joined by newlines, first matching rule wins) and counts calls so tests can
assert exact call budgets.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from ._http import post_json_with_retry
from .errors import ConfigError, ProtocolError, ValidationError

ROLES = ("system", "user", "assistant")


@dataclass(frozen=True)
class ChatTurn:
    role: str
    content: str

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValidationError(f"unknown chat role: {self.role!r}")
        if self.role in ("system", "user") and not self.content:
            raise ValidationError(f"{self.role} turn content must be non-empty")


@dataclass(frozen=True)
class CompletionParams:
    model_id: str = "mock"
    temperature: float = 0.0
    max_tokens: int = 512
    timeout_s: float = 60.0

    def __post_init__(self):
        if not (0.0 <= self.temperature <= 2.0):
            raise ConfigError("temperature must be in [0, 2]")
        if self.max_tokens < 1:
            raise ConfigError("max_tokens must be positive")
        if not self.timeout_s > 0:
            raise ConfigError("timeout_s must be positive")


@dataclass(frozen=True)
class MockScript:
    rules: tuple[tuple[str, str], ...] = ()
    default_response: str = ""

    def respond(self, rendered_prompt: str) -> str:
        for pattern, response in self.rules:
            if pattern in rendered_prompt:
                return response
        return self.default_response


def render_transcript(transcript: list[ChatTurn]) -> str:
    return "\n".join(turn.content for turn in transcript)


def _check_transcript(transcript: list[ChatTurn]) -> None:
    if not transcript:
        raise ValidationError("transcript must be non-empty")
    if transcript[0].role not in ("system", "user"):
        raise ValidationError("first turn must be system or user")


class MockBackend:
    """Deterministic scripted backend; response is a pure function of
    (script, transcript). Tracks the number of complete() calls.
    """

    def __init__(self, script: MockScript):
        self.script = script
        self.calls = 0
        self._lock = threading.Lock()

    def complete(self, transcript: list[ChatTurn], params: CompletionParams) -> str:
        _check_transcript(transcript)
        with self._lock:
            self.calls += 1
        return self.script.respond(render_transcript(transcript))


class LiveBackend:
    """OpenAI-compatible /v1/chat/completions client with bounded concurrency."""

    def __init__(self, base_url: str, api_key: str | None = None, max_in_flight: int = 4):
        if not base_url:
            raise ConfigError("live backend requires base_url")
        if max_in_flight < 1:
            raise ConfigError("max_in_flight must be >= 1")
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key
        self.calls = 0
        self._lock = threading.Lock()
        self._gate = threading.Semaphore(max_in_flight)

    def complete(self, transcript: list[ChatTurn], params: CompletionParams) -> str:
        _check_transcript(transcript)
        payload = {
            "model": params.model_id,
            "messages": [{"role": t.role, "content": t.content} for t in transcript],
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
        }
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        with self._gate:
            with self._lock:
                self.calls += 1
            body = post_json_with_retry(
                self.base_url + "/v1/chat/completions",
                payload,
                headers,
                timeout_s=params.timeout_s,
            )
        try:
            content = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise ProtocolError("chat response missing choices[0].message.content") from None
        if not isinstance(content, str) or not content:
            raise ProtocolError("assistant content is empty")
        return content


@dataclass
class ScriptedSequenceBackend:
    """Test helper: returns canned responses in order, then repeats the last."""

    responses: tuple[str, ...]
    calls: int = field(default=0)

    def complete(self, transcript: list[ChatTurn], params: CompletionParams) -> str:
        _check_transcript(transcript)
        idx = min(self.calls, len(self.responses) - 1)
        self.calls += 1
        return self.responses[idx]
