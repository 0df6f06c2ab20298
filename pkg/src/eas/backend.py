"""Completion backends: an HTTP chat-completion client and an offline fixture map."""

from __future__ import annotations

import json
import logging
import os
import time
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Protocol

import requests

from .chunker import normalize_sentence
from .errors import (
    AuthError,
    BackendError,
    DuplicateFixtureKey,
    FixtureMiss,
    FixtureParseError,
    MissingApiKey,
    TransientExhausted,
)
from .prompting import PromptPair

log = logging.getLogger(__name__)

DEFAULT_API_KEY_ENV = "EAS_API_KEY"
RETRYABLE_STATUS = frozenset({429, 500, 502, 503, 504})


@dataclass(frozen=True)
class BackendConfig:
    """Backend selection. Retry and timeout defaults are local choices, not published ones."""

    kind: str = "fixture"  # "http" | "fixture"
    base_url: str | None = None
    model: str | None = None
    api_key_env: str = DEFAULT_API_KEY_ENV
    max_attempts: int = 3
    backoff_base: float = 1.0
    fixture_path: str | Path | None = None

    def __post_init__(self) -> None:
        if self.kind == "http":
            missing = [k for k in ("base_url", "model", "api_key_env") if not getattr(self, k)]
            if missing:
                raise ValueError(f"http backend requires {', '.join(missing)}")
        elif self.kind == "fixture":
            if not self.fixture_path:
                raise ValueError("fixture backend requires fixture_path")
        else:
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be at least 1")
        if self.backoff_base < 0:
            raise ValueError("backoff_base must be non-negative")


@dataclass(frozen=True)
class CompletionRequest:
    prompt: PromptPair
    chunk_index: int
    timeout: float = 60.0
    # the chunk's own text; the fixture backend keys on it
    sentence: str | None = None

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")


@dataclass(frozen=True)
class CompletionResult:
    raw_text: str
    backend_id: str
    attempt_count: int = 1


class Backend(Protocol):
    def complete(self, request: CompletionRequest) -> CompletionResult: ...


# --- fixtures -----------------------------------------------------------------


def load_fixtures(path: str | Path) -> dict[str, str]:
    """Read a fixture file into ``{normalized OT sentence: canned response}``."""
    text = Path(path).read_text(encoding="utf-8")
    if not text.strip():
        return {}
    try:
        entries = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FixtureParseError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(entries, list):
        raise FixtureParseError(f"{path}: expected a JSON array")
    out: dict[str, str] = {}
    for n, entry in enumerate(entries):
        if not (
            isinstance(entry, dict)
            and isinstance(entry.get("ot"), str)
            and isinstance(entry.get("response"), str)
        ):
            raise FixtureParseError(f"{path}: entry {n} needs string 'ot' and 'response'")
        key = normalize_sentence(entry["ot"])
        if key in out:
            raise DuplicateFixtureKey(f"{path}: duplicate fixture for {key!r}")
        out[key] = entry["response"]
    return out


class FixtureBackend:
    backend_id = "fixture"

    def __init__(self, responses: dict[str, str]):
        self.responses = dict(responses)

    @classmethod
    def from_path(cls, path: str | Path) -> FixtureBackend:
        return cls(load_fixtures(path))

    def complete(self, request: CompletionRequest) -> CompletionResult:
        key = normalize_sentence(request.sentence or "")
        try:
            raw = self.responses[key]
        except KeyError:
            raise FixtureMiss(f"no fixture for chunk {request.chunk_index}: {key!r}") from None
        return CompletionResult(raw, self.backend_id, 1)


# --- http -----------------------------------------------------------------------


def _response_text(body: Any) -> str:
    # OpenAI-style {"choices": [{"message": {"content": ...}}]}
    try:
        content = body["choices"][0]["message"]["content"]
        if isinstance(content, str):
            return content
    except (KeyError, IndexError, TypeError):
        pass
    # Anthropic-style {"content": [{"type": "text", "text": ...}]}
    try:
        for part in body["content"]:
            if isinstance(part, dict) and isinstance(part.get("text"), str):
                return part["text"]
    except (KeyError, TypeError):
        pass
    raise BackendError("response carries no message text")


class HttpBackend:
    """Chat-completion client with bounded exponential-backoff retries.

    Retries HTTP 429/5xx, timeouts and connection failures; 401/403 fail at
    once. The delay before retry ``n`` (1-based) is ``backoff_base * 2**(n-1)``.
    """

    def __init__(
        self,
        config: BackendConfig,
        *,
        session: requests.Session | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if config.kind != "http":
            raise ValueError("HttpBackend needs an http config")
        self.config = config
        self.session = session or requests.Session()
        self.sleep = sleep
        self.backend_id = f"http:{config.model}"

    def _api_key(self) -> str:
        key = os.environ.get(self.config.api_key_env)
        if not key:
            raise MissingApiKey(f"environment variable {self.config.api_key_env} is not set")
        return key

    def payload(self, prompt: PromptPair) -> dict[str, Any]:
        return {
            "model": self.config.model,
            "temperature": prompt.temperature,
            "messages": [
                {"role": "system", "content": prompt.system_text},
                {"role": "user", "content": prompt.user_text},
            ],
        }

    def complete(self, request: CompletionRequest) -> CompletionResult:
        key = self._api_key()
        headers = {"Authorization": f"Bearer {key}", "Content-Type": "application/json"}
        body = self.payload(request.prompt)
        last_problem = ""
        for attempt in range(1, self.config.max_attempts + 1):
            if attempt > 1:
                self.sleep(self.config.backoff_base * 2 ** (attempt - 2))
            try:
                resp = self.session.post(
                    self.config.base_url, json=body, headers=headers, timeout=request.timeout
                )
            except (requests.Timeout, requests.ConnectionError) as exc:
                last_problem = f"{type(exc).__name__}: {exc}"
                log.warning("chunk %d attempt %d: %s", request.chunk_index, attempt, last_problem)
                continue

            if resp.status_code in (401, 403):
                raise AuthError(f"HTTP {resp.status_code} from {self.config.base_url}")
            if resp.status_code in RETRYABLE_STATUS:
                last_problem = f"HTTP {resp.status_code}"
                log.warning("chunk %d attempt %d: %s", request.chunk_index, attempt, last_problem)
                continue
            if resp.status_code >= 400:
                raise BackendError(f"HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                data = resp.json()
            except ValueError:
                raise BackendError("response body is not JSON") from None
            return CompletionResult(_response_text(data), self.backend_id, attempt)

        raise TransientExhausted(
            f"gave up after {self.config.max_attempts} attempts ({last_problem})"
        )


def make_backend(config: BackendConfig) -> Backend:
    if config.kind == "http":
        return HttpBackend(config)
    assert config.fixture_path is not None
    return FixtureBackend.from_path(config.fixture_path)


def complete(config: BackendConfig, request: CompletionRequest) -> CompletionResult:
    return make_backend(config).complete(request)
