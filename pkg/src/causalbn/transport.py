"""Text-in/text-out transports for the elicitation protocol.

Three implementations of one tiny interface: a real HTTP chat-completions
client, a file-replay mock, and a programmable scripted mock. Tests and
the bundled pipeline use the mocks; the HTTP client exists for live runs.
"""

from __future__ import annotations

import json
import os
import time
import urllib.error
import urllib.request
from pathlib import Path
from typing import Callable, Protocol

from .errors import ConfigError, MissingFileError, TransportError

DEFAULT_TOKEN_ENV = "LLM_API_TOKEN"
DEFAULT_MAX_ATTEMPTS = 3
DEFAULT_BACKOFF_START = 1.0  # seconds; doubles per retry
DEFAULT_TIMEOUT = 60.0


class Transport(Protocol):
    def complete(self, prompt: str) -> str:
        """Send one prompt, return the model's text response."""
        ...


class ScriptedTransport:
    """Calls a user function; handy for tests that inspect the prompt."""

    def __init__(self, fn: Callable[[str], str]):
        self._fn = fn
        self.prompts: list[str] = []

    def complete(self, prompt: str) -> str:
        self.prompts.append(prompt)
        return self._fn(prompt)


class ReplayTransport:
    """Returns canned responses in order; raises when exhausted.

    Not safe for concurrent use (single consuming cursor); build one per
    protocol run.
    """

    def __init__(self, responses: list[str]):
        self._responses = list(responses)
        self._cursor = 0
        self.prompts: list[str] = []

    @staticmethod
    def from_files(paths: list[str | Path]) -> "ReplayTransport":
        texts = []
        for path in paths:
            p = Path(path)
            if not p.exists():
                raise MissingFileError(str(p))
            texts.append(p.read_text(encoding="utf-8"))
        return ReplayTransport(texts)

    def complete(self, prompt: str) -> str:
        self.prompts.append(prompt)
        if self._cursor >= len(self._responses):
            raise TransportError(
                f"replay transport exhausted after {len(self._responses)} responses"
            )
        text = self._responses[self._cursor]
        self._cursor += 1
        return text


class HttpChatTransport:
    """Chat-completions client over urllib.

    POSTs {model, messages, temperature} as JSON with a bearer token read
    from the environment at call time. Transport-level failures (network
    errors, HTTP errors, malformed response bodies) are retried with
    exponential backoff; anything still failing after the last attempt
    surfaces as TransportError with the underlying cause attached.
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        temperature: float = 0.0,
        token_env: str = DEFAULT_TOKEN_ENV,
        timeout: float = DEFAULT_TIMEOUT,
        max_attempts: int = DEFAULT_MAX_ATTEMPTS,
        backoff_start: float = DEFAULT_BACKOFF_START,
        sleep: Callable[[float], None] = time.sleep,
        opener: Callable | None = None,
    ):
        self.endpoint = endpoint
        self.model = model
        self.temperature = temperature
        self.token_env = token_env
        self.timeout = timeout
        self.max_attempts = max_attempts
        self.backoff_start = backoff_start
        self._sleep = sleep
        # injectable for tests; defaults to urllib
        self._open = opener or urllib.request.urlopen

    def _token(self) -> str:
        token = os.environ.get(self.token_env)
        if not token:
            raise ConfigError(f"environment variable {self.token_env} is not set")
        return token

    def complete(self, prompt: str) -> str:
        body = json.dumps({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
        }).encode("utf-8")
        headers = {
            "Content-Type": "application/json",
            "Authorization": f"Bearer {self._token()}",
        }
        last: Exception | None = None
        delay = self.backoff_start
        for attempt in range(1, self.max_attempts + 1):
            request = urllib.request.Request(self.endpoint, data=body, headers=headers)
            try:
                with self._open(request, timeout=self.timeout) as response:
                    doc = json.loads(response.read().decode("utf-8"))
                return doc["choices"][0]["message"]["content"]
            except (urllib.error.URLError, OSError, json.JSONDecodeError,
                    KeyError, IndexError, TypeError) as exc:
                last = exc
                if attempt < self.max_attempts:
                    self._sleep(delay)
                    delay *= 2
        raise TransportError(
            f"chat completion failed after {self.max_attempts} attempts: {last}",
            cause=last,
        )


def load_transport(spec: str) -> Transport:
    """Build a transport from a CLI argument.

    ``mock:<file>`` replays that file's text; anything else is a path to a
    JSON config, either {"kind": "replay", "files": [...]} or
    {"kind": "http", "endpoint": ..., "model": ..., "temperature": ...,
    "token_env": ...}.
    """
    if spec.startswith("mock:"):
        return ReplayTransport.from_files([spec[len("mock:"):]])
    p = Path(spec)
    if not p.exists():
        raise MissingFileError(spec)
    try:
        doc = json.loads(p.read_text())
        kind = doc["kind"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigError(f"malformed transport config {spec}: {exc}") from exc
    if kind == "replay":
        return ReplayTransport.from_files(doc.get("files", []))
    if kind == "http":
        try:
            return HttpChatTransport(
                endpoint=doc["endpoint"],
                model=doc["model"],
                temperature=float(doc.get("temperature", 0.0)),
                token_env=doc.get("token_env", DEFAULT_TOKEN_ENV),
                timeout=float(doc.get("timeout", DEFAULT_TIMEOUT)),
            )
        except KeyError as exc:
            raise ConfigError(f"transport config {spec} missing key {exc}") from exc
    raise ConfigError(f"unknown transport kind {kind!r} in {spec}")
