"""Backend-agnostic access to chat completions and text embeddings.

Two interchangeable backends sit behind :class:`LLMGateway`:

* :class:`HttpBackend` speaks the common OpenAI-style JSON wire protocol
  (``/chat/completions`` and ``/embeddings``), with bounded retries and
  exponential backoff on transport faults and server errors.
* :class:`MockBackend` replays canned responses keyed by a fingerprint of
  the rendered prompt, and embeds text as hashed bag-of-words vectors. It
  exists so every pipeline behavior can be exercised without a model.

The gateway renders templates, forwards decoding settings, and returns the
response text with only trailing whitespace stripped. It never parses
responses — callers own interpretation.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Protocol

import requests

from .prompts import FewShotSet, TEMPLATE_NAMES, load_few_shot, render

EMBED_DIM = 256

# Generation caps per template; similarity answers need two tokens at most.
TEMPLATE_MAX_TOKENS = {
    "summary": 256,
    "self_reflect": 256,
    "similarity": 2,
    "baseline": 1024,
}


class GatewayError(RuntimeError):
    """Transport or protocol failure talking to the model backend."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


@dataclass(frozen=True)
class GenerationConfig:
    """Decoding and transport settings for one backend."""

    model_name: str = "default"
    endpoint: str = "http://127.0.0.1:8000/v1"
    embed_endpoint: str | None = None  # defaults to `endpoint`
    api_key: str | None = None
    temperature: float = 0.0
    top_p: float = 1.0
    max_tokens: int | None = None  # None = per-template default
    timeout: float = 60.0
    max_retries: int = 3

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if not 0 < self.top_p <= 1:
            raise ValueError("top_p must be in (0, 1]")
        if self.max_tokens is not None and self.max_tokens < 1:
            raise ValueError("max_tokens must be positive")

    def tokens_for(self, template: str) -> int:
        if self.max_tokens is not None:
            return self.max_tokens
        return TEMPLATE_MAX_TOKENS[template]


class Backend(Protocol):
    def chat(self, prompt: str, template: str, cfg: GenerationConfig) -> str: ...

    def embed(self, texts: list[str], cfg: GenerationConfig) -> list[list[float]]: ...


def fingerprint(prompt: str) -> str:
    """Stable identifier for a fully rendered prompt."""
    return hashlib.sha1(prompt.encode("utf-8")).hexdigest()


def hashed_bow_vector(text: str, dim: int = EMBED_DIM) -> list[float]:
    """Deterministic bag-of-words embedding: hash tokens into `dim` buckets,
    count, and L2-normalize. Texts with no shared tokens come out orthogonal
    (barring bucket collisions), which is enough geometry for clustering."""
    vec = [0.0] * dim
    for token in re.findall(r"[0-9a-z]+", text.lower()):
        digest = hashlib.sha1(token.encode("utf-8")).digest()
        vec[int.from_bytes(digest[:4], "big") % dim] += 1.0
    norm = sum(x * x for x in vec) ** 0.5
    if norm > 0:
        vec = [x / norm for x in vec]
    return vec


class MockBackend:
    """Scripted backend: fingerprint of the rendered prompt → canned text.

    `fallback` decides what an unscripted prompt gets: "error" raises (the
    safe default for tests that must not issue surprise calls) and "echo"
    returns the prompt itself. Every call is recorded in `.calls` as
    (template, fingerprint) for assertions on call counts and ordering.
    """

    def __init__(
        self,
        responses: Mapping[str, str] | None = None,
        fallback: str = "error",
    ):
        if fallback not in ("error", "echo"):
            raise ValueError(f"unknown fallback policy {fallback!r}")
        self._responses = dict(responses or {})
        self._fallback = fallback
        self._lock = threading.Lock()
        self.calls: list[tuple[str, str]] = []

    @classmethod
    def from_script(cls, source: str | Path | Mapping) -> "MockBackend":
        """Build from a script file/dict: {"fallback": ..., "responses":
        {fingerprint: {"template": ..., "response": ...}}}."""
        data = json.loads(Path(source).read_text("utf-8")) if isinstance(
            source, (str, Path)
        ) else source
        responses = {
            fp: entry["response"] if isinstance(entry, Mapping) else entry
            for fp, entry in data.get("responses", {}).items()
        }
        return cls(responses, fallback=data.get("fallback", "error"))

    def script(self, prompt: str, response: str) -> str:
        """Register a canned response; returns the fingerprint used."""
        fp = fingerprint(prompt)
        self._responses[fp] = response
        return fp

    def chat(self, prompt: str, template: str, cfg: GenerationConfig) -> str:
        fp = fingerprint(prompt)
        with self._lock:
            self.calls.append((template, fp))
            if fp in self._responses:
                return self._responses[fp]
            if self._fallback == "echo":
                return prompt
        raise GatewayError(
            f"no scripted response for {template} prompt with fingerprint {fp}"
        )

    def embed(self, texts: list[str], cfg: GenerationConfig) -> list[list[float]]:
        return [hashed_bow_vector(text) for text in texts]


class HttpBackend:
    """OpenAI-style HTTP client with bounded retries.

    Connection faults, timeouts, and 5xx responses are retried up to
    cfg.max_retries with exponential backoff; 4xx responses fail fast since
    resending the same bad request cannot help.
    """

    def __init__(self, session: requests.Session | None = None, backoff: float = 0.5):
        self._session = session or requests.Session()
        self._backoff = backoff

    def _headers(self, cfg: GenerationConfig) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if cfg.api_key:
            headers["Authorization"] = f"Bearer {cfg.api_key}"
        return headers

    def _post(self, url: str, payload: dict, cfg: GenerationConfig) -> dict:
        last_error: Exception | None = None
        for attempt in range(cfg.max_retries + 1):
            if attempt:
                time.sleep(self._backoff * 2 ** (attempt - 1))
            try:
                resp = self._session.post(
                    url, json=payload, headers=self._headers(cfg), timeout=cfg.timeout
                )
            except requests.RequestException as exc:
                last_error = exc
                continue
            if resp.status_code >= 500:
                last_error = GatewayError(
                    f"server error {resp.status_code} from {url}", resp.status_code
                )
                continue
            if resp.status_code >= 400:
                raise GatewayError(
                    f"request rejected ({resp.status_code}) by {url}: {resp.text[:500]}",
                    resp.status_code,
                )
            try:
                return resp.json()
            except ValueError as exc:
                raise GatewayError(f"non-JSON response from {url}") from exc
        raise GatewayError(
            f"gave up on {url} after {cfg.max_retries + 1} attempts: {last_error}"
        ) from last_error

    def chat(self, prompt: str, template: str, cfg: GenerationConfig) -> str:
        payload = {
            "model": cfg.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": cfg.temperature,
            "top_p": cfg.top_p,
            "max_tokens": cfg.tokens_for(template),
        }
        data = self._post(f"{cfg.endpoint.rstrip('/')}/chat/completions", payload, cfg)
        try:
            return data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise GatewayError(f"malformed chat response: {exc!r}") from exc

    def embed(self, texts: list[str], cfg: GenerationConfig) -> list[list[float]]:
        base = (cfg.embed_endpoint or cfg.endpoint).rstrip("/")
        payload = {"model": cfg.model_name, "input": list(texts)}
        data = self._post(f"{base}/embeddings", payload, cfg)
        try:
            rows = sorted(data["data"], key=lambda r: r["index"])
            vectors = [[float(x) for x in row["embedding"]] for row in rows]
        except (KeyError, TypeError) as exc:
            raise GatewayError(f"malformed embeddings response: {exc!r}") from exc
        if len(vectors) != len(texts):
            raise GatewayError(
                f"embedding count mismatch: sent {len(texts)}, got {len(vectors)}"
            )
        if len({len(v) for v in vectors}) > 1:
            raise GatewayError("embedding dimensions differ within one batch")
        return vectors


class LLMGateway:
    """Render → call → return, for the four prompt templates."""

    def __init__(
        self,
        backend: Backend,
        config: GenerationConfig | None = None,
        few_shot: FewShotSet | None = None,
    ):
        self.backend = backend
        self.config = config or GenerationConfig()
        self.few_shot = few_shot or load_few_shot()

    def chat(self, template: str, **slots: object) -> str:
        """Render `template` with `slots` and return the backend's text,
        verbatim except for trailing whitespace."""
        if template not in TEMPLATE_NAMES:
            raise ValueError(f"unknown template {template!r}")
        prompt = render(template, self.few_shot, **slots)
        return self.backend.chat(prompt, template, self.config).rstrip()

    def embed(self, texts: list[str]) -> list[list[float]]:
        if not texts:
            raise GatewayError("embed requires at least one text")
        return self.backend.embed(list(texts), self.config)
