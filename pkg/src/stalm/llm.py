"""LLM backends: an HTTP chat-completions client and a file replay backend."""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import httpx

from stalm.prompt.render import PromptBundle

log = logging.getLogger(__name__)

API_KEY_ENV = "LLM_API_KEY"
DEFAULT_MODEL = "gpt-4-turbo-2024-04-09"


class LLMError(RuntimeError):
    KINDS = ("auth", "timeout", "exhausted_replay", "all_failed")

    def __init__(self, kind: str, message: str = "") -> None:
        if kind not in self.KINDS:
            raise ValueError(f"unknown LLMError kind {kind!r}")
        super().__init__(f"{kind}: {message}" if message else kind)
        self.kind = kind


@dataclass(frozen=True)
class LLMRequest:
    prompt: PromptBundle
    n: int = 5
    temperature: float = 1.0
    model: str = DEFAULT_MODEL
    timeout: float = 60.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


@dataclass(frozen=True)
class LLMBatch:
    responses: tuple[str, ...]
    per_response_latency: float
    backend: str
    missing: int = 0  # requested minus received; nonzero means a partial batch

    def __post_init__(self) -> None:
        if not self.responses:
            raise ValueError("a batch holds at least one response")


class Backend(Protocol):
    name: str

    def query(self, req: LLMRequest) -> LLMBatch: ...


@dataclass
class ReplayBackend:
    """Serves ``<problem>.<call>.<i>.txt`` files; each query advances the call index."""

    directory: Path
    problem: str
    call: int = 0
    name: str = "replay"

    def __post_init__(self) -> None:
        self.directory = Path(self.directory)

    def files_for(self, call: int) -> list[Path]:
        out = []
        i = 0
        while (p := self.directory / f"{self.problem}.{call}.{i}.txt").exists():
            out.append(p)
            i += 1
        return out

    def query(self, req: LLMRequest) -> LLMBatch:
        t0 = time.perf_counter()
        files = self.files_for(self.call)[: req.n]
        call = self.call
        self.call += 1
        if not files:
            raise LLMError("exhausted_replay", f"no replay files for {self.problem} call {call}")
        texts = tuple(p.read_bytes().decode("utf-8") for p in files)  # no newline translation
        missing = req.n - len(texts)
        if missing:
            log.warning("replay call %d: %d of %d responses missing", call, missing, req.n)
        return LLMBatch(texts, (time.perf_counter() - t0) / len(texts), self.name, missing)


@dataclass
class HttpBackend:
    """Chat-completions client with retries; the key comes from ``LLM_API_KEY``."""

    endpoint: str
    multi_completion: bool = True
    max_retries: int = 3
    backoff: float = 1.0
    transport: httpx.BaseTransport | None = None
    api_key: str | None = field(default=None, repr=False)
    name: str = "http"
    sleep = staticmethod(time.sleep)

    def _key(self) -> str:
        key = self.api_key or os.environ.get(API_KEY_ENV)
        if not key:
            raise LLMError("auth", f"{API_KEY_ENV} is not set")
        return key

    def _client(self, timeout: float) -> httpx.Client:
        return httpx.Client(transport=self.transport, timeout=timeout)

    def _post(self, client: httpx.Client, body: dict) -> list[str]:
        """One request with retries; returns the completion texts."""
        headers = {"Authorization": f"Bearer {self._key()}"}
        last: str = ""
        timed_out = False
        for attempt in range(self.max_retries + 1):
            if attempt:
                self.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                resp = client.post(self.endpoint, json=body, headers=headers)
            except httpx.TimeoutException as exc:
                timed_out, last = True, type(exc).__name__
                continue
            except httpx.TransportError as exc:
                last = type(exc).__name__
                continue
            if resp.status_code in (401, 403):
                raise LLMError("auth", f"HTTP {resp.status_code}")
            if resp.status_code == 429 or resp.status_code >= 500:
                last = f"HTTP {resp.status_code}"
                continue
            if resp.status_code >= 400:
                raise LLMError("all_failed", f"HTTP {resp.status_code}")
            try:
                choices = resp.json()["choices"]
                return [c["message"]["content"] for c in choices if c.get("message", {}).get("content")]
            except (ValueError, KeyError, TypeError):
                last = "malformed response body"
                continue
        raise LLMError("timeout" if timed_out else "all_failed", last)

    def query(self, req: LLMRequest) -> LLMBatch:
        body = {"model": req.model, "messages": req.prompt.messages(), "temperature": req.temperature}
        t0 = time.perf_counter()
        with self._client(req.timeout) as client:
            if self.multi_completion:
                texts = self._post(client, {**body, "n": req.n})[: req.n]
            else:
                texts = self._independent(client, body, req.n)
        if not texts:
            raise LLMError("all_failed", "no completions returned")
        missing = req.n - len(texts)
        if missing:
            log.warning("partial batch: %d of %d responses", len(texts), req.n)
        return LLMBatch(tuple(texts), (time.perf_counter() - t0) / len(texts), self.name, missing)

    def _independent(self, client: httpx.Client, body: dict, n: int) -> list[str]:
        def one(_):
            try:
                return self._post(client, {**body, "n": 1})[:1], None
            except LLMError as exc:
                return [], exc

        with ThreadPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(one, range(n)))
        texts = [t for got, _ in results for t in got]
        errors = [e for _, e in results if e is not None]
        if not texts and errors:
            auth = [e for e in errors if e.kind == "auth"]
            raise auth[0] if auth else errors[0]
        return texts
