"""Completion and judgment backends.

Four interchangeable implementations of the same two-method interface:

* ``HttpBackend`` — OpenAI-compatible remote endpoint (completions or chat
  route) with retries and backoff.
* ``RuleBackend`` — deterministic oracle built on the predicate registry;
  proposes by empirical separation and judges by exact score comparison.
* ``RecordingBackend`` / ``ReplayBackend`` — transcript fixtures for
  offline reproduction of remote runs.
* ``CachingBackend`` — memoizes any inner backend on disk; its store uses
  the same row format as a transcript, so a cache can be replayed.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import time
from collections import deque
from dataclasses import asdict, dataclass
from pathlib import Path

import requests

from .config import EndpointConfig
from .errors import (
    AuthError,
    ProviderError,
    RateLimitedError,
    ReplayMissError,
    TransportError,
    UnparseablePromptError,
)
from .predicates import PREDICATES, parse_description

QUESTION_PREFIX = "Is it true that sentence A "


@dataclass(frozen=True)
class CompletionRequest:
    prompt: str
    n: int = 1
    max_tokens: int = 32
    temperature: float = 0.7
    stop: tuple[str, ...] = ()
    forbidden_tokens: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.max_tokens < 1:
            raise ValueError(f"max_tokens must be >= 1, got {self.max_tokens}")


@dataclass(frozen=True)
class JudgmentRequest:
    question: str
    context: str

    def __post_init__(self) -> None:
        if not self.question or not self.context:
            raise ValueError("question and context must both be non-empty")


def request_hash(req: CompletionRequest | JudgmentRequest) -> str:
    """Stable digest of the full canonicalized request body."""
    kind = "complete" if isinstance(req, CompletionRequest) else "judge"
    payload = {"kind": kind, **asdict(req)}
    blob = json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class Backend:
    """Interface shared by all backends; ``id`` keys caches and reports."""

    id: str = "abstract"

    def complete(self, req: CompletionRequest) -> list[str]:
        raise NotImplementedError

    def judge(self, req: JudgmentRequest) -> str:
        raise NotImplementedError


# ---------------------------------------------------------------------------
# Rule oracle

_NUMBERED_LINE = re.compile(r"^\d+\. (.*)$")


def _parse_prompt_groups(prompt: str) -> tuple[list[str], list[str]]:
    """Recover the two sample groups from a rendered proposer prompt."""
    lines = prompt.split("\n")
    groups: dict[str, list[str]] = {}
    current: list[str] | None = None
    for line in lines:
        if line == "Group 0:":
            current = groups.setdefault("0", [])
        elif line == "Group 1:":
            current = groups.setdefault("1", [])
        elif line == "":
            current = None
        else:
            match = _NUMBERED_LINE.match(line)
            if match is not None and current is not None:
                current.append(match.group(1))
            elif current is not None:
                # continuation of a multi-line sample
                current[-1] += "\n" + line
    if not groups.get("0") or not groups.get("1"):
        raise UnparseablePromptError(
            "prompt does not contain both sample groups in the pinned layout"
        )
    return groups["0"], groups["1"]


class RuleBackend(Backend):
    """Deterministic stand-in backed by the predicate registry."""

    id = "rule"

    def complete(self, req: CompletionRequest) -> list[str]:
        group0, group1 = _parse_prompt_groups(req.prompt)

        def separation(pred) -> float:
            mean1 = sum(pred.score(t) for t in group1) / len(group1)
            mean0 = sum(pred.score(t) for t in group0) / len(group0)
            return mean1 - mean0

        ranked = sorted(PREDICATES, key=lambda p: (-separation(p), p.id))
        return [p.description for p in ranked[: req.n]]

    def judge(self, req: JudgmentRequest) -> str:
        question = req.question.strip()
        if not question.startswith(QUESTION_PREFIX) or not question.endswith("?"):
            return "unknown"
        s = question[len(QUESTION_PREFIX) : -1]
        predicate = parse_description(s)
        if predicate is None:
            return "unknown"
        if not req.context.startswith("A: ") or "\nB: " not in req.context:
            return "unknown"
        a_text, _, b_text = req.context[len("A: ") :].partition("\nB: ")
        return "yes" if predicate.score(a_text) > predicate.score(b_text) else "no"


_RULE_BACKEND = RuleBackend()


def rule_propose(req: CompletionRequest) -> list[str]:
    return _RULE_BACKEND.complete(req)


def rule_judge(req: JudgmentRequest) -> str:
    return _RULE_BACKEND.judge(req)


# ---------------------------------------------------------------------------
# HTTP backend

def _excerpt(text: str, limit: int = 200) -> str:
    return " ".join(text.split())[:limit]


class HttpBackend(Backend):
    """OpenAI-compatible endpoint speaking either completions or chat."""

    def __init__(self, endpoint: EndpointConfig):
        self.endpoint = endpoint
        self.id = f"http:{endpoint.route}:{endpoint.model}"

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        name = self.endpoint.credential_env
        if name:
            token = os.environ.get(name)
            if token is None:
                raise AuthError(f"credential environment variable {name} is not set")
            headers["Authorization"] = f"Bearer {token}"
        return headers

    def _request(self, path: str, body: dict) -> dict:
        url = self.endpoint.base_url.rstrip("/") + path
        attempts = self.endpoint.retries
        headers = self._headers()
        for attempt in range(1, attempts + 1):
            try:
                response = requests.post(
                    url, json=body, headers=headers, timeout=self.endpoint.timeout_s
                )
            except requests.exceptions.RequestException as exc:
                if attempt < attempts:
                    time.sleep(self._backoff(attempt))
                    continue
                raise TransportError(f"{url}: {exc}") from exc
            if response.status_code == 200:
                try:
                    return response.json()
                except ValueError:
                    raise ProviderError(200, _excerpt(response.text)) from None
            if response.status_code in (401, 403):
                raise AuthError(f"{url}: HTTP {response.status_code}")
            if response.status_code == 429 or response.status_code >= 500:
                if attempt < attempts:
                    time.sleep(self._backoff(attempt))
                    continue
                if response.status_code == 429:
                    raise RateLimitedError(attempts, _excerpt(response.text))
                raise ProviderError(response.status_code, _excerpt(response.text))
            raise ProviderError(response.status_code, _excerpt(response.text))
        raise TransportError(f"{url}: retry loop exited unexpectedly")

    def _backoff(self, attempt: int) -> float:
        return self.endpoint.backoff_s * (2 ** (attempt - 1))

    def _extract_texts(self, data: dict) -> list[str]:
        try:
            choices = data["choices"]
            if self.endpoint.route == "chat":
                return [c["message"]["content"] for c in choices]
            return [c["text"] for c in choices]
        except (KeyError, TypeError) as exc:
            raise ProviderError(200, f"malformed response body: {exc}") from None

    def complete(self, req: CompletionRequest) -> list[str]:
        body = {
            "model": self.endpoint.model,
            "n": req.n,
            "max_tokens": req.max_tokens,
            "temperature": req.temperature,
        }
        if req.stop:
            body["stop"] = list(req.stop)
        # Forbidden tokens are not translated to a provider bias list (that
        # would require the provider's tokenizer); the proposer enforces the
        # list post-hoc on every completion.
        if self.endpoint.route == "chat":
            body["messages"] = [{"role": "user", "content": req.prompt}]
            data = self._request("/chat/completions", body)
        else:
            body["prompt"] = req.prompt
            data = self._request("/completions", body)
        return self._extract_texts(data)

    def judge(self, req: JudgmentRequest) -> str:
        prompt = f"{req.context}\n{req.question}"
        body = {
            "model": self.endpoint.model,
            "n": 1,
            "max_tokens": 4,
            "temperature": 0.0,
        }
        if self.endpoint.route == "chat":
            body["messages"] = [{"role": "user", "content": prompt}]
            data = self._request("/chat/completions", body)
        else:
            body["prompt"] = prompt
            data = self._request("/completions", body)
        texts = self._extract_texts(data)
        if not texts:
            raise ProviderError(200, "response carried zero choices")
        return texts[0]


def http_complete(endpoint: EndpointConfig, req: CompletionRequest) -> list[str]:
    return HttpBackend(endpoint).complete(req)


def http_judge(endpoint: EndpointConfig, req: JudgmentRequest) -> str:
    return HttpBackend(endpoint).judge(req)


# ---------------------------------------------------------------------------
# Transcript store: record / replay / cache

def _load_store(path: Path) -> dict[str, deque]:
    by_hash: dict[str, deque] = {}
    if not path.exists():
        return by_hash
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            by_hash.setdefault(row["hash"], deque()).append(row["response"])
    return by_hash


class _StoreWriter:
    """Append-only jsonl store shared by the recording and caching wrappers."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()

    def append(self, kind: str, req_hash: str, response) -> None:
        row = {"kind": kind, "hash": req_hash, "response": response}
        blob = json.dumps(row, ensure_ascii=False, sort_keys=True)
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(blob + "\n")


class RecordingBackend(Backend):
    """Pass-through wrapper that persists every request/response pair."""

    def __init__(self, inner: Backend, store_path: str | Path):
        self.inner = inner
        self.id = inner.id
        self._writer = _StoreWriter(store_path)

    def complete(self, req: CompletionRequest) -> list[str]:
        response = self.inner.complete(req)
        self._writer.append("complete", request_hash(req), response)
        return response

    def judge(self, req: JudgmentRequest) -> str:
        response = self.inner.judge(req)
        self._writer.append("judge", request_hash(req), response)
        return response


class ReplayBackend(Backend):
    """Serves recorded responses only; never touches the network.

    Responses recorded for the same request hash are served in recording
    order; once only one remains it is served repeatedly, so replaying a
    run that cached duplicate requests still works.
    """

    id = "replay"

    def __init__(self, store_path: str | Path):
        self.store_path = Path(store_path)
        if not self.store_path.exists():
            raise ReplayMissError(f"transcript not found: {self.store_path}")
        self._by_hash = _load_store(self.store_path)
        self._lock = threading.Lock()

    def _serve(self, req) -> object:
        h = request_hash(req)
        with self._lock:
            queue = self._by_hash.get(h)
            if not queue:
                raise ReplayMissError(
                    f"no recorded response for request {h[:12]}… in {self.store_path}"
                )
            if len(queue) > 1:
                return queue.popleft()
            return queue[0]

    def complete(self, req: CompletionRequest) -> list[str]:
        return list(self._serve(req))

    def judge(self, req: JudgmentRequest) -> str:
        return str(self._serve(req))


class CachingBackend(Backend):
    """Serves from the store, falls through to the inner backend on miss."""

    def __init__(self, inner: Backend, store_path: str | Path):
        self.inner = inner
        self.id = inner.id
        self._writer = _StoreWriter(store_path)
        self._lock = threading.Lock()
        self._memo: dict[str, object] = {}
        for h, queue in _load_store(Path(store_path)).items():
            self._memo[h] = queue[0]

    def _lookup(self, req, kind: str, fetch):
        h = request_hash(req)
        with self._lock:
            if h in self._memo:
                return self._memo[h]
        response = fetch(req)
        with self._lock:
            if h not in self._memo:
                self._memo[h] = response
                self._writer.append(kind, h, response)
            return self._memo[h]

    def complete(self, req: CompletionRequest) -> list[str]:
        return list(self._lookup(req, "complete", self.inner.complete))

    def judge(self, req: JudgmentRequest) -> str:
        return str(self._lookup(req, "judge", self.inner.judge))


def make_backend(
    selector: str,
    endpoint: EndpointConfig | None = None,
) -> Backend:
    """Build a backend from a CLI-style selector: http, rule, replay:<path>."""
    if selector == "rule":
        return RuleBackend()
    if selector == "http":
        return HttpBackend(endpoint or EndpointConfig())
    if selector.startswith("replay:"):
        return ReplayBackend(selector.split(":", 1)[1])
    raise ValueError(f"unknown backend selector {selector!r}")
