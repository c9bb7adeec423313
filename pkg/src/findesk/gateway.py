"""Chat-completion gateway with deterministic record/replay cassettes.

A Provider is any callable Prompt -> Completion. The gateway adds retry,
token-bucket rate limiting, cassette persistence, and structured-output
parsing with a single repair re-prompt.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
import re
import threading
import time
from dataclasses import dataclass, replace
from typing import Callable, Mapping, Optional

import requests

from .errors import CassetteMiss, ProviderError, UnparseableAfterRepair

TRANSIENT_STATUSES = {408, 429, 500, 502, 503, 504}
BACKOFF_SECONDS = (1.0, 2.0, 4.0)


@dataclass(frozen=True)
class Prompt:
    system: str
    user: str
    temperature: float = 0.0
    max_tokens: int = 1024
    model_id: str = "default"

    def __post_init__(self):
        if not self.user:
            raise ValueError("prompt user text must be non-empty")
        if not (0.0 <= self.temperature <= 2.0):
            raise ValueError(f"temperature out of range: {self.temperature}")


@dataclass(frozen=True)
class Completion:
    text: str
    token_logprobs: Optional[tuple[tuple[str, float], ...]] = None
    prompt_tokens: int = 0
    completion_tokens: int = 0

    def __post_init__(self):
        if self.token_logprobs:
            for tok, lp in self.token_logprobs:
                if lp > 0:
                    raise ValueError(f"log-probability must be <= 0, got {lp} for {tok!r}")


def fingerprint(prompt: Prompt) -> str:
    """Stable hash of the canonical JSON form; field order and surrounding
    whitespace never change it."""
    canonical = json.dumps(
        {
            "system": prompt.system,
            "user": prompt.user,
            "temperature": prompt.temperature,
            "max_tokens": prompt.max_tokens,
            "model_id": prompt.model_id,
        },
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class Cassette:
    """On-disk map request-fingerprint -> Completion."""

    def __init__(self, path=None, entries: dict | None = None):
        self.path = str(path) if path else None
        self._entries: dict[str, dict] = dict(entries or {})
        self._lock = threading.Lock()
        if self.path and os.path.exists(self.path):
            with open(self.path, encoding="utf-8") as fh:
                content = fh.read().strip()
                if content:
                    self._entries.update(json.loads(content))

    def __len__(self):
        return len(self._entries)

    def __contains__(self, fp: str):
        return fp in self._entries

    def get(self, fp: str) -> Completion:
        try:
            e = self._entries[fp]
        except KeyError:
            raise CassetteMiss(fp) from None
        logprobs = e.get("token_logprobs")
        return Completion(
            text=e["text"],
            token_logprobs=tuple((t, lp) for t, lp in logprobs) if logprobs else None,
            prompt_tokens=e.get("prompt_tokens", 0),
            completion_tokens=e.get("completion_tokens", 0),
        )

    def put(self, fp: str, completion: Completion) -> None:
        with self._lock:
            self._entries[fp] = {
                "text": completion.text,
                "token_logprobs": [list(t) for t in completion.token_logprobs]
                if completion.token_logprobs
                else None,
                "prompt_tokens": completion.prompt_tokens,
                "completion_tokens": completion.completion_tokens,
            }
            if self.path:
                self._flush()

    def _flush(self):
        tmp = self.path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(self._entries, fh, indent=2, sort_keys=True, ensure_ascii=False)
        os.replace(tmp, self.path)

    def save(self, path=None):
        if path:
            self.path = str(path)
        with self._lock:
            self._flush()


class RateLimiter:
    """Token bucket; requests_per_minute <= 0 disables limiting."""

    def __init__(self, requests_per_minute: float = 0.0):
        self.rate = requests_per_minute / 60.0
        self.capacity = max(requests_per_minute, 1.0)
        self._tokens = self.capacity
        self._stamp = time.monotonic()
        self._lock = threading.Lock()

    def acquire(self):
        if self.rate <= 0:
            return
        with self._lock:
            now = time.monotonic()
            self._tokens = min(self.capacity, self._tokens + (now - self._stamp) * self.rate)
            self._stamp = now
            if self._tokens < 1.0:
                wait = (1.0 - self._tokens) / self.rate
                time.sleep(wait)
                self._tokens = 0.0
            else:
                self._tokens -= 1.0


class Gateway:
    """Front door for every model call the agents make.

    mode: 'replay' serves the cassette only (no provider, no network);
    'record' calls the provider and appends to the cassette;
    'passthrough' calls the provider without touching the cassette.
    """

    def __init__(self, provider: Callable[[Prompt], Completion] | None = None,
                 cassette: Cassette | None = None, mode: str = "replay",
                 requests_per_minute: float = 0.0,
                 sleep=time.sleep):
        if mode not in ("record", "replay", "passthrough"):
            raise ValueError(f"unknown gateway mode: {mode}")
        if mode != "replay" and provider is None:
            raise ValueError(f"mode {mode!r} requires a provider")
        if mode != "passthrough" and cassette is None:
            cassette = Cassette()
        self.provider = provider
        self.cassette = cassette
        self.mode = mode
        self._limiter = RateLimiter(requests_per_minute)
        self._sleep = sleep
        self.calls_made = 0  # provider invocations, for tests/audit
        self.prompt_log: list[Prompt] = []  # every prompt served, any mode

    def complete(self, prompt: Prompt) -> Completion:
        self.prompt_log.append(prompt)
        fp = fingerprint(prompt)
        if self.mode == "replay":
            return self.cassette.get(fp)
        if self.mode == "record" and fp in self.cassette:
            return self.cassette.get(fp)
        completion = self._call_with_retry(prompt)
        if self.mode == "record":
            self.cassette.put(fp, completion)
        return completion

    def _call_with_retry(self, prompt: Prompt) -> Completion:
        last_exc = None
        for attempt in range(len(BACKOFF_SECONDS) + 1):
            self._limiter.acquire()
            try:
                self.calls_made += 1
                return self.provider(prompt)
            except ProviderError as exc:
                last_exc = exc
                if exc.status not in TRANSIENT_STATUSES or attempt == len(BACKOFF_SECONDS):
                    raise
                self._sleep(BACKOFF_SECONDS[attempt])
        raise last_exc

    def complete_structured(self, prompt: Prompt, schema: Mapping[str, "FieldSpec"]) -> dict:
        """Parse a JSON object out of the completion and validate it against
        schema; on failure, issue one repair re-prompt before giving up."""
        completion = self.complete(prompt)
        try:
            return parse_structured(completion.text, schema)
        except ValueError as first_error:
            repair = replace(
                prompt,
                user=prompt.user
                + "\n\nYour previous reply could not be parsed ("
                + str(first_error)
                + "). Respond again with ONLY a JSON object with fields: "
                + ", ".join(f"{k} ({v.describe()})" for k, v in schema.items()),
            )
            completion = self.complete(repair)
            try:
                return parse_structured(completion.text, schema)
            except ValueError as exc:
                raise UnparseableAfterRepair(str(exc)) from exc


@dataclass(frozen=True)
class FieldSpec:
    kind: str  # 'enum' | 'number' | 'text' | 'bool' | 'list' | 'map'
    choices: tuple = ()
    lo: float = -math.inf
    hi: float = math.inf
    required: bool = True

    def describe(self) -> str:
        if self.kind == "enum":
            return "|".join(map(str, self.choices))
        if self.kind == "number":
            bounds = ""
            if math.isfinite(self.lo) or math.isfinite(self.hi):
                bounds = f" in [{self.lo}, {self.hi}]"
            return "number" + bounds
        return self.kind

    def validate(self, name: str, value):
        if self.kind == "enum":
            if value not in self.choices:
                raise ValueError(f"{name}: {value!r} not in {self.choices}")
            return value
        if self.kind == "number":
            try:
                v = float(value)
            except (TypeError, ValueError):
                raise ValueError(f"{name}: not a number: {value!r}") from None
            if not (self.lo <= v <= self.hi):
                raise ValueError(f"{name}: {v} outside [{self.lo}, {self.hi}]")
            return v
        if self.kind == "bool":
            if isinstance(value, bool):
                return value
            if isinstance(value, str) and value.lower() in ("true", "false", "yes", "no"):
                return value.lower() in ("true", "yes")
            raise ValueError(f"{name}: not a boolean: {value!r}")
        if self.kind == "list":
            if not isinstance(value, list):
                raise ValueError(f"{name}: not a list: {value!r}")
            return value
        if self.kind == "map":
            if not isinstance(value, dict):
                raise ValueError(f"{name}: not an object: {value!r}")
            return value
        if not isinstance(value, str):
            raise ValueError(f"{name}: expected text, got {type(value).__name__}")
        return value


_FENCE = re.compile(r"```(?:json)?\s*(\{.*?\})\s*```", re.DOTALL)


def extract_json_block(text: str) -> str:
    m = _FENCE.search(text)
    if m:
        return m.group(1)
    # fall back to the first balanced top-level object
    start = text.find("{")
    if start == -1:
        raise ValueError("no JSON object found in response")
    depth = 0
    in_str = False
    escape = False
    for i, ch in enumerate(text[start:], start):
        if escape:
            escape = False
            continue
        if ch == "\\" and in_str:
            escape = True
        elif ch == '"':
            in_str = not in_str
        elif not in_str and ch == "{":
            depth += 1
        elif not in_str and ch == "}":
            depth -= 1
            if depth == 0:
                return text[start : i + 1]
    raise ValueError("unterminated JSON object in response")


def parse_structured(text: str, schema: Mapping[str, FieldSpec]) -> dict:
    try:
        record = json.loads(extract_json_block(text))
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid JSON: {exc}") from exc
    if not isinstance(record, dict):
        raise ValueError("top-level JSON value is not an object")
    out = {}
    for name, spec in schema.items():
        if name not in record or record[name] is None:
            if spec.required:
                raise ValueError(f"missing field: {name}")
            continue
        out[name] = spec.validate(name, record[name])
    return out


class OpenAIChatProvider:
    """Minimal OpenAI-compatible chat completion client.

    Configuration via environment unless given explicitly:
    FINDESK_LLM_ENDPOINT, FINDESK_LLM_API_KEY, FINDESK_LLM_MODEL.
    """

    def __init__(self, endpoint: str | None = None, api_key: str | None = None,
                 model: str | None = None, want_logprobs: bool = False, timeout: float = 60.0):
        self.endpoint = endpoint or os.environ.get("FINDESK_LLM_ENDPOINT", "")
        self.api_key = api_key or os.environ.get("FINDESK_LLM_API_KEY", "")
        self.model = model or os.environ.get("FINDESK_LLM_MODEL", "")
        self.want_logprobs = want_logprobs
        self.timeout = timeout
        if not self.endpoint:
            raise ValueError("no LLM endpoint configured (FINDESK_LLM_ENDPOINT)")

    def __call__(self, prompt: Prompt) -> Completion:
        body = {
            "model": self.model or prompt.model_id,
            "messages": [
                {"role": "system", "content": prompt.system},
                {"role": "user", "content": prompt.user},
            ],
            "temperature": prompt.temperature,
            "max_tokens": prompt.max_tokens,
        }
        if self.want_logprobs:
            body["logprobs"] = True
        resp = requests.post(
            self.endpoint,
            json=body,
            headers={"Authorization": f"Bearer {self.api_key}"} if self.api_key else {},
            timeout=self.timeout,
        )
        if resp.status_code != 200:
            raise ProviderError(resp.status_code, resp.text[:500])
        data = resp.json()
        choice = data["choices"][0]
        logprobs = None
        lp = choice.get("logprobs") or {}
        if lp.get("content"):
            logprobs = tuple((t["token"], min(t["logprob"], 0.0)) for t in lp["content"])
        usage = data.get("usage", {})
        return Completion(
            text=choice["message"]["content"],
            token_logprobs=logprobs,
            prompt_tokens=usage.get("prompt_tokens", 0),
            completion_tokens=usage.get("completion_tokens", 0),
        )
