"""Uncertainty-driven retrieval: a binary judgment gate deciding whether web
search is needed for an article, a search-client abstraction, and a persistent
query cache so the same query never hits the client twice."""
from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass
from typing import Optional, Protocol

from .errors import SearchClientError
from .gateway import FieldSpec, Gateway, Prompt, UnparseableAfterRepair
from .news.cleaning import CleanArticle

DEFAULT_N_MAX = 5
QUERIES_PER_ARTICLE = 3


@dataclass(frozen=True)
class Judgment:
    value: int  # 0 = pre-training suffices, 1 = search needed
    rationale: str = ""
    queries: tuple[str, ...] = ()

    def __post_init__(self):
        if self.value not in (0, 1):
            raise ValueError(f"judgment must be 0 or 1, got {self.value}")


@dataclass(frozen=True)
class InfoSet:
    query: str
    items: tuple[tuple[str, str], ...]  # (source url, snippet), retrieval-rank order

    @property
    def empty(self) -> bool:
        return not self.items


class SearchClient(Protocol):
    def __call__(self, query: str, n: int) -> list[tuple[str, str]]: ...


class StubSearchClient:
    """File- or dict-backed client for tests and replay runs.

    Fixture shape: {normalized query: [[url, snippet], ...]}."""

    def __init__(self, fixture=None, path=None):
        if path is not None:
            with open(path, encoding="utf-8") as fh:
                fixture = json.load(fh)
        self.fixture = {normalize_query(q): v for q, v in (fixture or {}).items()}
        self.calls = 0

    def __call__(self, query: str, n: int) -> list[tuple[str, str]]:
        self.calls += 1
        hits = self.fixture.get(normalize_query(query), [])
        return [(u, s) for u, s in hits][:n]


def normalize_query(query: str) -> str:
    return re.sub(r"\s+", " ", query).strip().casefold()


class QueryCache:
    """Content-addressed query -> InfoSet map, optionally disk-persisted.
    Concurrent readers are fine; writes and in-flight miss coalescing are
    serialized per key."""

    def __init__(self, path=None):
        self.path = str(path) if path else None
        self._entries: dict[str, InfoSet] = {}
        self.hits = 0
        self.misses = 0
        self._lock = threading.Lock()
        self._inflight: dict[str, threading.Event] = {}
        if self.path:
            try:
                with open(self.path, encoding="utf-8") as fh:
                    raw = json.load(fh)
                for q, items in raw.items():
                    self._entries[q] = InfoSet(query=q, items=tuple((u, s) for u, s in items))
            except FileNotFoundError:
                pass

    def __len__(self):
        return len(self._entries)

    def lookup(self, query: str) -> Optional[InfoSet]:
        return self._entries.get(normalize_query(query))

    def fetch(self, query: str, n_max: int, client: SearchClient) -> InfoSet:
        key = normalize_query(query)
        if not key:
            raise SearchClientError("empty query after normalization")
        while True:
            with self._lock:
                if key in self._entries:
                    self.hits += 1
                    return self._entries[key]
                event = self._inflight.get(key)
                if event is None:
                    self._inflight[key] = threading.Event()
                    break
            event.wait()  # another thread is fetching this key
        try:
            self.misses += 1
            try:
                results = client(key, n_max)
            except SearchClientError:
                raise
            except Exception as exc:
                raise SearchClientError(str(exc)) from exc
            info = InfoSet(query=key, items=tuple(results[:n_max]))
            with self._lock:
                self._entries[key] = info
                if self.path:
                    self._flush()
            return info
        finally:
            with self._lock:
                self._inflight.pop(key).set()

    def _flush(self):
        with open(self.path, "w", encoding="utf-8") as fh:
            json.dump({q: [list(i) for i in e.items] for q, e in self._entries.items()},
                      fh, indent=2, ensure_ascii=False, sort_keys=True)

    def save(self, path=None):
        if path:
            self.path = str(path)
        with self._lock:
            self._flush()


JUDGE_PROMPT_VERSION = "v1"

_JUDGE_SYSTEM = (
    "You decide whether a financial news article can be analyzed from general "
    "knowledge alone, or whether it names entities or events that require a "
    "web search to ground."
)

_JUDGE_USER = (
    "Article:\n{text}\n\n"
    "Can you analyze this article without external search? Reply with JSON "
    '{{"need_search": true|false, "queries": ["search query", ...], '
    '"rationale": "one sentence"}}. List queries only when search is needed.'
)

_JUDGE_SCHEMA = {
    "need_search": FieldSpec("bool"),
    "queries": FieldSpec("list", required=False),
    "rationale": FieldSpec("text", required=False),
}


def judge_sufficiency(article: CleanArticle, gateway: Gateway) -> Judgment:
    """One LLM call; unparseable output fails open to search (value 1)."""
    prompt = Prompt(system=_JUDGE_SYSTEM, user=_JUDGE_USER.format(text=article.cleaned_text))
    try:
        parsed = gateway.complete_structured(prompt, _JUDGE_SCHEMA)
    except UnparseableAfterRepair:
        return Judgment(value=1, rationale="unparseable judgment; searching defensively",
                        queries=(article.title,) if article.title else ())
    queries = tuple(str(q) for q in parsed.get("queries", []) if str(q).strip())
    queries = queries[:QUERIES_PER_ARTICLE]
    if not parsed["need_search"]:
        return Judgment(value=0, rationale=parsed.get("rationale", ""))
    if not queries:
        queries = (article.title,) if article.title else ()
    return Judgment(value=1, rationale=parsed.get("rationale", ""), queries=queries)


def search(query: str, n_max: int, cache: QueryCache, client: SearchClient) -> InfoSet:
    return cache.fetch(query, n_max, client)


def retrieve_if_needed(article: CleanArticle, gateway: Gateway, cache: QueryCache,
                       client: SearchClient, n_max: int = DEFAULT_N_MAX
                       ) -> tuple[Judgment, Optional[InfoSet]]:
    """Judgment 0 -> no retrieval; 1 -> union of per-query results,
    deduplicated by url, rank order preserved."""
    judgment = judge_sufficiency(article, gateway)
    if judgment.value == 0:
        return judgment, None
    seen: dict[str, str] = {}
    for query in judgment.queries:
        info = search(query, n_max, cache, client)
        for url, snippet in info.items:
            if url not in seen:
                seen[url] = snippet
    merged = InfoSet(query=" | ".join(judgment.queries),
                     items=tuple(seen.items()))
    return judgment, merged
