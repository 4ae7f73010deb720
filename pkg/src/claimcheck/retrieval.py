"""Evidence retrieval: search providers, recorded fixtures, and caching.

A search provider returns ranked (title, url, snippet) hits for a query.
Two implementations ship: a live HTTP backend for any JSON search API, and
a fixture-replay backend for deterministic offline runs. A TTL cache can
wrap either one.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from hashlib import sha256
from pathlib import Path
from typing import Callable, Iterable, Protocol
from urllib.parse import quote

import httpx

logger = logging.getLogger(__name__)


class RetrievalError(Exception):
    """Base class for search failures."""


class SearchTransportError(RetrievalError):
    """Provider unreachable or responding abnormally; usually retryable."""

    def __init__(self, message: str, *, retryable: bool = True, retry_after: float | None = None):
        super().__init__(message)
        self.retryable = retryable
        self.retry_after = retry_after


class SearchQuotaError(RetrievalError):
    """Authentication or quota failure, distinct from transport trouble."""

    def __init__(self, message: str, *, retryable: bool = False, retry_after: float | None = None):
        super().__init__(message)
        self.retryable = retryable
        self.retry_after = retry_after


class FixtureMissError(RetrievalError):
    """Query not present in the fixture store (distinct from zero hits)."""


@dataclass(frozen=True)
class SearchHit:
    """One search result: page title, link, and its snippet."""

    title: str
    url: str
    snippet: str
    rank: int

    def __post_init__(self):
        if not self.snippet:
            raise ValueError("search hit snippet must be non-empty")
        if self.rank < 1:
            raise ValueError(f"search hit rank must be >= 1, got {self.rank}")


@dataclass(frozen=True)
class SearchResultSet:
    """Hits for one query, ranked 1..n with no gaps."""

    query: str
    hits: tuple[SearchHit, ...]
    retrieved_at: str = ""

    def __post_init__(self):
        ranks = [hit.rank for hit in self.hits]
        if ranks != list(range(1, len(ranks) + 1)):
            raise ValueError(f"hit ranks must be contiguous from 1, got {ranks}")


def top_k(results: SearchResultSet, k: int) -> list[SearchHit]:
    """First ``min(k, len(hits))`` hits in rank order."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return list(results.hits[:k])


def normalize_query_key(text: str) -> str:
    """Stable fixture/cache key: trimmed, whitespace-collapsed query text."""
    return " ".join(text.split())


def _utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class SearchProvider(Protocol):
    def search(self, query: str, k: int) -> SearchResultSet: ...


def _result_to_json(results: SearchResultSet) -> dict:
    return {
        "query": results.query,
        "hits": [
            {"title": h.title, "url": h.url, "snippet": h.snippet, "rank": h.rank}
            for h in results.hits
        ],
        "retrieved_at": results.retrieved_at,
    }


def _result_from_json(row: dict) -> SearchResultSet:
    hits = tuple(
        SearchHit(
            title=hit["title"],
            url=hit["url"],
            snippet=hit["snippet"],
            rank=hit["rank"],
        )
        for hit in row["hits"]
    )
    return SearchResultSet(
        query=row["query"], hits=hits, retrieved_at=row.get("retrieved_at", "")
    )


class FixtureStore:
    """Recorded search results keyed by normalized query text.

    Backed by a jsonl file (one result set per line); re-recording a query
    is last-write-wins. Reads are lock-free; writes are serialized.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._entries: dict[str, SearchResultSet] = {}
        self._write_lock = threading.Lock()
        if self.path is not None and self.path.exists():
            self._load()

    def _load(self) -> None:
        assert self.path is not None
        with self.path.open("r", encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    row = json.loads(line)
                    results = _result_from_json(row)
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise RetrievalError(
                        f"{self.path}:{line_no}: bad fixture record: {exc}"
                    ) from None
                # later lines win, matching append-on-record semantics
                self._entries[normalize_query_key(results.query)] = results

    def record(self, query: str, results: SearchResultSet) -> None:
        key = normalize_query_key(query)
        with self._write_lock:
            self._entries[key] = results
            if self.path is not None:
                with self.path.open("a", encoding="utf-8") as handle:
                    handle.write(json.dumps(_result_to_json(results), ensure_ascii=False))
                    handle.write("\n")

    def lookup(self, query: str) -> SearchResultSet | None:
        return self._entries.get(normalize_query_key(query))

    def save(self, path: str | Path | None = None) -> None:
        """Rewrite the store compacted (one line per query, last write only)."""
        target = Path(path) if path is not None else self.path
        if target is None:
            raise RetrievalError("fixture store has no path to save to")
        with self._write_lock:
            lines = [
                json.dumps(_result_to_json(results), ensure_ascii=False)
                for results in self._entries.values()
            ]
            target.write_text(
                ("\n".join(lines) + "\n") if lines else "", encoding="utf-8"
            )

    def __len__(self) -> int:
        return len(self._entries)


class FixtureSearchProvider:
    """Replays recorded result sets; unrecorded queries raise FixtureMissError."""

    def __init__(self, store: FixtureStore):
        self.store = store

    def search(self, query: str, k: int) -> SearchResultSet:
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        recorded = self.store.lookup(query)
        if recorded is None:
            raise FixtureMissError(
                f"no fixture recorded for query {normalize_query_key(query)!r}"
            )
        return SearchResultSet(
            query=recorded.query,
            hits=tuple(top_k(recorded, k)),
            retrieved_at=recorded.retrieved_at,
        )


@dataclass(frozen=True)
class LiveSearchConfig:
    """Where and how to call the live search API.

    ``endpoint_template`` receives ``{query}`` (URL-escaped), ``{k}``, and
    optionally ``{key}``. When the template has no ``{key}`` placeholder the
    key is sent as a bearer token instead.
    """

    endpoint_template: str
    api_key_env: str = "SEARCH_API_KEY"
    timeout_s: float = 10.0
    min_interval_s: float = 1.0


class HttpSearchProvider:
    """Live web-search backend over a JSON HTTP API.

    Understands the common result-list shapes (``organic_results``,
    ``results``, ``items``) with title / link-or-url / snippet-or-description
    fields. Respects a minimum inter-request delay; the clock and sleep
    functions are injectable for tests.
    """

    def __init__(
        self,
        config: LiveSearchConfig,
        *,
        api_key: str | None = None,
        client: httpx.Client | None = None,
        monotonic: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.config = config
        self._api_key = api_key
        self._client = client or httpx.Client(timeout=config.timeout_s)
        self._monotonic = monotonic
        self._sleep = sleep
        self._last_request_at: float | None = None
        self._politeness_lock = threading.Lock()

    def _resolve_key(self) -> str:
        if self._api_key is not None:
            return self._api_key
        import os

        return os.environ.get(self.config.api_key_env, "")

    def _wait_politely(self) -> None:
        with self._politeness_lock:
            if self._last_request_at is not None:
                elapsed = self._monotonic() - self._last_request_at
                remaining = self.config.min_interval_s - elapsed
                if remaining > 0:
                    self._sleep(remaining)
            self._last_request_at = self._monotonic()

    def search(self, query: str, k: int) -> SearchResultSet:
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        key = self._resolve_key()
        url = self.config.endpoint_template.format(
            query=quote(query, safe=""), k=k, key=key
        )
        headers = {}
        if key and "{key}" not in self.config.endpoint_template:
            headers["Authorization"] = f"Bearer {key}"
        self._wait_politely()
        logger.info("search request %s", sha256(url.encode()).hexdigest()[:12])
        try:
            response = self._client.get(url, headers=headers)
        except httpx.TransportError as exc:
            raise SearchTransportError(f"search provider unreachable: {exc}") from exc
        if response.status_code in (401, 403):
            raise SearchQuotaError(f"search auth failure: HTTP {response.status_code}")
        if response.status_code == 429:
            raise SearchQuotaError(
                "search quota exceeded: HTTP 429",
                retryable=True,
                retry_after=_retry_after_seconds(response),
            )
        if response.status_code >= 400:
            raise SearchTransportError(
                f"search provider error: HTTP {response.status_code}",
                retryable=response.status_code >= 500,
            )
        try:
            payload = response.json()
        except ValueError as exc:
            raise SearchTransportError(f"search response not JSON: {exc}") from exc
        hits = _parse_hits(payload, k)
        return SearchResultSet(
            query=query, hits=tuple(hits), retrieved_at=_utc_now_iso()
        )


def _retry_after_seconds(response: httpx.Response) -> float | None:
    value = response.headers.get("Retry-After")
    if value is None:
        return None
    try:
        return float(value)
    except ValueError:
        return None


def _parse_hits(payload: object, k: int) -> list[SearchHit]:
    if not isinstance(payload, dict):
        raise SearchTransportError("search response has unexpected shape")
    raw = None
    for field in ("organic_results", "results", "items"):
        candidate = payload.get(field)
        if isinstance(candidate, list):
            raw = candidate
            break
    if raw is None:
        raise SearchTransportError(
            "search response missing a result list "
            "(expected organic_results/results/items)"
        )
    hits: list[SearchHit] = []
    for entry in raw:
        if not isinstance(entry, dict):
            continue
        snippet = entry.get("snippet") or entry.get("description") or ""
        if not snippet:
            continue  # hits without snippets carry no evidence
        title = entry.get("title") or ""
        url = entry.get("link") or entry.get("url") or ""
        hits.append(
            SearchHit(title=str(title), url=str(url), snippet=str(snippet), rank=len(hits) + 1)
        )
        if len(hits) == k:
            break
    return hits


class CachedSearchProvider:
    """TTL cache in front of another provider, keyed by normalized query.

    An entry remembers how many hits were requested so a later call asking
    for more hits than cached is treated as a miss (a cache hit must equal
    what a miss would have returned). Optionally persisted to a jsonl file
    under ``cache_dir``.
    """

    def __init__(
        self,
        inner: SearchProvider,
        *,
        ttl_s: float = 3600.0,
        cache_dir: str | Path | None = None,
        monotonic: Callable[[], float] = time.monotonic,
    ):
        self.inner = inner
        self.ttl_s = ttl_s
        self._monotonic = monotonic
        self._lock = threading.Lock()
        # key -> (expires_at, requested_k, results)
        self._entries: dict[str, tuple[float, int, SearchResultSet]] = {}
        self._persist_path: Path | None = None
        if cache_dir is not None:
            directory = Path(cache_dir)
            directory.mkdir(parents=True, exist_ok=True)
            self._persist_path = directory / "search_cache.jsonl"
            self._load_persisted()

    def _load_persisted(self) -> None:
        assert self._persist_path is not None
        if not self._persist_path.exists():
            return
        now = self._monotonic()
        with self._persist_path.open("r", encoding="utf-8") as handle:
            for line in handle:
                if not line.strip():
                    continue
                try:
                    row = json.loads(line)
                    results = _result_from_json(row["results"])
                    ttl_left = float(row["ttl_left"])
                    requested_k = int(row["requested_k"])
                except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                    logger.warning("dropping bad cache line in %s", self._persist_path)
                    continue
                self._entries[normalize_query_key(results.query)] = (
                    now + min(ttl_left, self.ttl_s),
                    requested_k,
                    results,
                )

    def _persist(self) -> None:
        if self._persist_path is None:
            return
        now = self._monotonic()
        lines = []
        for expires_at, requested_k, results in self._entries.values():
            lines.append(
                json.dumps(
                    {
                        "ttl_left": max(0.0, expires_at - now),
                        "requested_k": requested_k,
                        "results": _result_to_json(results),
                    },
                    ensure_ascii=False,
                )
            )
        self._persist_path.write_text(
            ("\n".join(lines) + "\n") if lines else "", encoding="utf-8"
        )

    def search(self, query: str, k: int) -> SearchResultSet:
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        key = normalize_query_key(query)
        now = self._monotonic()
        with self._lock:
            entry = self._entries.get(key)
            if entry is not None:
                expires_at, requested_k, results = entry
                exhausted = len(results.hits) < requested_k
                if now < expires_at and (requested_k >= k or exhausted):
                    return SearchResultSet(
                        query=results.query,
                        hits=tuple(top_k(results, k)),
                        retrieved_at=results.retrieved_at,
                    )
        results = self.inner.search(query, k)
        with self._lock:
            self._entries[key] = (now + self.ttl_s, k, results)
            self._persist()
        return results


def record_fixtures(
    provider: SearchProvider,
    store: FixtureStore,
    queries: Iterable[str],
    k: int,
) -> int:
    """Run queries through a provider and record the results; returns count."""
    recorded = 0
    for query in queries:
        query = query.strip()
        if not query:
            continue
        store.record(query, provider.search(query, k))
        recorded += 1
    return recorded
