"""Shared fixtures: synthetic gold data, recorded searches, stub scripts."""

from __future__ import annotations

import json

import pytest

from claimcheck.dataset import ClaimRecord, Dataset, Label
from claimcheck.retrieval import FixtureStore, SearchHit, SearchResultSet

TABLE_CLAIM = "تقسيم شرائح استهلاك الكهرباء في السعودية الى ثلاثة أوقات في اليوم."
TABLE_EXPLANATION = "نفى شركة هيئة تنظيم الكهرباء الخبير بشكل رسمي."


def make_hits(n: int, prefix: str = "hit") -> tuple[SearchHit, ...]:
    return tuple(
        SearchHit(
            title=f"{prefix} title {i}",
            url=f"https://example.org/{prefix}/{i}",
            snippet=f"{prefix} snippet {i}",
            rank=i,
        )
        for i in range(1, n + 1)
    )


def make_result_set(query: str, n: int, retrieved_at: str = "2024-01-01T00:00:00+00:00"):
    return SearchResultSet(query=query, hits=make_hits(n), retrieved_at=retrieved_at)


def make_record(i: int, label: Label = Label.FALSE, claim: str | None = None) -> ClaimRecord:
    return ClaimRecord(
        id=f"c{i}",
        source_account=f"account{i}",
        claim_text=claim or f"claim number {i} about something",
        gold_label=label,
        explanation=f"short justification {i}",
        extended_explanation=f"longer justification {i} with extra sources",
        evidence_sources=(f"site{i}",),
    )


@pytest.fixture
def small_gold() -> Dataset:
    return Dataset(
        records=(
            make_record(1, Label.FALSE, TABLE_CLAIM),
            make_record(2, Label.TRUE),
            make_record(3, Label.FALSE),
        ),
        name="small",
    )


@pytest.fixture
def fixture_store(tmp_path):
    store = FixtureStore(tmp_path / "fixtures.jsonl")
    return store


def write_stub_script(path, rules, default="Other. no information"):
    path.write_text(
        json.dumps({"rules": rules, "default": default}, ensure_ascii=False),
        encoding="utf-8",
    )
    return path
