"""HTTP service exposing the verification pipeline.

Endpoints:
    POST /api/verify  -> label, explanation, evidence, timings
    POST /api/ablate  -> label per snippet count, explanation, evidence
    GET  /api/health  -> status and backend kinds

When a frontend directory is configured (or the default build exists) it
is served statically at the root path.
"""

from __future__ import annotations

import logging
from dataclasses import replace
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field, field_validator

import claimcheck
from claimcheck.config import AppConfig, build_completion_provider, build_search_provider
from claimcheck.preprocess import CleaningConfig, HashtagMode
from claimcheck.retrieval import FixtureMissError, RetrievalError, SearchProvider
from claimcheck.verification import (
    CompletionError,
    CompletionProvider,
    run_ablation,
    run_pipeline,
)

logger = logging.getLogger(__name__)


class VerifyRequest(BaseModel):
    claim: str
    snippet_count: int | None = Field(default=None, ge=1, le=50)
    explanation_language: Literal["ar", "en"] | None = None
    keep_hashtag_text: bool | None = None

    @field_validator("claim")
    @classmethod
    def claim_non_blank(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("claim must be non-empty")
        return value


class EvidenceItem(BaseModel):
    title: str
    url: str
    snippet: str
    rank: int


class VerifyResponse(BaseModel):
    label: Literal["True", "False", "Other"]
    explanation: str
    evidence: list[EvidenceItem]
    snippet_count_used: int
    stage_timings: dict[str, float]


class AblateRequest(BaseModel):
    claim: str
    schedule: list[int] | None = None
    keep_hashtag_text: bool | None = None

    @field_validator("claim")
    @classmethod
    def claim_non_blank(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("claim must be non-empty")
        return value

    @field_validator("schedule")
    @classmethod
    def schedule_ascending(cls, value: list[int] | None) -> list[int] | None:
        if value is not None:
            if not value or any(c < 1 for c in value):
                raise ValueError("schedule must be positive integers")
            if sorted(set(value)) != value:
                raise ValueError("schedule must be strictly ascending")
        return value


class AblateResponse(BaseModel):
    labels_by_count: dict[int, Literal["True", "False", "Other"]]
    explanation: str
    evidence: list[EvidenceItem]
    errors_by_count: dict[int, str] = {}


def _cleaning_for(cfg: AppConfig, keep_hashtag_text: bool | None) -> CleaningConfig:
    if keep_hashtag_text is None:
        return cfg.cleaning_config()
    mode = HashtagMode.STRIP_MARKER if keep_hashtag_text else HashtagMode.DROP_TOKEN
    return CleaningConfig(hashtag_mode=mode)


def create_app(
    cfg: AppConfig | None = None,
    *,
    search: SearchProvider | None = None,
    completion: CompletionProvider | None = None,
) -> FastAPI:
    """Build the service; providers may be injected for tests."""
    cfg = cfg or AppConfig()
    search = search or build_search_provider(cfg)
    completion = completion or build_completion_provider(cfg)

    app = FastAPI(title="claimcheck", version=claimcheck.__version__)

    @app.get("/api/health")
    def health() -> dict:
        return {
            "status": "ok",
            "version": claimcheck.__version__,
            "search_backend": type(search).__name__,
            "completion_backend": type(completion).__name__,
        }

    @app.post("/api/verify", response_model=VerifyResponse)
    def verify_claim(request: VerifyRequest) -> VerifyResponse:
        prompt_cfg = cfg.prompt_config()
        if request.explanation_language:
            prompt_cfg = replace(
                prompt_cfg, explanation_language=request.explanation_language
            )
        k = request.snippet_count or cfg.snippet_count
        try:
            run = run_pipeline(
                request.claim,
                search=search,
                completion=completion,
                k=k,
                prompt_cfg=prompt_cfg,
                cleaning_cfg=_cleaning_for(cfg, request.keep_hashtag_text),
            )
        except FixtureMissError as exc:
            raise HTTPException(status_code=502, detail=f"search: {exc}") from exc
        except RetrievalError as exc:
            raise HTTPException(status_code=502, detail=f"search: {exc}") from exc
        except CompletionError as exc:
            raise HTTPException(status_code=502, detail=f"completion: {exc}") from exc
        return VerifyResponse(
            label=run.verdict.label.value,
            explanation=run.verdict.explanation,
            evidence=[
                EvidenceItem(
                    title=h.title, url=h.url, snippet=h.snippet, rank=h.rank
                )
                for h in run.hits
            ],
            snippet_count_used=run.verdict.snippet_count_used,
            stage_timings=run.stage_timings_ms,
        )

    @app.post("/api/ablate", response_model=AblateResponse)
    def ablate_claim(request: AblateRequest) -> AblateResponse:
        schedule = tuple(request.schedule) if request.schedule else cfg.schedule
        try:
            run = run_ablation(
                request.claim,
                search=search,
                completion=completion,
                schedule=schedule,
                prompt_cfg=cfg.prompt_config(),
                cleaning_cfg=_cleaning_for(cfg, request.keep_hashtag_text),
            )
        except RetrievalError as exc:
            raise HTTPException(status_code=502, detail=f"search: {exc}") from exc
        except CompletionError as exc:
            raise HTTPException(status_code=502, detail=f"completion: {exc}") from exc
        return AblateResponse(
            labels_by_count={
                count: label.value
                for count, label in run.result.labels_by_count.items()
            },
            explanation=run.result.final_explanation,
            evidence=[
                EvidenceItem(
                    title=h.title, url=h.url, snippet=h.snippet, rank=h.rank
                )
                for h in run.hits
            ],
            errors_by_count=run.result.errors_by_count,
        )

    frontend = _frontend_dir(cfg)
    if frontend is not None:
        app.mount("/", StaticFiles(directory=frontend, html=True), name="frontend")

    return app


def _frontend_dir(cfg: AppConfig) -> Path | None:
    if cfg.frontend_dir:
        path = Path(cfg.frontend_dir)
        if not path.is_dir():
            raise FileNotFoundError(f"frontend directory not found: {path}")
        return path
    default = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return default if default.is_dir() else None
