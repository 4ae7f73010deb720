"""Claim verification through a role-based chat completion.

The conversation sent to the completion model is always:

    system    persona + labelling instruction (+ answer-language directive)
    user      the claim text
    assistant one message per evidence snippet, in rank order

The completion's leading True/False/Other token becomes the verdict label;
the rest of the text is the generated explanation. ``run_ablation`` repeats
the classification over a schedule of snippet counts (prefixes of one
retrieval) to measure how evidence quantity moves the label.
"""

from __future__ import annotations

import json
import logging
import re
import time
from dataclasses import dataclass, field
from hashlib import sha256
from pathlib import Path
from typing import Protocol, Sequence

import httpx

from claimcheck.dataset import Label
from claimcheck.preprocess import CleaningConfig, DEFAULT_CLEANING, clean_tweet
from claimcheck.retrieval import SearchHit, SearchProvider, top_k

logger = logging.getLogger(__name__)

DEFAULT_PERSONA = (
    "You are an automatic Fact Checker acting like a journalist clarify and"
)
DEFAULT_INSTRUCTION = (
    "Assess with 'True,' 'False,' or 'Other' each tweet based on the "
    "supportive information"
)
LANGUAGE_DIRECTIVES = {"ar": "Respond in Arabic.", "en": "Respond in English."}
DEFAULT_SCHEDULE = (1, 3, 5, 7, 9)


class CompletionError(Exception):
    """Base class for completion-provider failures."""


class CompletionTransportError(CompletionError):
    def __init__(self, message: str, *, retryable: bool = True, retry_after: float | None = None):
        super().__init__(message)
        self.retryable = retryable
        self.retry_after = retry_after


class CompletionAuthError(CompletionError):
    def __init__(self, message: str, *, retryable: bool = False, retry_after: float | None = None):
        super().__init__(message)
        self.retryable = retryable
        self.retry_after = retry_after


@dataclass(frozen=True)
class Message:
    role: str  # system | user | assistant
    content: str

    def __post_init__(self):
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"unknown message role {self.role!r}")
        if not self.content:
            raise ValueError("message content must be non-empty")


@dataclass(frozen=True)
class PromptConfig:
    """Persona, instruction, and sampling settings for the verdict prompt."""

    persona: str = DEFAULT_PERSONA
    instruction: str = DEFAULT_INSTRUCTION
    explanation_language: str = "ar"
    model_name: str = "text-davinci-003"
    temperature: float = 0.7
    max_output_tokens: int = 256

    def __post_init__(self):
        if not self.persona.strip() or not self.instruction.strip():
            raise ValueError("persona and instruction must be non-empty")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(
                f"temperature must be within [0, 2], got {self.temperature}"
            )
        if self.explanation_language not in LANGUAGE_DIRECTIVES:
            raise ValueError(
                f"explanation_language must be one of "
                f"{sorted(LANGUAGE_DIRECTIVES)}, got {self.explanation_language!r}"
            )
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be positive")


@dataclass(frozen=True)
class CompletionRequest:
    model: str
    temperature: float
    messages: tuple[Message, ...]
    max_output_tokens: int = 256


class CompletionProvider(Protocol):
    def complete(self, request: CompletionRequest) -> str: ...


@dataclass(frozen=True)
class Verdict:
    """Parsed classification and explanation for one claim."""

    label: Label
    explanation: str
    snippet_count_used: int
    raw_completion: str


@dataclass
class AblationResult:
    """Labels per snippet count plus the explanation from the fullest prompt.

    ``labels_by_count`` holds an entry per schedule count that completed;
    counts whose completion failed land in ``errors_by_count`` instead.
    ``used_by_count`` records how many snippets were actually attached
    (fewer than the count when retrieval came up short).
    """

    labels_by_count: dict[int, Label]
    final_explanation: str
    used_by_count: dict[int, int] = field(default_factory=dict)
    errors_by_count: dict[int, str] = field(default_factory=dict)


def build_messages(
    claim_text: str, snippets: Sequence[SearchHit], cfg: PromptConfig
) -> list[Message]:
    """Assemble the role-based conversation for one classification call.

    Output is [system, user, assistant x len(snippets)]; each assistant
    message carries one snippet prefixed by its source title.
    """
    if not claim_text:
        raise ValueError("claim_text must be non-empty")
    system = " ".join(
        part.strip()
        for part in (
            cfg.persona,
            cfg.instruction,
            LANGUAGE_DIRECTIVES[cfg.explanation_language],
        )
    )
    messages = [Message("system", system), Message("user", claim_text)]
    for hit in snippets:
        content = f"{hit.title}: {hit.snippet}" if hit.title else hit.snippet
        messages.append(Message("assistant", content))
    return messages


_LABEL_RE = re.compile(r"\b(true|false|other)\b", re.IGNORECASE)


def parse_verdict(completion_text: str) -> tuple[Label, str]:
    """Split a raw completion into (label, explanation). Total: never fails.

    The label is the first case-insensitive True/False/Other word within
    the first 16 tokens of the first non-blank line; everything else, minus
    the label token and punctuation touching it, is the explanation. With
    no label word present the verdict defaults to Other and the whole text
    becomes the explanation.
    """
    text = completion_text
    match = _LABEL_RE.search(text, 0, _label_window_end(text))
    if match is None:
        return Label.OTHER, text.strip()
    label = Label(match.group(1).capitalize())
    left = re.sub(r"[\s\W]+$", "", text[: match.start()])
    right = re.sub(r"^[\s\W]+", "", text[match.end() :])
    if left and right:
        explanation = f"{left} {right}"
    else:
        explanation = left or right
    return label, explanation.strip()


def _label_window_end(text: str) -> int:
    """End offset of the label search window: first 16 tokens of line one."""
    stripped = text.lstrip()
    lead = len(text) - len(stripped)
    first_line = stripped.split("\n", 1)[0]
    tokens = first_line.split()
    if len(tokens) <= 16:
        return lead + len(first_line)
    # position right after the 16th token
    consumed = 0
    count = 0
    for match in re.finditer(r"\S+", first_line):
        count += 1
        if count == 16:
            consumed = match.end()
            break
    return lead + consumed


class ScriptedCompletionStub:
    """Deterministic completion provider driven by ordered match rules.

    Script shape::

        {"rules": [{"contains": "...", "min_snippets": 3, "reply": "..."}],
         "default": "Other. no information"}

    A rule fires when all of its present conditions hold: ``contains``
    searches the user and assistant message contents; ``min_snippets``
    compares against the number of assistant messages. First match wins;
    the default reply is required. Every request is kept in ``calls`` for
    test inspection.
    """

    def __init__(self, script: dict):
        if "default" not in script:
            raise ValueError("stub script requires a 'default' reply")
        self.default: str = script["default"]
        self.rules: list[dict] = list(script.get("rules", []))
        for rule in self.rules:
            if "reply" not in rule:
                raise ValueError(f"stub rule missing 'reply': {rule!r}")
            if "contains" not in rule and "min_snippets" not in rule:
                raise ValueError(
                    f"stub rule needs 'contains' or 'min_snippets': {rule!r}"
                )
        self.calls: list[CompletionRequest] = []

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedCompletionStub":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")))

    def complete(self, request: CompletionRequest) -> str:
        self.calls.append(request)
        snippet_count = sum(1 for m in request.messages if m.role == "assistant")
        pool = "\n".join(
            m.content for m in request.messages if m.role in ("user", "assistant")
        )
        for rule in self.rules:
            if "contains" in rule and rule["contains"] not in pool:
                continue
            if "min_snippets" in rule and snippet_count < rule["min_snippets"]:
                continue
            return rule["reply"]
        return self.default


class HttpCompletionProvider:
    """Chat-completion client for any endpoint speaking role/content JSON.

    Sends ``{model, temperature, messages, max_tokens}`` and accepts the
    usual response shapes (``choices[0].message.content``,
    ``choices[0].text``, or a top-level ``text``/``content`` field).
    """

    def __init__(
        self,
        endpoint: str,
        *,
        api_key_env: str = "COMPLETION_API_KEY",
        api_key: str | None = None,
        timeout_s: float = 60.0,
        client: httpx.Client | None = None,
    ):
        self.endpoint = endpoint
        self.api_key_env = api_key_env
        self._api_key = api_key
        self._client = client or httpx.Client(timeout=timeout_s)

    def _resolve_key(self) -> str:
        if self._api_key is not None:
            return self._api_key
        import os

        return os.environ.get(self.api_key_env, "")

    def complete(self, request: CompletionRequest) -> str:
        body = {
            "model": request.model,
            "temperature": request.temperature,
            "messages": [
                {"role": m.role, "content": m.content} for m in request.messages
            ],
            "max_tokens": request.max_output_tokens,
        }
        headers = {"Content-Type": "application/json"}
        key = self._resolve_key()
        if key:
            headers["Authorization"] = f"Bearer {key}"
        digest = sha256(
            json.dumps(body, sort_keys=True, ensure_ascii=False).encode()
        ).hexdigest()[:12]
        logger.info("completion request %s (%d messages)", digest, len(request.messages))
        try:
            response = self._client.post(self.endpoint, json=body, headers=headers)
        except httpx.TransportError as exc:
            raise CompletionTransportError(
                f"completion provider unreachable: {exc}"
            ) from exc
        if response.status_code in (401, 403):
            raise CompletionAuthError(
                f"completion auth failure: HTTP {response.status_code}"
            )
        if response.status_code == 429:
            raise CompletionTransportError(
                "completion rate limited: HTTP 429",
                retryable=True,
                retry_after=_retry_after(response),
            )
        if response.status_code >= 400:
            raise CompletionTransportError(
                f"completion provider error: HTTP {response.status_code}",
                retryable=response.status_code >= 500,
            )
        try:
            payload = response.json()
        except ValueError as exc:
            raise CompletionTransportError(
                f"completion response not JSON: {exc}"
            ) from exc
        text = _extract_completion_text(payload)
        if text is None:
            raise CompletionTransportError(
                "completion response carries no generated text"
            )
        return text


def _retry_after(response: httpx.Response) -> float | None:
    value = response.headers.get("Retry-After")
    try:
        return float(value) if value is not None else None
    except ValueError:
        return None


def _extract_completion_text(payload: object) -> str | None:
    if not isinstance(payload, dict):
        return None
    choices = payload.get("choices")
    if isinstance(choices, list) and choices:
        first = choices[0]
        if isinstance(first, dict):
            message = first.get("message")
            if isinstance(message, dict) and isinstance(message.get("content"), str):
                return message["content"]
            if isinstance(first.get("text"), str):
                return first["text"]
    for field_name in ("text", "content", "completion"):
        if isinstance(payload.get(field_name), str):
            return payload[field_name]
    return None


def classify(
    claim_text: str,
    snippets: Sequence[SearchHit],
    completion: CompletionProvider,
    cfg: PromptConfig,
) -> Verdict:
    """One completion round: build messages, complete, parse the verdict."""
    messages = build_messages(claim_text, snippets, cfg)
    raw = completion.complete(
        CompletionRequest(
            model=cfg.model_name,
            temperature=cfg.temperature,
            messages=tuple(messages),
            max_output_tokens=cfg.max_output_tokens,
        )
    )
    label, explanation = parse_verdict(raw)
    return Verdict(
        label=label,
        explanation=explanation,
        snippet_count_used=len(snippets),
        raw_completion=raw,
    )


@dataclass
class PipelineResult:
    """Full trace of one claim through clean -> search -> classify."""

    verdict: Verdict
    query: str
    hits: tuple[SearchHit, ...]
    stage_timings_ms: dict[str, float]


def run_pipeline(
    claim_text: str,
    *,
    search: SearchProvider,
    completion: CompletionProvider,
    k: int = 3,
    prompt_cfg: PromptConfig | None = None,
    cleaning_cfg: CleaningConfig = DEFAULT_CLEANING,
) -> PipelineResult:
    """Verify one claim, keeping the evidence and per-stage timings."""
    cfg = prompt_cfg or PromptConfig()
    timings: dict[str, float] = {}

    start = time.perf_counter()
    query = clean_tweet(claim_text, cleaning_cfg)
    timings["clean_ms"] = (time.perf_counter() - start) * 1000

    start = time.perf_counter()
    results = search.search(query, k)
    hits = top_k(results, k)
    timings["search_ms"] = (time.perf_counter() - start) * 1000

    start = time.perf_counter()
    verdict = classify(claim_text, hits, completion, cfg)
    timings["completion_ms"] = (time.perf_counter() - start) * 1000

    return PipelineResult(
        verdict=verdict,
        query=query,
        hits=tuple(hits),
        stage_timings_ms=timings,
    )


def verify(
    claim_text: str,
    *,
    search: SearchProvider,
    completion: CompletionProvider,
    k: int = 3,
    prompt_cfg: PromptConfig | None = None,
    cleaning_cfg: CleaningConfig = DEFAULT_CLEANING,
) -> Verdict:
    """Classify one claim with up to ``k`` snippets of evidence."""
    return run_pipeline(
        claim_text,
        search=search,
        completion=completion,
        k=k,
        prompt_cfg=prompt_cfg,
        cleaning_cfg=cleaning_cfg,
    ).verdict


@dataclass
class AblationRun:
    """Ablation result plus the evidence shared by all counts."""

    result: AblationResult
    query: str
    hits: tuple[SearchHit, ...]


def run_ablation(
    claim_text: str,
    *,
    search: SearchProvider,
    completion: CompletionProvider,
    schedule: Sequence[int] = DEFAULT_SCHEDULE,
    prompt_cfg: PromptConfig | None = None,
    cleaning_cfg: CleaningConfig = DEFAULT_CLEANING,
) -> AblationRun:
    """Classify one claim at each snippet count of an ascending schedule.

    Retrieval happens once with the largest count; each scheduled count
    uses a prefix of those hits, so evidence grows monotonically. A failed
    completion is recorded for its count without aborting the others.
    """
    schedule = list(schedule)
    if not schedule:
        raise ValueError("ablation schedule must be non-empty")
    if any(c < 1 for c in schedule) or sorted(set(schedule)) != schedule:
        raise ValueError(
            f"ablation schedule must be ascending positive integers, got {schedule}"
        )
    cfg = prompt_cfg or PromptConfig()

    query = clean_tweet(claim_text, cleaning_cfg)
    results = search.search(query, max(schedule))
    hits = top_k(results, max(schedule))

    labels_by_count: dict[int, Label] = {}
    used_by_count: dict[int, int] = {}
    errors_by_count: dict[int, str] = {}
    explanations: dict[int, str] = {}
    for count in schedule:
        attached = hits[: min(count, len(hits))]
        used_by_count[count] = len(attached)
        try:
            verdict = classify(claim_text, attached, completion, cfg)
        except CompletionError as exc:
            errors_by_count[count] = str(exc)
            continue
        labels_by_count[count] = verdict.label
        explanations[count] = verdict.explanation

    if not explanations:
        raise CompletionTransportError(
            "every scheduled completion failed: "
            + "; ".join(f"{c}: {msg}" for c, msg in errors_by_count.items())
        )
    final_explanation = explanations[max(explanations)]
    return AblationRun(
        result=AblationResult(
            labels_by_count=labels_by_count,
            final_explanation=final_explanation,
            used_by_count=used_by_count,
            errors_by_count=errors_by_count,
        ),
        query=query,
        hits=tuple(hits),
    )
