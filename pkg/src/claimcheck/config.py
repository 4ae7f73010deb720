"""Application configuration and provider wiring.

Settings merge in precedence order: CLI flags > environment variables >
config file (JSON) > built-in defaults. API keys are never stored in the
config; only the names of the environment variables holding them are.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Mapping

from claimcheck.preprocess import CleaningConfig, HashtagMode
from claimcheck.retrieval import (
    CachedSearchProvider,
    FixtureSearchProvider,
    FixtureStore,
    HttpSearchProvider,
    LiveSearchConfig,
    SearchProvider,
)
from claimcheck.verification import (
    CompletionProvider,
    HttpCompletionProvider,
    PromptConfig,
    ScriptedCompletionStub,
)


class ConfigError(ValueError):
    """Invalid or inconsistent application configuration."""


@dataclass(frozen=True)
class AppConfig:
    # search provider
    search_endpoint: str | None = None
    search_api_key_env: str = "SEARCH_API_KEY"
    search_timeout_s: float = 10.0
    search_min_interval_s: float = 1.0
    fixtures_path: str | None = None
    offline: bool = False
    # completion provider
    completion_endpoint: str | None = None
    completion_api_key_env: str = "COMPLETION_API_KEY"
    completion_timeout_s: float = 60.0
    stub_script_path: str | None = None
    model_name: str = "text-davinci-003"
    temperature: float = 0.7
    max_output_tokens: int = 256
    explanation_language: str = "ar"
    # pipeline defaults
    snippet_count: int = 3
    schedule: tuple[int, ...] = (1, 3, 5, 7, 9)
    keep_hashtag_text: bool = True
    batch_concurrency: int = 1
    # metrics
    metric_scheme: str = "tf_char3grams"
    metric_normalize: bool = True
    # caching
    cache_dir: str | None = None
    cache_ttl_s: float = 3600.0
    # service
    host: str = "127.0.0.1"
    port: int = 8000
    frontend_dir: str | None = None

    def __post_init__(self):
        if self.snippet_count < 1:
            raise ConfigError(f"snippet_count must be >= 1, got {self.snippet_count}")
        schedule = list(self.schedule)
        if not schedule or any(c < 1 for c in schedule):
            raise ConfigError(f"schedule must be positive integers, got {schedule}")
        if sorted(set(schedule)) != schedule:
            raise ConfigError(f"schedule must be strictly ascending, got {schedule}")
        if self.batch_concurrency < 1:
            raise ConfigError("batch_concurrency must be >= 1")

    def cleaning_config(self) -> CleaningConfig:
        mode = (
            HashtagMode.STRIP_MARKER
            if self.keep_hashtag_text
            else HashtagMode.DROP_TOKEN
        )
        return CleaningConfig(hashtag_mode=mode)

    def prompt_config(self) -> PromptConfig:
        return PromptConfig(
            explanation_language=self.explanation_language,
            model_name=self.model_name,
            temperature=self.temperature,
            max_output_tokens=self.max_output_tokens,
        )


_ENV_KEYS = {
    "CLAIMCHECK_SEARCH_ENDPOINT": "search_endpoint",
    "CLAIMCHECK_COMPLETION_ENDPOINT": "completion_endpoint",
    "CLAIMCHECK_FIXTURES": "fixtures_path",
    "CLAIMCHECK_STUB_SCRIPT": "stub_script_path",
    "CLAIMCHECK_MODEL": "model_name",
    "CLAIMCHECK_CACHE_DIR": "cache_dir",
    "CLAIMCHECK_FRONTEND_DIR": "frontend_dir",
}


def load_config(
    path: str | Path | None = None,
    *,
    env: Mapping[str, str] | None = None,
    overrides: Mapping[str, object] | None = None,
) -> AppConfig:
    """Build an AppConfig from file, environment, and explicit overrides."""
    env = os.environ if env is None else env
    values: dict[str, object] = {}

    if path is not None:
        file_path = Path(path)
        try:
            raw = json.loads(file_path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {file_path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {file_path} is not valid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"config file {file_path} must hold a JSON object")
        known = {f.name for f in fields(AppConfig)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(
                f"unknown config keys in {file_path}: {', '.join(sorted(unknown))}"
            )
        values.update(raw)

    for env_key, field_name in _ENV_KEYS.items():
        if env_key in env:
            values[field_name] = env[env_key]

    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})

    if "schedule" in values and not isinstance(values["schedule"], tuple):
        values["schedule"] = tuple(values["schedule"])  # type: ignore[arg-type]

    try:
        return AppConfig(**values)  # type: ignore[arg-type]
    except TypeError as exc:
        raise ConfigError(f"bad configuration: {exc}") from None


def build_search_provider(cfg: AppConfig) -> SearchProvider:
    if cfg.offline or cfg.fixtures_path:
        if not cfg.fixtures_path:
            raise ConfigError("offline mode requires fixtures_path")
        store = FixtureStore(cfg.fixtures_path)
        return FixtureSearchProvider(store)
    if not cfg.search_endpoint:
        raise ConfigError(
            "no search backend configured: set search_endpoint or use "
            "offline mode with fixtures_path"
        )
    provider: SearchProvider = HttpSearchProvider(
        LiveSearchConfig(
            endpoint_template=cfg.search_endpoint,
            api_key_env=cfg.search_api_key_env,
            timeout_s=cfg.search_timeout_s,
            min_interval_s=cfg.search_min_interval_s,
        )
    )
    if cfg.cache_ttl_s > 0:
        provider = CachedSearchProvider(
            provider, ttl_s=cfg.cache_ttl_s, cache_dir=cfg.cache_dir
        )
    return provider


def build_completion_provider(cfg: AppConfig) -> CompletionProvider:
    if cfg.offline or cfg.stub_script_path:
        if not cfg.stub_script_path:
            raise ConfigError("offline mode requires stub_script_path")
        return ScriptedCompletionStub.from_file(cfg.stub_script_path)
    if not cfg.completion_endpoint:
        raise ConfigError(
            "no completion backend configured: set completion_endpoint or "
            "use offline mode with stub_script_path"
        )
    return HttpCompletionProvider(
        cfg.completion_endpoint,
        api_key_env=cfg.completion_api_key_env,
        timeout_s=cfg.completion_timeout_s,
    )
