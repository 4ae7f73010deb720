"""Tweet-to-query cleaning and Arabic text normalization.

Raw claims come as tweets carrying URLs, @-mentions, and hashtags that
break web search; ``clean_tweet`` strips that noise to produce the search
query. ``normalize_arabic`` reduces orthographic variation (diacritics,
tatweel, alef/ya/ta-marbuta variants) and is applied inside the evaluation
metrics, never to the query sent to a search engine.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

_URL_PREFIXES = ("http://", "https://", "www.")

# Harakat and Quranic marks (U+064B..U+065F), superscript alef (U+0670).
_DIACRITICS_RE = re.compile("[ً-ٰٟ]")
_TATWEEL = "ـ"
# Alef with madda/hamza above/below and alef wasla, folded to bare alef.
_ALEF_VARIANTS_RE = re.compile("[آأإٱ]")
_TA_MARBUTA = "ة"
_HA = "ه"
# Word-final ya and alef maqsura are collapsed to one form (alef maqsura).
_FINAL_YA_RE = re.compile("ي\\b")
_ALEF_MAQSURA = "ى"


class HashtagMode(str, Enum):
    """What to do with ``#tag`` tokens: keep the text or drop the token."""

    STRIP_MARKER = "strip_marker"
    DROP_TOKEN = "drop_token"


@dataclass(frozen=True)
class CleaningConfig:
    strip_urls: bool = True
    strip_mentions: bool = True
    hashtag_mode: HashtagMode = HashtagMode.STRIP_MARKER


DEFAULT_CLEANING = CleaningConfig()


def _is_url_token(token: str) -> bool:
    return token.lower().startswith(_URL_PREFIXES)


def _clean_token(token: str, cfg: CleaningConfig) -> str | None:
    # Re-check after every rewrite so stripping a marker can never expose
    # a token that a fresh cleaning pass would remove (idempotence).
    while token:
        if cfg.strip_urls and _is_url_token(token):
            return None
        if cfg.strip_mentions and token.startswith("@"):
            return None
        if token.startswith("#"):
            if cfg.hashtag_mode is HashtagMode.DROP_TOKEN:
                return None
            token = token.lstrip("#")
            continue
        return token
    return None


def clean_tweet(text: str, cfg: CleaningConfig = DEFAULT_CLEANING) -> str:
    """Turn a raw tweet into a search query.

    Removes URL and @-mention tokens whole, handles hashtags per config,
    and collapses whitespace. Idempotent; never lengthens the text; an
    empty result is legal.
    """
    kept = []
    for token in text.split():
        cleaned = _clean_token(token, cfg)
        if cleaned is not None:
            kept.append(cleaned)
    return " ".join(kept)


def normalize_arabic(text: str) -> str:
    """Fold common Arabic orthographic variants for metric comparison.

    Drops diacritics and tatweel, folds alef variants to bare alef,
    ta-marbuta to ha, and word-final ya to alef maqsura. Idempotent and
    never lengthens the text. Non-Arabic text passes through unchanged.
    """
    text = _DIACRITICS_RE.sub("", text)
    text = text.replace(_TATWEEL, "")
    text = _ALEF_VARIANTS_RE.sub("ا", text)
    text = text.replace(_TA_MARBUTA, _HA)
    text = _FINAL_YA_RE.sub(_ALEF_MAQSURA, text)
    return text
