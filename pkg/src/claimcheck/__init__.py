"""Explainable fact-checking for short social-media claims.

Pipeline: clean the claim into a search query, retrieve evidence snippets,
prompt a chat-completion model with a role-based conversation, and parse
the True/False/Other verdict plus its textual justification. Ships with an
evaluation harness (ROUGE-L, cosine similarity, classification reports,
snippet-count ablation), an HTTP service, and a CLI.
"""

__version__ = "0.1.0"

from claimcheck.dataset import (  # noqa: E402
    ClaimRecord,
    Dataset,
    Label,
    SystemOutputRecord,
    load_dataset,
    load_outputs,
    save_dataset,
    save_outputs,
)
from claimcheck.preprocess import CleaningConfig, clean_tweet, normalize_arabic  # noqa: E402
from claimcheck.retrieval import (  # noqa: E402
    FixtureSearchProvider,
    FixtureStore,
    HttpSearchProvider,
    SearchHit,
    SearchResultSet,
    top_k,
)
from claimcheck.verification import (  # noqa: E402
    AblationResult,
    PromptConfig,
    ScriptedCompletionStub,
    Verdict,
    build_messages,
    parse_verdict,
    run_ablation,
    run_pipeline,
    verify,
)

__all__ = [
    "__version__",
    "AblationResult",
    "ClaimRecord",
    "CleaningConfig",
    "Dataset",
    "FixtureSearchProvider",
    "FixtureStore",
    "HttpSearchProvider",
    "Label",
    "PromptConfig",
    "ScriptedCompletionStub",
    "SearchHit",
    "SearchResultSet",
    "SystemOutputRecord",
    "Verdict",
    "build_messages",
    "clean_tweet",
    "load_dataset",
    "load_outputs",
    "normalize_arabic",
    "parse_verdict",
    "run_ablation",
    "run_pipeline",
    "save_dataset",
    "save_outputs",
    "top_k",
    "verify",
]
