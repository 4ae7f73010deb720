"""Metrics for verdicts and generated explanations.

Covers the whole harness: whitespace/punctuation tokenization, LCS-based
ROUGE-L (precision/recall/F1), sparse-vector cosine similarity with
token-count or character-3-gram representations, per-instance explanation
scoring against both the short and the extended gold justification, 3-class
confusion matrices, per-class classification reports, and the
snippet-count ablation table.

The LCS and n-gram inner loops run on :mod:`claimcheck.kernels` (compiled
when available). Report values are kept at full precision; rounding to two
decimals happens only at presentation time via :func:`round_half_up`.
"""

from __future__ import annotations

import math
import re
from array import array
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Mapping, Sequence

from claimcheck import kernels
from claimcheck.dataset import Dataset, Label, SystemOutputRecord, join_for_eval
from claimcheck.preprocess import normalize_arabic

CLASS_ORDER = (Label.FALSE, Label.TRUE, Label.OTHER)
SCHEMES = ("tf_tokens", "tf_char3grams")

# \w alone would detach Arabic combining marks (tashkeel) from their word,
# so word tokens explicitly admit the Arabic mark ranges
_ARABIC_MARKS = "ؐ-ًؚ-ٰٟۖ-ۭ"
_TOKEN_RE = re.compile(rf"[\w{_ARABIC_MARKS}]+|[^\w\s]")


def tokenize(text: str, normalize: bool = True) -> list[str]:
    """Split into word tokens with punctuation detached as its own tokens."""
    if normalize:
        text = normalize_arabic(text)
    return _TOKEN_RE.findall(text)


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Length of the longest common subsequence of two token sequences."""
    ids: dict[str, int] = {}
    a_ids = array("I", (ids.setdefault(token, len(ids)) for token in a))
    b_ids = array("I", (ids.setdefault(token, len(ids)) for token in b))
    return kernels.lcs_length(a_ids, b_ids)


def _harmonic_f1(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_pr(cls, precision: float, recall: float) -> "RougeScore":
        return cls(
            precision=precision,
            recall=recall,
            f1=_harmonic_f1(precision, recall),
        )


def rouge_l_f1(candidate: Sequence[str], reference: Sequence[str]) -> RougeScore:
    """ROUGE-L over whole token sequences with plain harmonic F1.

    Precision divides the LCS by the candidate length, recall by the
    reference length; an empty side contributes 0.
    """
    lcs = lcs_length(candidate, reference)
    precision = lcs / len(candidate) if candidate else 0.0
    recall = lcs / len(reference) if reference else 0.0
    return RougeScore.from_pr(precision, recall)


def vectorize(text: str, scheme: str = "tf_char3grams", normalize: bool = True) -> dict[str, float]:
    """Term-frequency sparse vector under the chosen representation.

    ``tf_tokens`` counts tokenizer output; ``tf_char3grams`` counts
    overlapping character 3-grams of the whitespace-collapsed text (spaces
    included in grams, so cross-word shapes count too).
    """
    if scheme == "tf_tokens":
        counts: dict[str, int] = {}
        for token in tokenize(text, normalize=normalize):
            counts[token] = counts.get(token, 0) + 1
    elif scheme == "tf_char3grams":
        if normalize:
            text = normalize_arabic(text)
        collapsed = " ".join(text.split())
        counts = kernels.char_ngram_counts(collapsed, 3)
    else:
        raise ValueError(f"unknown vectorizer scheme {scheme!r} (use one of {SCHEMES})")
    return {term: float(count) for term, count in counts.items()}


def cosine(a: Mapping[str, float], b: Mapping[str, float]) -> float:
    """Cosine similarity of two sparse vectors; 0 when either norm is 0."""
    norm_a = math.sqrt(sum(w * w for w in a.values()))
    norm_b = math.sqrt(sum(w * w for w in b.values()))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    if a == b:
        return 1.0
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    dot = sum(weight * large[term] for term, weight in small.items() if term in large)
    return min(dot / (norm_a * norm_b), 1.0)


def mean_cosine(
    pairs: Sequence[tuple[str, str]],
    scheme: str = "tf_char3grams",
    normalize: bool = True,
) -> float:
    """Arithmetic mean of per-pair cosine similarities over text pairs."""
    if not pairs:
        raise ValueError("mean_cosine requires at least one text pair")
    total = 0.0
    for candidate, reference in pairs:
        total += cosine(
            vectorize(candidate, scheme, normalize),
            vectorize(reference, scheme, normalize),
        )
    return total / len(pairs)


@dataclass(frozen=True)
class ConfusionMatrix3:
    """3x3 counts; rows are gold classes, columns predictions.

    Class order is [False, True, Other] on both axes.
    """

    counts: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        if len(self.counts) != 3 or any(len(row) != 3 for row in self.counts):
            raise ValueError("confusion matrix must be 3x3")
        if any(cell < 0 for row in self.counts for cell in row):
            raise ValueError("confusion matrix counts must be non-negative")

    @property
    def total(self) -> int:
        return sum(cell for row in self.counts for cell in row)

    @property
    def trace(self) -> int:
        return sum(self.counts[i][i] for i in range(3))

    def row_sum(self, index: int) -> int:
        return sum(self.counts[index])

    def col_sum(self, index: int) -> int:
        return sum(row[index] for row in self.counts)


def confusion_matrix(
    gold: Sequence[Label], pred: Sequence[Label]
) -> ConfusionMatrix3:
    """Count gold-vs-predicted label pairs.

    Gold labels must be True/False (the gold set has no Other instances);
    predictions may use all three classes.
    """
    if len(gold) != len(pred):
        raise ValueError(
            f"gold and prediction lists differ in length: {len(gold)} vs {len(pred)}"
        )
    index = {label: i for i, label in enumerate(CLASS_ORDER)}
    cells = [[0, 0, 0], [0, 0, 0], [0, 0, 0]]
    for g, p in zip(gold, pred):
        if g is Label.OTHER:
            raise ValueError("gold labels must be True or False")
        cells[index[g]][index[p]] += 1
    return ConfusionMatrix3(counts=tuple(tuple(row) for row in cells))


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class ClassReport:
    """Per-class precision/recall/F1 plus accuracy and weighted F1.

    ``per_class`` always carries False and True; Other appears only when
    it has gold support. ``weighted_f1`` averages F1 over the classes with
    non-zero gold support, weighted by support.
    """

    per_class: dict[Label, ClassMetrics]
    accuracy: float
    weighted_f1: float


def classification_report(matrix: ConfusionMatrix3) -> ClassReport:
    """Derive the report from a confusion matrix; empty matrices are errors."""
    total = matrix.total
    if total == 0:
        raise ValueError("cannot report on an empty confusion matrix")
    per_class: dict[Label, ClassMetrics] = {}
    weighted_sum = 0.0
    support_sum = 0
    for i, label in enumerate(CLASS_ORDER):
        support = matrix.row_sum(i)
        if label is Label.OTHER and support == 0:
            continue
        diag = matrix.counts[i][i]
        col = matrix.col_sum(i)
        precision = diag / col if col else 0.0
        recall = diag / support if support else 0.0
        metrics = ClassMetrics(
            precision=precision,
            recall=recall,
            f1=_harmonic_f1(precision, recall),
            support=support,
        )
        per_class[label] = metrics
        if support > 0:
            weighted_sum += support * metrics.f1
            support_sum += support
    return ClassReport(
        per_class=per_class,
        accuracy=matrix.trace / total,
        weighted_f1=weighted_sum / support_sum if support_sum else 0.0,
    )


@dataclass(frozen=True)
class ExplanationEvalRow:
    """Per-claim explanation scores against both gold justifications."""

    id: str
    rouge_vs_ex: RougeScore
    rouge_vs_xex: RougeScore
    cos_vs_ex: float
    cos_vs_xex: float


@dataclass(frozen=True)
class ExplanationEvalReport:
    rows: tuple[ExplanationEvalRow, ...]
    avg_rouge_vs_ex: float
    avg_rouge_vs_xex: float
    avg_cos_vs_ex: float
    avg_cos_vs_xex: float


def evaluate_explanations(
    gold: Dataset,
    outputs: Iterable[SystemOutputRecord],
    scheme: str = "tf_char3grams",
    normalize: bool = True,
) -> ExplanationEvalReport:
    """Score each generated explanation against the short and extended gold.

    The mean cosine against the extended explanation is the headline
    semantic-similarity average; ROUGE-L-F1 covers the syntactic side.
    """
    pairs = join_for_eval(gold, outputs)
    if not pairs:
        raise ValueError("no output records to evaluate")
    rows = []
    for record, output in pairs:
        generated_tokens = tokenize(output.generated_explanation, normalize)
        generated_vec = vectorize(output.generated_explanation, scheme, normalize)
        rows.append(
            ExplanationEvalRow(
                id=record.id,
                rouge_vs_ex=rouge_l_f1(
                    generated_tokens, tokenize(record.explanation, normalize)
                ),
                rouge_vs_xex=rouge_l_f1(
                    generated_tokens, tokenize(record.extended_explanation, normalize)
                ),
                cos_vs_ex=cosine(
                    generated_vec, vectorize(record.explanation, scheme, normalize)
                ),
                cos_vs_xex=cosine(
                    generated_vec,
                    vectorize(record.extended_explanation, scheme, normalize),
                ),
            )
        )
    n = len(rows)
    return ExplanationEvalReport(
        rows=tuple(rows),
        avg_rouge_vs_ex=sum(r.rouge_vs_ex.f1 for r in rows) / n,
        avg_rouge_vs_xex=sum(r.rouge_vs_xex.f1 for r in rows) / n,
        avg_cos_vs_ex=sum(r.cos_vs_ex for r in rows) / n,
        avg_cos_vs_xex=sum(r.cos_vs_xex for r in rows) / n,
    )


def ablation_report(
    per_model: Mapping[int, tuple[Sequence[Label], Sequence[Label]]],
) -> dict[int, ClassReport]:
    """One classification report per snippet count.

    Every model must have been scored against the same gold label list.
    """
    if not per_model:
        raise ValueError("ablation report requires at least one model")
    counts = sorted(per_model)
    reference_gold = list(per_model[counts[0]][0])
    reports: dict[int, ClassReport] = {}
    for count in counts:
        gold, pred = per_model[count]
        if list(gold) != reference_gold:
            raise ValueError(
                f"model for snippet count {count} was scored against a "
                "different gold list"
            )
        reports[count] = classification_report(confusion_matrix(gold, pred))
    return reports


def round_half_up(value: float, places: int = 2) -> float:
    """Decimal half-up rounding for presentation (0.005 -> 0.01)."""
    quantum = Decimal(1).scaleb(-places)
    return float(Decimal(str(value)).quantize(quantum, rounding=ROUND_HALF_UP))
