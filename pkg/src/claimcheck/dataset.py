"""Gold claim dataset schema, loaders, and system-output files.

A gold dataset is a list of claim records (id, source account, claim text,
True/False label, short and extended justification, evidence sources),
stored as UTF-8 jsonl (canonical) or csv (interchange). System outputs are
one record per verified claim: predicted label, generated explanation,
snippet count, and the evidence hits used.

Loading is all-or-nothing: any malformed row, duplicate id, or bad label
raises :class:`DatasetError` naming the offending row and field, so a
loaded dataset is always fully valid.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Iterator, Union

from claimcheck.retrieval import SearchHit


class DatasetError(ValueError):
    """Malformed dataset or output file content."""


class Label(str, Enum):
    TRUE = "True"
    FALSE = "False"
    OTHER = "Other"

    @classmethod
    def parse(cls, value: str, *, allow_other: bool) -> "Label":
        """Parse a label string case-insensitively into its canonical form."""
        lowered = value.strip().lower()
        for member in cls:
            if member.value.lower() == lowered:
                if member is cls.OTHER and not allow_other:
                    break
                return member
        allowed = "True/False/Other" if allow_other else "True/False"
        raise DatasetError(f"invalid label {value!r} (expected {allowed})")


GOLD_FIELDS = (
    "id",
    "source_account",
    "claim_text",
    "gold_label",
    "explanation",
    "extended_explanation",
    "evidence_sources",
)

OUTPUT_FIELDS = (
    "id",
    "predicted_label",
    "generated_explanation",
    "snippet_count",
    "evidence_used",
)


def _reject_nul(record_id: str, **fields: str) -> None:
    # NUL cannot survive the csv interchange format, and no real claim
    # content contains it
    for name, value in fields.items():
        if "\x00" in value:
            raise DatasetError(f"record {record_id!r}: field {name} contains NUL")


@dataclass(frozen=True)
class ClaimRecord:
    """One gold-labelled claim with its manual justifications."""

    id: str
    source_account: str
    claim_text: str
    gold_label: Label
    explanation: str
    extended_explanation: str
    evidence_sources: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.id:
            raise DatasetError("record id must be non-empty")
        _reject_nul(
            self.id,
            id=self.id,
            source_account=self.source_account,
            claim_text=self.claim_text,
            explanation=self.explanation,
            extended_explanation=self.extended_explanation,
            **{f"evidence_sources[{i}]": s for i, s in enumerate(self.evidence_sources)},
        )
        if not self.claim_text.strip():
            raise DatasetError(f"record {self.id!r}: claim_text must be non-empty")
        if self.gold_label not in (Label.TRUE, Label.FALSE):
            raise DatasetError(
                f"record {self.id!r}: gold_label must be True or False, "
                f"got {self.gold_label.value!r}"
            )
        if not self.explanation or not self.extended_explanation:
            raise DatasetError(
                f"record {self.id!r}: explanation and extended_explanation "
                "must be non-empty in gold records"
            )


@dataclass(frozen=True)
class Dataset:
    """Ordered, duplicate-free collection of gold claim records."""

    records: tuple[ClaimRecord, ...]
    name: str = ""

    def __post_init__(self):
        seen: set[str] = set()
        for record in self.records:
            if record.id in seen:
                raise DatasetError(f"duplicate record id {record.id!r}")
            seen.add(record.id)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[ClaimRecord]:
        return iter(self.records)

    def by_id(self) -> dict[str, ClaimRecord]:
        return {record.id: record for record in self.records}


@dataclass(frozen=True)
class SystemOutputRecord:
    """The system's verdict and explanation for one gold claim."""

    id: str
    predicted_label: Label
    generated_explanation: str
    snippet_count: int
    evidence_used: tuple[SearchHit, ...] = ()

    def __post_init__(self):
        if not self.id:
            raise DatasetError("output record id must be non-empty")
        _reject_nul(
            self.id, id=self.id, generated_explanation=self.generated_explanation
        )
        if self.snippet_count < 0:
            raise DatasetError(
                f"output {self.id!r}: snippet_count must be >= 0, "
                f"got {self.snippet_count}"
            )


Source = Union[str, Path, IO[bytes], IO[str]]


def _read_text(source: Source) -> str:
    if isinstance(source, (str, Path)):
        # newline="" so \r inside quoted csv fields survives untranslated
        with Path(source).open("r", encoding="utf-8", newline="") as handle:
            return handle.read()
    data = source.read()
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data


def _require(row: dict, key: str, row_no: int) -> object:
    if key not in row:
        raise DatasetError(f"row {row_no}: missing field {key!r}")
    return row[key]


def _string_field(row: dict, key: str, row_no: int) -> str:
    value = _require(row, key, row_no)
    if not isinstance(value, str):
        raise DatasetError(f"row {row_no}: field {key!r} must be a string")
    return value


def _record_from_json(row: dict, row_no: int) -> ClaimRecord:
    sources = _require(row, "evidence_sources", row_no)
    if not isinstance(sources, list) or not all(isinstance(s, str) for s in sources):
        raise DatasetError(f"row {row_no}: evidence_sources must be a list of strings")
    label = Label.parse(_string_field(row, "gold_label", row_no), allow_other=False)
    try:
        return ClaimRecord(
            id=_string_field(row, "id", row_no),
            source_account=_string_field(row, "source_account", row_no),
            claim_text=_string_field(row, "claim_text", row_no),
            gold_label=label,
            explanation=_string_field(row, "explanation", row_no),
            extended_explanation=_string_field(row, "extended_explanation", row_no),
            evidence_sources=tuple(sources),
        )
    except DatasetError as exc:
        raise DatasetError(f"row {row_no}: {exc}") from None


def _iter_jsonl(text: str) -> Iterator[tuple[int, dict]]:
    # split on \n only: json.dumps may emit U+2028/U+2029 raw, and those
    # must stay inside their record line
    for row_no, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"row {row_no}: invalid JSON ({exc.msg})") from None
        if not isinstance(row, dict):
            raise DatasetError(f"row {row_no}: expected a JSON object")
        yield row_no, row


def load_dataset(source: Source, format: str = "jsonl", name: str = "") -> Dataset:
    """Load and validate a gold dataset from jsonl or csv.

    Row order is preserved; any invalid row aborts the load with an error
    naming the row and field.
    """
    text = _read_text(source)
    if format == "jsonl":
        rows = _iter_jsonl(text)
    elif format == "csv":
        rows = _iter_csv_rows(text, GOLD_FIELDS)
    else:
        raise DatasetError(f"unknown dataset format {format!r}")

    records = []
    for row_no, row in rows:
        if format == "csv":
            row = dict(row)
            row["evidence_sources"] = _decode_csv_sources(row, row_no)
        records.append(_record_from_json(row, row_no))
    return Dataset(records=tuple(records), name=name)


def _decode_csv_sources(row: dict, row_no: int) -> list:
    raw = _string_field(row, "evidence_sources", row_no)
    if not raw:
        return []
    try:
        decoded = json.loads(raw)
    except json.JSONDecodeError:
        raise DatasetError(
            f"row {row_no}: evidence_sources must be a JSON array"
        ) from None
    if not isinstance(decoded, list):
        raise DatasetError(f"row {row_no}: evidence_sources must be a JSON array")
    return decoded


def _iter_csv_rows(text: str, fields: tuple[str, ...]) -> Iterator[tuple[int, dict]]:
    reader = csv.DictReader(io.StringIO(text, newline=""))
    if reader.fieldnames is None:
        return
    missing = set(fields) - set(reader.fieldnames)
    if missing:
        raise DatasetError(f"csv header missing fields: {', '.join(sorted(missing))}")
    for row_no, row in enumerate(reader, start=1):
        if None in row or any(value is None for value in row.values()):
            raise DatasetError(f"row {row_no}: wrong number of csv columns")
        yield row_no, row


def save_dataset(dataset: Dataset, format: str = "jsonl") -> bytes:
    """Serialize a dataset so that loading it back reproduces every field."""
    if format == "jsonl":
        lines = []
        for record in dataset:
            lines.append(
                json.dumps(
                    {
                        "id": record.id,
                        "source_account": record.source_account,
                        "claim_text": record.claim_text,
                        "gold_label": record.gold_label.value,
                        "explanation": record.explanation,
                        "extended_explanation": record.extended_explanation,
                        "evidence_sources": list(record.evidence_sources),
                    },
                    ensure_ascii=False,
                )
            )
        return ("\n".join(lines) + "\n" if lines else "").encode("utf-8")
    if format == "csv":
        buffer = io.StringIO(newline="")
        # default \r\n row endings make QUOTE_MINIMAL quote any field
        # containing \r or \n, which bare-\n terminators would not
        writer = csv.DictWriter(buffer, fieldnames=GOLD_FIELDS)
        writer.writeheader()
        for record in dataset:
            writer.writerow(
                {
                    "id": record.id,
                    "source_account": record.source_account,
                    "claim_text": record.claim_text,
                    "gold_label": record.gold_label.value,
                    "explanation": record.explanation,
                    "extended_explanation": record.extended_explanation,
                    "evidence_sources": json.dumps(
                        list(record.evidence_sources), ensure_ascii=False
                    ),
                }
            )
        return buffer.getvalue().encode("utf-8")
    raise DatasetError(f"unknown dataset format {format!r}")


def load_outputs(source: Source) -> list[SystemOutputRecord]:
    """Load system output records from a jsonl stream or path."""
    outputs = []
    for row_no, row in _iter_jsonl(_read_text(source)):
        label = Label.parse(
            _string_field(row, "predicted_label", row_no), allow_other=True
        )
        count = _require(row, "snippet_count", row_no)
        if not isinstance(count, int) or isinstance(count, bool):
            raise DatasetError(f"row {row_no}: snippet_count must be an integer")
        evidence_raw = _require(row, "evidence_used", row_no)
        if not isinstance(evidence_raw, list):
            raise DatasetError(f"row {row_no}: evidence_used must be a list")
        evidence = []
        for position, hit in enumerate(evidence_raw, start=1):
            if not isinstance(hit, dict):
                raise DatasetError(f"row {row_no}: evidence entries must be objects")
            try:
                evidence.append(
                    SearchHit(
                        title=str(hit.get("title", "")),
                        url=str(hit.get("url", "")),
                        snippet=str(hit["snippet"]),
                        rank=position,
                    )
                )
            except (KeyError, ValueError) as exc:
                raise DatasetError(f"row {row_no}: bad evidence entry: {exc}") from None
        try:
            outputs.append(
                SystemOutputRecord(
                    id=_string_field(row, "id", row_no),
                    predicted_label=label,
                    generated_explanation=_string_field(
                        row, "generated_explanation", row_no
                    ),
                    snippet_count=count,
                    evidence_used=tuple(evidence),
                )
            )
        except DatasetError as exc:
            raise DatasetError(f"row {row_no}: {exc}") from None
    return outputs


def save_outputs(outputs: Iterable[SystemOutputRecord]) -> bytes:
    """Serialize system output records as jsonl."""
    lines = []
    for record in outputs:
        lines.append(
            json.dumps(
                {
                    "id": record.id,
                    "predicted_label": record.predicted_label.value,
                    "generated_explanation": record.generated_explanation,
                    "snippet_count": record.snippet_count,
                    "evidence_used": [
                        {"title": hit.title, "url": hit.url, "snippet": hit.snippet}
                        for hit in record.evidence_used
                    ],
                },
                ensure_ascii=False,
            )
        )
    return ("\n".join(lines) + "\n" if lines else "").encode("utf-8")


def join_for_eval(
    gold: Dataset, outputs: Iterable[SystemOutputRecord]
) -> list[tuple[ClaimRecord, SystemOutputRecord]]:
    """Pair each output with its gold record, ordered by gold position.

    Partial coverage is allowed (outputs for a subset of gold); an output
    id absent from gold is an error.
    """
    outputs = list(outputs)
    gold_index = gold.by_id()
    for output in outputs:
        if output.id not in gold_index:
            raise DatasetError(f"output id {output.id!r} not present in gold dataset")
    by_gold_order = {record.id: i for i, record in enumerate(gold)}
    ordered = sorted(outputs, key=lambda output: by_gold_order[output.id])
    return [(gold_index[output.id], output) for output in ordered]
