import io
import json

import pytest
from hypothesis import given, strategies as st

from claimcheck.dataset import (
    ClaimRecord,
    Dataset,
    DatasetError,
    Label,
    SystemOutputRecord,
    join_for_eval,
    load_dataset,
    load_outputs,
    save_dataset,
    save_outputs,
)
from claimcheck.retrieval import SearchHit

from conftest import TABLE_CLAIM, TABLE_EXPLANATION, make_record


def gold_row(i="c1", label="False", **extra):
    row = {
        "id": i,
        "source_account": "acct",
        "claim_text": "some claim",
        "gold_label": label,
        "explanation": "short why",
        "extended_explanation": "longer why",
        "evidence_sources": ["siteA"],
    }
    row.update(extra)
    return row


def jsonl_bytes(*rows):
    return ("\n".join(json.dumps(r, ensure_ascii=False) for r in rows) + "\n").encode()


class TestLoadDataset:
    def test_single_valid_row(self):
        dataset = load_dataset(io.BytesIO(jsonl_bytes(gold_row())))
        assert len(dataset) == 1
        assert dataset.records[0].gold_label is Label.FALSE

    def test_empty_stream_gives_empty_dataset(self):
        assert len(load_dataset(io.BytesIO(b""))) == 0

    def test_duplicate_id_names_the_id(self):
        stream = io.BytesIO(jsonl_bytes(gold_row("c1"), gold_row("c1")))
        with pytest.raises(DatasetError, match="c1"):
            load_dataset(stream)

    def test_invalid_label_names_the_value(self):
        stream = io.BytesIO(jsonl_bytes(gold_row(label="Maybe")))
        with pytest.raises(DatasetError, match="Maybe"):
            load_dataset(stream)

    def test_other_label_rejected_in_gold(self):
        stream = io.BytesIO(jsonl_bytes(gold_row(label="Other")))
        with pytest.raises(DatasetError, match="Other"):
            load_dataset(stream)

    def test_labels_case_insensitive(self):
        dataset = load_dataset(io.BytesIO(jsonl_bytes(gold_row(label="tRuE"))))
        assert dataset.records[0].gold_label is Label.TRUE

    def test_missing_field_names_row_and_field(self):
        row = gold_row()
        del row["explanation"]
        with pytest.raises(DatasetError, match="row 1.*explanation"):
            load_dataset(io.BytesIO(jsonl_bytes(row)))

    def test_error_cites_right_row_number(self):
        rows = [gold_row("c1"), gold_row("c2", claim_text="   ")]
        with pytest.raises(DatasetError, match="row 2"):
            load_dataset(io.BytesIO(jsonl_bytes(*rows)))

    def test_bad_json_line(self):
        with pytest.raises(DatasetError, match="row 1"):
            load_dataset(io.BytesIO(b"{not json}\n"))

    def test_empty_explanation_rejected_in_gold(self):
        with pytest.raises(DatasetError, match="explanation"):
            load_dataset(io.BytesIO(jsonl_bytes(gold_row(explanation=""))))

    def test_path_input(self, tmp_path):
        path = tmp_path / "gold.jsonl"
        path.write_bytes(jsonl_bytes(gold_row()))
        assert len(load_dataset(path)) == 1

    def test_unknown_format(self):
        with pytest.raises(DatasetError, match="format"):
            load_dataset(io.BytesIO(b""), format="xml")


class TestRoundTrip:
    def test_empty_both_formats(self):
        empty = Dataset(records=(), name="empty")
        for fmt in ("jsonl", "csv"):
            again = load_dataset(io.BytesIO(save_dataset(empty, fmt)), fmt)
            assert again.records == ()

    @pytest.mark.parametrize("fmt", ["jsonl", "csv"])
    def test_arabic_record_round_trips_field_for_field(self, fmt):
        record = ClaimRecord(
            id="c1",
            source_account="هيئة مكافحة الإشاعات",
            claim_text=TABLE_CLAIM,
            gold_label=Label.FALSE,
            explanation=TABLE_EXPLANATION,
            extended_explanation="شرح موسع عن الادعاء.",
            evidence_sources=("نيوم نيوز",),
        )
        dataset = Dataset(records=(record,), name="t")
        again = load_dataset(io.BytesIO(save_dataset(dataset, fmt)), fmt, name="t")
        assert again.records == dataset.records

    @pytest.mark.parametrize("fmt", ["jsonl", "csv"])
    def test_embedded_newline_round_trips(self, fmt):
        record = ClaimRecord(
            id="c1",
            source_account="acct",
            claim_text="line one claim",
            gold_label=Label.TRUE,
            explanation="first line\nsecond line",
            extended_explanation="a\nb\nc",
            evidence_sources=("s1", "s2"),
        )
        dataset = Dataset(records=(record,))
        again = load_dataset(io.BytesIO(save_dataset(dataset, fmt)), fmt)
        assert again.records == dataset.records

    def test_order_preserved(self):
        dataset = Dataset(records=tuple(make_record(i) for i in range(1, 8)))
        again = load_dataset(io.BytesIO(save_dataset(dataset, "jsonl")))
        assert [r.id for r in again] == [f"c{i}" for i in range(1, 8)]


# NUL is rejected by record validation (csv cannot carry it), so valid
# record content is any other non-surrogate text
_chars = st.characters(blacklist_categories=("Cs",), blacklist_characters="\x00")
_text = st.text(alphabet=_chars, min_size=1, max_size=40).filter(lambda s: s.strip())
_any_text = st.text(alphabet=_chars, max_size=20)

_records = st.builds(
    ClaimRecord,
    id=st.uuids().map(str),
    source_account=_any_text,
    claim_text=_text,
    gold_label=st.sampled_from([Label.TRUE, Label.FALSE]),
    explanation=_text,
    extended_explanation=_text,
    evidence_sources=st.lists(_any_text, max_size=3).map(tuple),
)


@given(st.lists(_records, max_size=6, unique_by=lambda r: r.id), st.sampled_from(["jsonl", "csv"]))
def test_round_trip_property(records, fmt):
    dataset = Dataset(records=tuple(records), name="prop")
    again = load_dataset(io.BytesIO(save_dataset(dataset, fmt)), fmt, name="prop")
    assert again.records == dataset.records


class TestOutputs:
    def test_round_trip(self):
        outputs = [
            SystemOutputRecord(
                id="c1",
                predicted_label=Label.OTHER,
                generated_explanation="لا توجد معلومات",
                snippet_count=3,
                evidence_used=(
                    SearchHit(title="t", url="u", snippet="s", rank=1),
                ),
            )
        ]
        again = load_outputs(io.BytesIO(save_outputs(outputs)))
        assert again == outputs

    def test_evidence_ranks_assigned_by_position(self):
        line = {
            "id": "c1",
            "predicted_label": "True",
            "generated_explanation": "ok",
            "snippet_count": 2,
            "evidence_used": [
                {"title": "a", "url": "ua", "snippet": "sa"},
                {"title": "b", "url": "ub", "snippet": "sb"},
            ],
        }
        outputs = load_outputs(io.BytesIO(jsonl_bytes(line)))
        assert [h.rank for h in outputs[0].evidence_used] == [1, 2]

    def test_bad_snippet_count(self):
        line = {
            "id": "c1",
            "predicted_label": "True",
            "generated_explanation": "ok",
            "snippet_count": "three",
            "evidence_used": [],
        }
        with pytest.raises(DatasetError, match="snippet_count"):
            load_outputs(io.BytesIO(jsonl_bytes(line)))


class TestJoinForEval:
    def test_exact_match(self, small_gold):
        outputs = [
            SystemOutputRecord(
                id="c1", predicted_label=Label.FALSE,
                generated_explanation="x", snippet_count=1,
            )
        ]
        pairs = join_for_eval(small_gold, outputs)
        assert len(pairs) == 1
        assert pairs[0][0].id == pairs[0][1].id == "c1"

    def test_partial_coverage_keeps_gold_order(self, small_gold):
        outputs = [
            SystemOutputRecord(id="c3", predicted_label=Label.TRUE,
                               generated_explanation="x", snippet_count=1),
            SystemOutputRecord(id="c1", predicted_label=Label.TRUE,
                               generated_explanation="x", snippet_count=1),
        ]
        pairs = join_for_eval(small_gold, outputs)
        assert [record.id for record, _ in pairs] == ["c1", "c3"]
        assert len(pairs) == len(outputs)

    def test_missing_id_is_named(self, small_gold):
        outputs = [
            SystemOutputRecord(id="c9", predicted_label=Label.TRUE,
                               generated_explanation="x", snippet_count=1)
        ]
        with pytest.raises(DatasetError, match="c9"):
            join_for_eval(small_gold, outputs)
