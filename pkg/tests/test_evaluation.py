import itertools
import math
import random

import pytest
from hypothesis import given, strategies as st

from claimcheck.dataset import Dataset, Label, SystemOutputRecord
from claimcheck.evaluation import (
    ConfusionMatrix3,
    ablation_report,
    classification_report,
    confusion_matrix,
    cosine,
    evaluate_explanations,
    lcs_length,
    mean_cosine,
    rouge_l_f1,
    round_half_up,
    tokenize,
    vectorize,
)


F, T, O = Label.FALSE, Label.TRUE, Label.OTHER


# --- independent oracle: enumerate subsequences of the shorter sequence ---

def _is_subsequence(candidate, sequence):
    it = iter(sequence)
    return all(token in it for token in candidate)


def lcs_brute_force(a, b):
    if len(a) > len(b):
        a, b = b, a
    best = 0
    for mask in range(1 << len(a)):
        sub = [a[i] for i in range(len(a)) if mask >> i & 1]
        if len(sub) > best and _is_subsequence(sub, b):
            best = len(sub)
    return best


class TestTokenize:
    def test_plain_words(self):
        assert tokenize("a b c") == ["a", "b", "c"]

    def test_empty(self):
        assert tokenize("") == []

    def test_arabic_with_punctuation_and_normalization(self):
        assert tokenize("نفى، رسمياً") == ["نفى", "،", "رسميا"]

    def test_punctuation_detached(self):
        assert tokenize("end.", normalize=False) == ["end", "."]

    def test_no_normalization_keeps_diacritics(self):
        assert tokenize("رسمياً", normalize=False) == ["رسمياً"]

    @given(st.text(max_size=100))
    def test_no_empty_tokens(self, text):
        assert all(tokenize(text))


class TestLcs:
    def test_identity(self):
        assert lcs_length(["a", "b", "c"], ["a", "b", "c"]) == 3

    def test_disjoint(self):
        assert lcs_length(["a", "b"], ["c", "d"]) == 0

    def test_partial(self):
        assert lcs_length(["a", "b", "c"], ["a", "c", "d"]) == 2

    def test_empty_sides(self):
        assert lcs_length([], ["a"]) == 0
        assert lcs_length(["a"], []) == 0
        assert lcs_length([], []) == 0

    def test_matches_brute_force_exhaustively_small(self):
        alphabet = "ab"
        sequences = [
            list(seq)
            for length in range(0, 5)
            for seq in itertools.product(alphabet, repeat=length)
        ]
        for a in sequences:
            for b in sequences:
                assert lcs_length(a, b) == lcs_brute_force(a, b), (a, b)

    def test_matches_brute_force_randomized(self):
        rng = random.Random(7)
        alphabet = ["w", "x", "y", "z"]
        for _ in range(500):
            a = [rng.choice(alphabet) for _ in range(rng.randrange(0, 11))]
            b = [rng.choice(alphabet) for _ in range(rng.randrange(0, 11))]
            assert lcs_length(a, b) == lcs_brute_force(a, b), (a, b)

    @given(
        st.lists(st.sampled_from("abcd"), max_size=12),
        st.lists(st.sampled_from("abcd"), max_size=12),
    )
    def test_symmetric_and_bounded(self, a, b):
        value = lcs_length(a, b)
        assert value == lcs_length(b, a)
        assert 0 <= value <= min(len(a), len(b))


class TestRougeL:
    def test_identical(self):
        score = rouge_l_f1(["a", "b"], ["a", "b"])
        assert (score.precision, score.recall, score.f1) == (1.0, 1.0, 1.0)

    def test_disjoint(self):
        score = rouge_l_f1(["a"], ["b"])
        assert (score.precision, score.recall, score.f1) == (0.0, 0.0, 0.0)

    def test_two_thirds_example(self):
        score = rouge_l_f1(["a", "b", "c"], ["a", "c", "d"])
        assert score.precision == pytest.approx(2 / 3)
        assert score.recall == pytest.approx(2 / 3)
        assert score.f1 == pytest.approx(2 / 3)

    def test_empty_candidate(self):
        score = rouge_l_f1([], ["a"])
        assert (score.precision, score.recall, score.f1) == (0.0, 0.0, 0.0)

    def test_swap_exchanges_p_and_r(self):
        a, b = ["a", "b", "c", "d"], ["a", "c"]
        forward = rouge_l_f1(a, b)
        backward = rouge_l_f1(b, a)
        assert forward.precision == backward.recall
        assert forward.recall == backward.precision
        assert forward.f1 == pytest.approx(backward.f1)

    def test_matches_oracle_derived_scores(self):
        rng = random.Random(13)
        alphabet = ["a", "b", "c", "d"]
        for _ in range(300):
            cand = [rng.choice(alphabet) for _ in range(rng.randrange(0, 9))]
            ref = [rng.choice(alphabet) for _ in range(rng.randrange(0, 9))]
            lcs = lcs_brute_force(cand, ref)
            expected_p = lcs / len(cand) if cand else 0.0
            expected_r = lcs / len(ref) if ref else 0.0
            score = rouge_l_f1(cand, ref)
            assert score.precision == pytest.approx(expected_p)
            assert score.recall == pytest.approx(expected_r)


class TestVectorize:
    def test_token_counts(self):
        assert vectorize("a a b", scheme="tf_tokens") == {"a": 2.0, "b": 1.0}

    def test_empty_text(self):
        assert vectorize("", scheme="tf_tokens") == {}
        assert vectorize("", scheme="tf_char3grams") == {}

    def test_single_char3gram(self):
        assert vectorize("abc", scheme="tf_char3grams") == {"abc": 1.0}

    def test_short_text_has_no_3grams(self):
        assert vectorize("ab", scheme="tf_char3grams") == {}

    def test_whitespace_collapsed_before_3grams(self):
        assert vectorize("a  b", scheme="tf_char3grams") == {"a b": 1.0}

    def test_unknown_scheme(self):
        with pytest.raises(ValueError, match="scheme"):
            vectorize("x", scheme="bag_of_vibes")

    def test_no_zero_weights(self):
        vec = vectorize("some words repeated words", scheme="tf_tokens")
        assert all(weight > 0 for weight in vec.values())

    def test_normalization_applied(self):
        assert vectorize("أخبار", scheme="tf_tokens") == {"اخبار": 1.0}


class TestCosine:
    def test_self_similarity_is_exactly_one(self):
        vec = vectorize("some explanation text", scheme="tf_char3grams")
        assert cosine(vec, vec) == 1.0

    def test_orthogonal(self):
        assert cosine({"a": 1.0}, {"b": 1.0}) == 0.0

    def test_hand_computed_example(self):
        assert cosine({"x": 1.0, "y": 1.0}, {"x": 1.0}) == pytest.approx(
            1 / math.sqrt(2)
        )

    def test_empty_vector_gives_zero(self):
        assert cosine({}, {"a": 1.0}) == 0.0
        assert cosine({}, {}) == 0.0

    def test_scale_invariance(self):
        rng = random.Random(3)
        for _ in range(200):
            a = {f"t{i}": rng.random() + 0.01 for i in range(rng.randrange(1, 8))}
            b = {f"t{i}": rng.random() + 0.01 for i in range(rng.randrange(1, 8))}
            scale = rng.random() * 9 + 0.1
            scaled = {k: v * scale for k, v in a.items()}
            assert cosine(scaled, b) == pytest.approx(cosine(a, b), abs=1e-12)

    def test_bounded_for_non_negative_vectors(self):
        rng = random.Random(4)
        for _ in range(200):
            a = {f"t{rng.randrange(10)}": rng.random() for _ in range(5)}
            b = {f"t{rng.randrange(10)}": rng.random() for _ in range(5)}
            a = {k: v for k, v in a.items() if v}
            b = {k: v for k, v in b.items() if v}
            assert 0.0 <= cosine(a, b) <= 1.0


class TestMeanCosine:
    def test_identical_pair(self):
        assert mean_cosine([("نفس النص تماما", "نفس النص تماما")]) == 1.0

    def test_hand_average(self):
        pairs = [("abc", "abc"), ("abc", "xyz")]
        assert mean_cosine(pairs) == pytest.approx(0.5)

    def test_empty_list_is_an_error(self):
        with pytest.raises(ValueError):
            mean_cosine([])

    def test_duplicated_pair_equals_single(self):
        pair = ("الخبر صحيح ومؤكد", "الخبر مؤكد")
        single = mean_cosine([pair])
        for n in (2, 3, 7):
            assert mean_cosine([pair] * n) == pytest.approx(single, abs=1e-12)


class TestConfusionMatrix:
    def test_diagonal(self):
        matrix = confusion_matrix([F, T], [F, T])
        assert matrix.counts == ((1, 0, 0), (0, 1, 0), (0, 0, 0))

    def test_other_prediction_counted(self):
        matrix = confusion_matrix([F], [O])
        assert matrix.counts[0][2] == 1

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length"):
            confusion_matrix([F], [F, T])

    def test_gold_other_rejected(self):
        with pytest.raises(ValueError, match="gold"):
            confusion_matrix([O], [F])

    def test_total_equals_input_length(self):
        rng = random.Random(11)
        for _ in range(50):
            n = rng.randrange(1, 40)
            gold = [rng.choice([F, T]) for _ in range(n)]
            pred = [rng.choice([F, T, O]) for _ in range(n)]
            assert confusion_matrix(gold, pred).total == n

    def test_synthetic_hundred_matches_derived_matrix(self):
        # reconstruct label lists whose counts are the derived 3-snippet
        # matrix, then check the matrix comes back out
        counts = ((40, 6, 4), (16, 29, 5), (0, 0, 0))
        gold, pred = [], []
        for i, g in enumerate((F, T)):
            for j, p in enumerate((F, T, O)):
                gold += [g] * counts[i][j]
                pred += [p] * counts[i][j]
        matrix = confusion_matrix(gold, pred)
        assert matrix.counts == counts
        assert matrix.total == 100


class TestClassificationReport:
    def test_three_snippet_derived_matrix_rounds_to_published_row(self):
        matrix = ConfusionMatrix3(counts=((40, 6, 4), (16, 29, 5), (0, 0, 0)))
        report = classification_report(matrix)
        f, t = report.per_class[F], report.per_class[T]
        assert [round_half_up(x) for x in (f.precision, f.recall, f.f1)] == [
            0.71,
            0.80,
            0.75,
        ]
        assert [round_half_up(x) for x in (t.precision, t.recall, t.f1)] == [
            0.83,
            0.58,
            0.68,
        ]
        assert round_half_up(report.accuracy) == 0.69
        assert round_half_up(report.weighted_f1) == 0.72

    def test_seven_snippet_derived_matrix_rounds_to_published_row(self):
        matrix = ConfusionMatrix3(counts=((35, 8, 7), (7, 37, 6), (0, 0, 0)))
        report = classification_report(matrix)
        f, t = report.per_class[F], report.per_class[T]
        assert [round_half_up(x) for x in (f.precision, f.recall, f.f1)] == [
            0.83,
            0.70,
            0.76,
        ]
        assert [round_half_up(x) for x in (t.precision, t.recall, t.f1)] == [
            0.82,
            0.74,
            0.78,
        ]
        assert round_half_up(report.accuracy) == 0.72
        assert round_half_up(report.weighted_f1) == 0.77

    def test_perfect_diagonal_is_all_ones(self):
        matrix = ConfusionMatrix3(counts=((10, 0, 0), (0, 10, 0), (0, 0, 0)))
        report = classification_report(matrix)
        for metrics in report.per_class.values():
            assert metrics.precision == metrics.recall == metrics.f1 == 1.0
        assert report.accuracy == 1.0
        assert report.weighted_f1 == 1.0

    def test_empty_matrix_is_an_error(self):
        with pytest.raises(ValueError):
            classification_report(ConfusionMatrix3(counts=((0,) * 3,) * 3))

    def test_empty_prediction_column_gives_zero_precision(self):
        matrix = ConfusionMatrix3(counts=((0, 5, 0), (0, 5, 0), (0, 0, 0)))
        report = classification_report(matrix)
        assert report.per_class[F].precision == 0.0
        assert report.per_class[F].recall == 0.0

    def test_accuracy_against_naive_recount(self):
        rng = random.Random(23)
        for _ in range(50):
            n = rng.randrange(1, 60)
            gold = [rng.choice([F, T]) for _ in range(n)]
            pred = [rng.choice([F, T, O]) for _ in range(n)]
            report = classification_report(confusion_matrix(gold, pred))
            naive = sum(g is p for g, p in zip(gold, pred)) / n
            assert report.accuracy == pytest.approx(naive)

    def test_weighted_f1_ignores_unsupported_other(self):
        # all predictions land on Other; weighted F1 averages only over
        # gold-supported classes
        matrix = ConfusionMatrix3(counts=((0, 0, 5), (0, 0, 5), (0, 0, 0)))
        report = classification_report(matrix)
        assert report.weighted_f1 == 0.0
        assert O not in report.per_class


class TestRounding:
    def test_half_up_not_bankers(self):
        assert round_half_up(0.715) == 0.72
        assert round_half_up(0.725) == 0.73
        assert round_half_up(0.005) == 0.01

    def test_plain_cases(self):
        assert round_half_up(0.7185) == 0.72
        assert round_half_up(0.769905) == 0.77


class TestEvaluateExplanations:
    def _outputs(self, gold, text_fn):
        return [
            SystemOutputRecord(
                id=record.id,
                predicted_label=record.gold_label,
                generated_explanation=text_fn(record),
                snippet_count=3,
            )
            for record in gold
        ]

    def test_identical_explanations_score_one(self, small_gold):
        outputs = self._outputs(small_gold, lambda r: r.explanation)
        report = evaluate_explanations(small_gold, outputs)
        assert report.avg_rouge_vs_ex == 1.0
        assert report.avg_cos_vs_ex == 1.0
        assert all(row.rouge_vs_ex.f1 == 1.0 for row in report.rows)

    def test_single_row_average_equals_row(self, small_gold):
        outputs = self._outputs(small_gold, lambda r: r.explanation)[:1]
        report = evaluate_explanations(small_gold, outputs)
        assert len(report.rows) == 1
        assert report.avg_rouge_vs_xex == report.rows[0].rouge_vs_xex.f1
        assert report.avg_cos_vs_xex == report.rows[0].cos_vs_xex

    def test_mixed_rows_average(self, small_gold):
        gold = Dataset(records=small_gold.records[:2], name="two")
        outputs = [
            SystemOutputRecord(
                id="c1", predicted_label=F,
                generated_explanation=gold.records[0].explanation,
                snippet_count=3,
            ),
            SystemOutputRecord(
                id="c2", predicted_label=T,
                generated_explanation="zzz qqq www",
                snippet_count=3,
            ),
        ]
        report = evaluate_explanations(gold, outputs)
        expected = (report.rows[0].cos_vs_ex + report.rows[1].cos_vs_ex) / 2
        assert report.avg_cos_vs_ex == pytest.approx(expected)
        assert report.rows[1].cos_vs_ex == 0.0

    def test_no_outputs_is_an_error(self, small_gold):
        with pytest.raises(ValueError):
            evaluate_explanations(small_gold, [])


class TestAblationReport:
    def test_single_perfect_model(self):
        gold = [F, T, F]
        reports = ablation_report({3: (gold, list(gold))})
        assert set(reports) == {3}
        assert reports[3].accuracy == 1.0

    def test_five_models_compose_classification_reports(self):
        gold = [F] * 50 + [T] * 50
        arranged = {}
        for count, counts in {
            3: ((40, 6, 4), (16, 29, 5)),
            7: ((35, 8, 7), (7, 37, 6)),
        }.items():
            pred = []
            for i, row in enumerate(counts):
                for j, cell in enumerate(row):
                    pred += [(F, T, O)[j]] * cell
            arranged[count] = (gold, pred)
        arranged[1] = (gold, list(gold))
        arranged[5] = (gold, list(gold))
        arranged[9] = (gold, list(gold))
        reports = ablation_report(arranged)
        assert round_half_up(reports[3].weighted_f1) == 0.72
        assert round_half_up(reports[7].weighted_f1) == 0.77
        assert reports[1].accuracy == 1.0
        assert list(reports) == [1, 3, 5, 7, 9]

    def test_empty_mapping_is_an_error(self):
        with pytest.raises(ValueError):
            ablation_report({})

    def test_inconsistent_gold_lists_rejected(self):
        with pytest.raises(ValueError, match="different gold"):
            ablation_report({1: ([F], [F]), 3: ([T], [T])})
