import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracle import naive_argmax, naive_trust

from trustlens import (
    InvalidInputError,
    LabelSpace,
    PredictionRecord,
    ScoredTable,
    TrustParams,
    predicted_answer,
    question_answer_trust,
    score_record,
    score_records,
)
from trustlens.core import trust_scores

unit = st.floats(0.0, 1.0)
exponents = st.floats(0.05, 20.0)


class TestLabelSpace:
    def test_of_size_and_lookup(self):
        labels = LabelSpace.of_size(3)
        assert labels.labels == ("class_0", "class_1", "class_2")
        assert labels.count == len(labels) == 3
        assert labels.index_of("class_2") == 2
        assert labels.name(1) == "class_1"

    def test_resolve_accepts_names_and_indices(self):
        labels = LabelSpace(("cat", "dog", "fox"))
        assert labels.resolve("dog") == 1
        assert labels.resolve(2) == 2
        assert labels.resolve("0") == 0
        assert labels.resolve("fox") == 2

    @pytest.mark.parametrize("bad", [(), ("only",), ("a", "a"), ("a", "")])
    def test_rejects_degenerate_spaces(self, bad):
        with pytest.raises(InvalidInputError):
            LabelSpace(bad)

    def test_unknown_name(self):
        with pytest.raises(InvalidInputError):
            LabelSpace(("a", "b")).index_of("c")


class TestTrustParams:
    @pytest.mark.parametrize("alpha,beta", [(0, 1), (1, -2), (float("nan"), 1), (1, float("inf"))])
    def test_rejects_non_positive_or_non_finite(self, alpha, beta):
        with pytest.raises(InvalidInputError):
            TrustParams(alpha, beta)

    def test_defaults(self):
        assert TrustParams() == TrustParams(1.0, 1.0)


class TestQuestionAnswerTrust:
    def test_docstring_values(self):
        assert question_answer_trust(0.8, True) == 0.8
        assert question_answer_trust(0.8, False) == pytest.approx(0.2, abs=1e-15)

    def test_endpoints(self):
        assert question_answer_trust(1.0, True) == 1.0
        assert question_answer_trust(1.0, False) == 0.0
        assert question_answer_trust(0.0, False) == 1.0

    def test_relaxation_exponents(self):
        p = TrustParams(alpha=2.0, beta=0.5)
        assert question_answer_trust(0.5, True, p) == 0.25
        assert question_answer_trust(0.75, False, p) == 0.5

    @pytest.mark.parametrize("c,expected", [(-5e-10, 0.0), (1 + 5e-10, 1.0)])
    def test_clamps_rounding_noise(self, c, expected):
        assert question_answer_trust(c, True) == expected

    @pytest.mark.parametrize("c", [-1e-6, 1.001, float("nan"), float("inf")])
    def test_rejects_out_of_range(self, c):
        with pytest.raises(InvalidInputError):
            question_answer_trust(c, True)

    @given(unit, st.booleans(), exponents, exponents)
    def test_matches_direct_formula_and_stays_in_unit_interval(self, c, correct, a, b):
        t = question_answer_trust(c, correct, TrustParams(a, b))
        assert t == naive_trust(c, correct, a, b)
        assert 0.0 <= t <= 1.0

    @given(unit, unit, st.booleans())
    def test_monotone_in_confidence(self, c1, c2, correct):
        lo, hi = sorted((c1, c2))
        t_lo, t_hi = question_answer_trust(lo, correct), question_answer_trust(hi, correct)
        assert (t_lo <= t_hi) if correct else (t_lo >= t_hi)

    @given(st.floats(0.01, 0.99), st.floats(0.1, 5.0), st.floats(0.1, 5.0))
    def test_larger_exponent_is_harsher(self, c, a, extra):
        # c**a shrinks as a grows for c in (0, 1)
        assert question_answer_trust(c, True, TrustParams(a + extra)) <= question_answer_trust(c, True, TrustParams(a))

    @given(st.lists(unit, min_size=1, max_size=50), st.lists(st.booleans(), min_size=50, max_size=50))
    def test_vectorised_within_one_ulp_of_scalar(self, cs, flags):
        # numpy may route special exponents (0.5, 2) through sqrt/square instead of pow
        flags = flags[: len(cs)]
        p = TrustParams(2.0, 0.5)
        vec = trust_scores(np.array(cs), np.array(flags), p)
        for v, c, f in zip(vec.tolist(), cs, flags):
            s = question_answer_trust(c, f, p)
            assert abs(v - s) <= math.ulp(s)


class TestPredictedAnswer:
    def test_ties_go_to_lowest_index(self):
        assert predicted_answer([0.4, 0.4, 0.2]) == 0
        assert predicted_answer([0.1, 0.45, 0.45]) == 1

    @given(st.lists(st.sampled_from([0.0, 0.1, 0.25, 0.5]), min_size=1, max_size=12))
    def test_matches_naive_argmax(self, vec):
        assert predicted_answer(vec) == naive_argmax(vec)

    @pytest.mark.parametrize("bad", [[], [0.5, float("nan")], [[0.5, 0.5]]])
    def test_rejects_bad_vectors(self, bad):
        with pytest.raises(InvalidInputError):
            predicted_answer(bad)


class TestRecords:
    def test_actor_answer_is_derived(self):
        r = PredictionRecord("a", (0.1, 0.7, 0.2), 1)
        assert r.actor_answer == 1 and r.correct and r.confidence == 0.7

    def test_explicit_actor_must_be_argmax(self):
        with pytest.raises(InvalidInputError):
            PredictionRecord("a", (0.1, 0.7, 0.2), 1, actor_answer=2)

    def test_oracle_out_of_range(self):
        with pytest.raises(InvalidInputError):
            PredictionRecord("a", (0.5, 0.5), 2)

    def test_score_record(self):
        s = score_record(PredictionRecord("a", (0.1, 0.7, 0.2), 0))
        assert not s.correct
        assert s.trust == 1.0 - 0.7
        assert (s.actor_answer, s.oracle_answer) == (1, 0)

    def test_table_from_scored_matches_columns(self):
        recs = [PredictionRecord(str(i), (0.6, 0.4) if i % 2 else (0.3, 0.7), i % 2) for i in range(6)]
        scored = score_records(recs, TrustParams(2.0, 3.0))
        a = ScoredTable.from_scored(scored)
        b = ScoredTable.from_columns(a.actor, a.oracle, a.confidence, TrustParams(2.0, 3.0))
        assert a.trust.tolist() == b.trust.tolist()
        assert a.ids == tuple(str(i) for i in range(6))
        assert not a.trust.flags.writeable

    def test_subset(self):
        t = ScoredTable.from_columns([0, 1, 1], [0, 0, 1], [0.9, 0.8, 0.7], ids=["a", "b", "c"])
        s = t.subset(t.correct)
        assert s.ids == ("a", "c")
        assert s.trust.tolist() == [0.9, 0.7]

    def test_check_labels(self):
        t = ScoredTable.from_columns([0, 3], [0, 0], [0.9, 0.8])
        with pytest.raises(InvalidInputError):
            t.check_labels(LabelSpace.of_size(3))


def test_trust_scores_reject_out_of_range():
    with pytest.raises(InvalidInputError):
        trust_scores(np.array([1.5]), np.array([True]))
    assert math.isclose(trust_scores(np.array([0.2]), np.array([False]))[0], 0.8)
