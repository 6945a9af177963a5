from __future__ import annotations

from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pharmapipe.errors import ValidationError
from pharmapipe.metrics import (
    classification_report,
    format_metrics_csv,
    rouge_l,
    rouge_n,
    score_against_references,
    tokenize,
)

from oracles import rouge_l_oracle, rouge_n_oracle

tokens_st = st.lists(st.sampled_from("abcde"), min_size=0, max_size=12)


class TestTokenize:
    def test_rule_application(self):
        assert tokenize("Aspirin 81mg PO") == ["aspirin", "81mg", "po"]

    def test_empty(self):
        assert tokenize("") == []

    def test_punctuation_heavy(self):
        assert tokenize("norepinephrine—0.1 mcg/kg/min") == [
            "norepinephrine",
            "0",
            "1",
            "mcg",
            "kg",
            "min",
        ]


class TestRougeN:
    def test_identity(self):
        score = rouge_n("aspirin 81 mg daily", "aspirin 81 mg daily", 1)
        assert score.precision == score.recall == score.f1 == 1.0

    def test_unigram_hand_count(self):
        score = rouge_n("aspirin 81 mg daily", "aspirin 325 mg daily", 1)
        assert score.precision == pytest.approx(0.75)
        assert score.recall == pytest.approx(0.75)
        assert score.f1 == pytest.approx(0.75)

    def test_bigram_hand_count(self):
        score = rouge_n("aspirin 81 mg daily", "aspirin 325 mg daily", 2)
        assert score.precision == pytest.approx(1 / 3)
        assert score.recall == pytest.approx(1 / 3)
        assert score.f1 == pytest.approx(1 / 3)

    def test_empty_sides_give_zero(self):
        assert rouge_n("", "aspirin", 1).f1 == 0.0
        assert rouge_n("aspirin", "", 1).f1 == 0.0

    def test_invalid_n(self):
        with pytest.raises(ValidationError):
            rouge_n("a", "a", 3)

    @given(tokens_st, tokens_st, st.sampled_from([1, 2]))
    @settings(max_examples=150)
    def test_matches_counting_oracle(self, cand, ref, n):
        got = rouge_n(" ".join(cand), " ".join(ref), n)
        p, r, f1 = rouge_n_oracle(cand, ref, n)
        assert got.precision == pytest.approx(p, abs=1e-12)
        assert got.recall == pytest.approx(r, abs=1e-12)
        assert got.f1 == pytest.approx(f1, abs=1e-12)

    @given(tokens_st, tokens_st)
    @settings(max_examples=100)
    def test_swap_symmetry(self, cand, ref):
        a = rouge_n(" ".join(cand), " ".join(ref), 1)
        b = rouge_n(" ".join(ref), " ".join(cand), 1)
        assert a.precision == pytest.approx(b.recall, abs=1e-12)
        assert a.recall == pytest.approx(b.precision, abs=1e-12)

    @given(tokens_st, tokens_st)
    @settings(max_examples=100)
    def test_unigram_overlap_dominates_bigram_overlap(self, cand, ref):
        def clipped_overlap(xs, ys, n):
            cx = Counter(tuple(xs[i : i + n]) for i in range(len(xs) - n + 1))
            cy = Counter(tuple(ys[i : i + n]) for i in range(len(ys) - n + 1))
            return sum(min(c, cy[g]) for g, c in cx.items())

        assert clipped_overlap(cand, ref, 1) >= clipped_overlap(cand, ref, 2)


class TestRougeL:
    def test_hand_lcs(self):
        score = rouge_l("aspirin 81 mg daily", "aspirin 325 mg daily")
        assert score.precision == pytest.approx(0.75)
        assert score.recall == pytest.approx(0.75)
        assert score.f1 == pytest.approx(0.75)

    def test_disjoint_vocabulary(self):
        score = rouge_l("alpha beta", "gamma delta")
        assert score.precision == score.recall == score.f1 == 0.0

    @given(tokens_st, tokens_st)
    @settings(max_examples=100, deadline=None)
    def test_matches_enumeration_oracle(self, cand, ref):
        got = rouge_l(" ".join(cand), " ".join(ref))
        p, r, f1 = rouge_l_oracle(cand, ref)
        assert got.precision == pytest.approx(p, abs=1e-12)
        assert got.recall == pytest.approx(r, abs=1e-12)
        assert got.f1 == pytest.approx(f1, abs=1e-12)


class TestClassificationReport:
    def test_perfect(self):
        rep = classification_report(["a", "b", "a"], ["a", "b", "a"], positive="a")
        assert rep.accuracy == rep.precision == rep.recall == rep.f1 == 1.0
        assert rep.counts == (2, 0, 1, 0)

    def test_counts_and_ratios(self):
        preds = ["pos"] * 8 + ["neg"] * 4
        golds = ["pos"] * 3 + ["neg"] * 5 + ["pos"] * 2 + ["neg"] * 2
        rep = classification_report(preds, golds, positive="pos")
        assert rep.counts == (3, 5, 2, 2)
        assert rep.accuracy == pytest.approx(5 / 12)
        assert rep.precision == pytest.approx(3 / 8)
        assert rep.recall == pytest.approx(3 / 5)

    def test_undefined_flags(self):
        rep = classification_report(["n", "n"], ["n", "p"], positive="p")
        assert rep.precision == 0.0
        assert "precision" in rep.undefined

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            classification_report(["a"], ["a", "b"], positive="a")

    def test_non_binary_rejected(self):
        with pytest.raises(ValidationError):
            classification_report(["a", "b"], ["c", "a"], positive="a")

    @given(st.lists(st.sampled_from(["p", "n"]), min_size=1, max_size=40), st.data())
    @settings(max_examples=100)
    def test_accuracy_equals_agreement_fraction(self, golds, data):
        preds = data.draw(
            st.lists(st.sampled_from(["p", "n"]), min_size=len(golds), max_size=len(golds))
        )
        rep = classification_report(preds, golds, positive="p")
        agreement = sum(1 for a, b in zip(preds, golds) if a == b) / len(golds)
        assert rep.accuracy == pytest.approx(agreement, abs=1e-12)


def test_score_against_references_is_mean():
    score = score_against_references(
        "a b", ["a b", "c d"], lambda c, r: rouge_n(c, r, 1).f1
    )
    assert score == pytest.approx(0.5)
    with pytest.raises(ValidationError):
        score_against_references("a", [], lambda c, r: 0.0)


def test_format_metrics_csv_blanks():
    text = format_metrics_csv(
        [{"task": "mortality", "strategy": "rand_k:5", "model": "m", "accuracy": 0.5}]
    )
    lines = text.splitlines()
    assert lines[0].startswith("task,strategy,model,accuracy")
    assert lines[1] == "mortality,rand_k:5,m,0.500000,,,,,,"
