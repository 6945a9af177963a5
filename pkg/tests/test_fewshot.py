from __future__ import annotations

import numpy as np
import pytest

from pharmapipe.embeddings import EmbeddingVector, hash_embed
from pharmapipe.errors import ConfigError, ValidationError
from pharmapipe.fewshot import (
    SelectionStrategy,
    build_prompt,
    select_examples,
)
from pharmapipe.records import diagnosis_category, render_portrait

from conftest import make_record
from oracles import knn_oracle


def _vec(x, y):
    return EmbeddingVector(values=np.array([x, y], dtype=float), dim=2, source="hashed")


# One handy ICD code per chapter used in these tests.
_CODES = {"C1": "I21", "C2": "G40", "C3": "J45", "C4": "K52", "C5": "N17", "C6": "E11"}


def _pool_with_counts(counts: dict[str, int]):
    pool = []
    i = 0
    for cat, count in counts.items():
        for _ in range(count):
            record = make_record(f"t{i:03d}", dx=_CODES[cat])
            pool.append((record, f"answer-{i}"))
            i += 1
    return pool


class TestRandK:
    def test_seeded_determinism(self):
        pool = _pool_with_counts({"C1": 10})
        strategy = SelectionStrategy(kind="rand_k", k=5, seed=42)
        query = make_record("q", dx="I21")
        a = select_examples(strategy, pool, query)
        b = select_examples(strategy, pool, query)
        assert [d.source_id for d in a] == [d.source_id for d in b]
        assert len(a) == 5
        assert len({d.source_id for d in a}) == 5

    def test_small_pool_returns_all(self):
        pool = _pool_with_counts({"C1": 3})
        strategy = SelectionStrategy(kind="rand_k", k=5, seed=0)
        out = select_examples(strategy, pool, make_record("q"))
        assert len(out) == 3

    def test_empty_pool_rejected(self):
        with pytest.raises(ValidationError):
            select_examples(SelectionStrategy(kind="rand_k"), [], make_record("q"))

    def test_query_in_pool_rejected(self):
        record = make_record("q")
        with pytest.raises(ValidationError, match="exclude the query"):
            select_examples(SelectionStrategy(kind="rand_k"), [(record, "x")], record)


class TestFreqK:
    def test_one_from_each_top_category(self):
        counts = {"C1": 10, "C2": 8, "C3": 5, "C4": 4, "C5": 3, "C6": 1}
        pool = _pool_with_counts(counts)
        strategy = SelectionStrategy(kind="freq_k", k=5, seed=7)
        demos = select_examples(strategy, pool, make_record("q", dx="I21"))
        assert len(demos) == 5
        cats = []
        for demo in demos:
            record = next(r for r, _ in pool if r.id == demo.source_id)
            cats.append(diagnosis_category(record.admission_diagnosis))
        expected = [diagnosis_category(_CODES[c]) for c in ("C1", "C2", "C3", "C4", "C5")]
        assert cats == expected  # rank order, C6 never picked

    def test_tie_broken_lexicographically(self):
        pool = _pool_with_counts({"C1": 2, "C2": 2, "C3": 2})
        strategy = SelectionStrategy(kind="freq_k", k=2, seed=1)
        demos = select_examples(strategy, pool, make_record("q"))
        cats = sorted(
            diagnosis_category(next(r for r, _ in pool if r.id == d.source_id).admission_diagnosis)
            for d in demos
        )
        all_cats = sorted(diagnosis_category(_CODES[c]) for c in ("C1", "C2", "C3"))
        assert cats == all_cats[:2]


class TestBcatRandK:
    def test_all_share_query_category_when_thick(self):
        pool = _pool_with_counts({"C1": 8, "C2": 8})
        strategy = SelectionStrategy(kind="bcat_rand_k", k=5, seed=3)
        query = make_record("q", dx="I50.9")  # circulatory, same chapter as I21
        demos = select_examples(strategy, pool, query)
        assert len(demos) == 5
        for demo in demos:
            record = next(r for r, _ in pool if r.id == demo.source_id)
            assert diagnosis_category(record.admission_diagnosis) == diagnosis_category("I50.9")

    def test_thin_category_fills_from_rest(self):
        pool = _pool_with_counts({"C1": 2, "C2": 10})
        strategy = SelectionStrategy(kind="bcat_rand_k", k=5, seed=3)
        demos = select_examples(strategy, pool, make_record("q", dx="I21"))
        assert len(demos) == 5
        same = [
            d
            for d in demos
            if diagnosis_category(
                next(r for r, _ in pool if r.id == d.source_id).admission_diagnosis
            )
            == diagnosis_category("I21")
        ]
        assert len(same) == 2  # both category members, then 3 fill-ins
        assert len({d.source_id for d in demos}) == 5


class TestSimK:
    def test_exact_match_nearest_neighbor(self):
        pool = [(make_record("a"), "ans-a"), (make_record("b"), "ans-b")]
        embeddings = {"a": _vec(1, 0), "b": _vec(0.6, 0.8), "q": _vec(1, 0)}
        strategy = SelectionStrategy(kind="sim_k", k=1, seed=0)
        demos = select_examples(strategy, pool, make_record("q"), embeddings)
        assert [d.source_id for d in demos] == ["a"]

    def test_requires_embeddings(self):
        pool = [(make_record("a"), "x")]
        with pytest.raises(ValidationError, match="embeddings"):
            select_examples(SelectionStrategy(kind="sim_k"), pool, make_record("q"))

    def test_missing_embedding_named(self):
        pool = [(make_record("a"), "x")]
        with pytest.raises(ValidationError, match="q"):
            select_examples(
                SelectionStrategy(kind="sim_k"), pool, make_record("q"), {"a": _vec(1, 0)}
            )

    def test_descending_similarity_order(self):
        rng = np.random.default_rng(0)
        pool = [(make_record(f"p{i:02d}"), f"a{i}") for i in range(30)]
        embeddings = {
            rec.id: EmbeddingVector(rng.normal(size=8), dim=8, source="hashed")
            for rec, _ in pool
        }
        query = make_record("qq")
        embeddings["qq"] = EmbeddingVector(rng.normal(size=8), dim=8, source="hashed")
        demos = select_examples(SelectionStrategy(kind="sim_k", k=10), pool, query, embeddings)
        from pharmapipe.embeddings import cosine_similarity

        sims = [cosine_similarity(embeddings[d.source_id], embeddings["qq"]) for d in demos]
        assert sims == sorted(sims, reverse=True)

    def test_matches_knn_oracle(self):
        rng = np.random.default_rng(9)
        pool = [(make_record(f"p{i:03d}"), f"a{i}") for i in range(120)]
        embeddings = {
            rec.id: EmbeddingVector(rng.normal(size=6), dim=6, source="hashed")
            for rec, _ in pool
        }
        query = make_record("zzz")
        embeddings["zzz"] = EmbeddingVector(rng.normal(size=6), dim=6, source="hashed")
        demos = select_examples(SelectionStrategy(kind="sim_k", k=7), pool, query, embeddings)
        oracle = knn_oracle(
            [(rec.id, embeddings[rec.id].values) for rec, _ in pool],
            embeddings["zzz"].values,
            7,
        )
        assert [d.source_id for d in demos] == [pid for pid, _ in oracle]


class TestAllStrategiesPure:
    @pytest.mark.parametrize("kind", ["rand_k", "freq_k", "bcat_rand_k", "sim_k"])
    def test_repeat_calls_identical(self, kind):
        rng = np.random.default_rng(1)
        pool = _pool_with_counts({"C1": 6, "C2": 5, "C3": 4})
        embeddings = {
            rec.id: EmbeddingVector(rng.normal(size=4), dim=4, source="hashed")
            for rec, _ in pool
        }
        query = make_record("q", dx="I21")
        embeddings["q"] = EmbeddingVector(rng.normal(size=4), dim=4, source="hashed")
        strategy = SelectionStrategy(kind=kind, k=4, seed=77)
        first = select_examples(strategy, pool, query, embeddings)
        second = select_examples(strategy, pool, query, embeddings)
        assert [d.source_id for d in first] == [d.source_id for d in second]
        assert "q" not in {d.source_id for d in first}
        assert len({d.source_id for d in first}) == len(first)


class TestStrategyAliases:
    def test_short_names_accepted(self):
        assert SelectionStrategy(kind="rand").kind == "rand_k"
        assert SelectionStrategy(kind="sim").kind == "sim_k"

    def test_unknown_rejected(self):
        with pytest.raises(ConfigError):
            SelectionStrategy(kind="nearest")
        with pytest.raises(ConfigError):
            SelectionStrategy(kind="rand_k", k=0)


class TestBuildPrompt:
    def test_zero_shot(self):
        bundle = build_prompt("mortality", [], make_record("q"))
        assert bundle.demonstrations == ()
        assert bundle.user_text().count("Patient:") == 1

    def test_deterministic(self):
        pool = _pool_with_counts({"C1": 6})
        demos = select_examples(SelectionStrategy(kind="rand_k", k=3, seed=5), pool, make_record("q"))
        a = build_prompt("mortality", demos, make_record("q"))
        b = build_prompt("mortality", demos, make_record("q"))
        assert a == b

    def test_five_blocks_before_query(self):
        pool = _pool_with_counts({"C1": 8})
        demos = select_examples(SelectionStrategy(kind="rand_k", k=5, seed=5), pool, make_record("q"))
        bundle = build_prompt("mortality", demos, make_record("q"))
        text = bundle.user_text()
        assert text.count("\nAnswer:") == 5
        assert text.count("Patient:") == 6  # 5 demos + query
        assert text.rindex("Patient:") > text.rindex("Answer:")

    def test_query_portrait_present(self):
        query = make_record("q", age=77)
        bundle = build_prompt("medication_plan", [], query)
        assert render_portrait(query) in bundle.user_text()

    def test_unknown_task(self):
        with pytest.raises(ConfigError):
            build_prompt("triage", [], make_record("q"))

    def test_transcript_roles(self):
        bundle = build_prompt("mortality", [], make_record("q"))
        transcript = bundle.as_transcript()
        assert [t.role for t in transcript] == ["system", "user"]
