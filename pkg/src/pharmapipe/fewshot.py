"""Demonstration selection strategies and prompt assembly.

Four selection strategies over a labeled pool of training patients:

* ``rand_k`` — k seeded uniform draws without replacement,
* ``freq_k`` — one seeded draw from each of the k most frequent diagnosis
  categories (ties between categories broken lexicographically),
* ``bcat_rand_k`` — k seeded draws sharing the query's diagnosis category,
  topped up from the remaining pool when the category is thin,
* ``sim_k`` — the k pool members most cosine-similar to the query embedding,
  descending, ties broken by smaller patient id.

Selected demonstrations plus the query portrait become a PromptBundle, which
renders to a system turn and a single user turn of
``Patient: <portrait> / Answer: <answer>`` blocks followed by the query.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .embeddings import EmbeddingVector, cosine_similarity
from .errors import ConfigError, ValidationError
from .llm import ChatTurn
from .records import PatientRecord, diagnosis_category, render_portrait

STRATEGY_KINDS = ("rand_k", "freq_k", "bcat_rand_k", "sim_k")

_KIND_ALIASES = {"rand": "rand_k", "freq": "freq_k", "bcat": "bcat_rand_k", "sim": "sim_k"}

TASKS = ("mortality", "apache_range", "medication_plan")

_SYSTEM_TEXTS = {
    "mortality": (
        "You are an experienced ICU clinical pharmacist. Given a patient "
        "description, predict whether the patient will survive the hospital admission."
    ),
    "apache_range": (
        "You are an experienced ICU clinical pharmacist. Given a patient "
        "description, estimate the patient's APACHE II severity score range."
    ),
    "medication_plan": (
        "You are an experienced ICU clinical pharmacist. Given a patient "
        "description, write the medication orders for the first 24 hours of "
        "the ICU admission."
    ),
}

_TASK_QUESTIONS = {
    "mortality": (
        "Will this patient survive the hospital admission? "
        "Answer with exactly one word: survived or deceased."
    ),
    "apache_range": (
        "What is this patient's APACHE II score range? "
        "Answer in the form: APACHE II range L-U."
    ),
    "medication_plan": (
        "Propose the medication orders for the first 24 hours of this ICU "
        "admission. Output one order per line as: drug dose unit route frequency."
    ),
}


@dataclass(frozen=True)
class Demonstration:
    portrait: str
    answer: str
    source_id: str


@dataclass(frozen=True)
class SelectionStrategy:
    kind: str = "rand_k"
    k: int = 5
    seed: int = 0

    def __post_init__(self):
        kind = _KIND_ALIASES.get(self.kind, self.kind)
        object.__setattr__(self, "kind", kind)
        if kind not in STRATEGY_KINDS:
            raise ConfigError(f"unknown selection strategy: {self.kind!r}")
        if self.k < 1:
            raise ConfigError("strategy k must be >= 1")


@dataclass(frozen=True)
class PromptBundle:
    system_text: str
    demonstrations: tuple[Demonstration, ...]
    query_portrait: str
    task_question: str

    def __post_init__(self):
        object.__setattr__(self, "demonstrations", tuple(self.demonstrations))
        if not self.query_portrait:
            raise ValidationError("query portrait must be non-empty")

    def user_text(self) -> str:
        blocks = [
            f"Patient: {demo.portrait}\nAnswer: {demo.answer}"
            for demo in self.demonstrations
        ]
        blocks.append(f"Patient: {self.query_portrait}\n{self.task_question}")
        return "\n\n".join(blocks)

    def as_transcript(self) -> list[ChatTurn]:
        return [
            ChatTurn(role="system", content=self.system_text),
            ChatTurn(role="user", content=self.user_text()),
        ]

    def rendered_text(self) -> str:
        """Concatenated transcript contents (what mock rules match against)."""
        return f"{self.system_text}\n{self.user_text()}"

    def to_json(self) -> str:
        return json.dumps(
            {
                "system_text": self.system_text,
                "demonstrations": [
                    {"portrait": d.portrait, "answer": d.answer, "source_id": d.source_id}
                    for d in self.demonstrations
                ],
                "query_portrait": self.query_portrait,
                "task_question": self.task_question,
            },
            ensure_ascii=False,
            indent=2,
        )


Pool = list[tuple[PatientRecord, str]]  # (record, rendered ground-truth answer)


def _demo(record: PatientRecord, answer: str) -> Demonstration:
    return Demonstration(portrait=render_portrait(record), answer=answer, source_id=record.id)


def select_examples(
    strategy: SelectionStrategy,
    pool: Pool,
    query: PatientRecord,
    embeddings: dict[str, EmbeddingVector] | None = None,
) -> list[Demonstration]:
    """Pick demonstrations for one query patient.

    The pool must not contain the query patient. ``sim_k`` requires an
    embeddings map covering every pool id and the query id. When the pool is
    smaller than k, every strategy returns what exists rather than raising.
    """
    if not pool:
        raise ValidationError("demonstration pool is empty")
    for record, _ in pool:
        if record.id == query.id:
            raise ValidationError(f"pool must exclude the query patient {query.id!r}")
    k = strategy.k
    rng = np.random.default_rng(strategy.seed)

    if strategy.kind == "rand_k":
        picks = rng.choice(len(pool), size=min(k, len(pool)), replace=False)
        return [_demo(*pool[int(i)]) for i in picks]

    if strategy.kind == "freq_k":
        categories = [diagnosis_category(rec.admission_diagnosis) for rec, _ in pool]
        counts = Counter(categories)
        ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
        top = [category for category, _ in ranked[:k]]
        out = []
        for category in top:
            members = [i for i, c in enumerate(categories) if c == category]
            out.append(_demo(*pool[members[int(rng.integers(len(members)))]]))
        return out

    if strategy.kind == "bcat_rand_k":
        query_category = diagnosis_category(query.admission_diagnosis)
        same = [
            i
            for i, (rec, _) in enumerate(pool)
            if diagnosis_category(rec.admission_diagnosis) == query_category
        ]
        if len(same) >= k:
            picks = rng.choice(len(same), size=k, replace=False)
            return [_demo(*pool[same[int(i)]]) for i in picks]
        rest = [i for i in range(len(pool)) if i not in set(same)]
        chosen = list(same)
        fill = min(k - len(same), len(rest))
        if fill:
            picks = rng.choice(len(rest), size=fill, replace=False)
            chosen.extend(rest[int(i)] for i in picks)
        return [_demo(*pool[i]) for i in chosen]

    # sim_k
    if embeddings is None:
        raise ValidationError("sim_k requires precomputed embeddings")
    try:
        query_vec = embeddings[query.id]
        scored = [
            (-cosine_similarity(embeddings[rec.id], query_vec), rec.id, i)
            for i, (rec, _) in enumerate(pool)
        ]
    except KeyError as exc:
        raise ValidationError(f"missing embedding for patient {exc.args[0]!r}") from None
    scored.sort()
    return [_demo(*pool[i]) for _, _, i in scored[:k]]


def build_prompt(
    task: str, demonstrations: list[Demonstration], query: PatientRecord
) -> PromptBundle:
    """Assemble the dynamic prompt for a task; deterministic in its inputs."""
    if task not in TASKS:
        raise ConfigError(f"unknown task: {task!r}")
    return PromptBundle(
        system_text=_SYSTEM_TEXTS[task],
        demonstrations=tuple(demonstrations),
        query_portrait=render_portrait(query),
        task_question=_TASK_QUESTIONS[task],
    )
