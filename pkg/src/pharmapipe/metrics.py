"""ROUGE-1/2/L and binary classification metrics, built from scratch.

ROUGE here is the plain clipped n-gram / LCS formulation over a fixed
tokenizer: lowercase, split on runs of non-alphanumeric characters, digits
kept, no stemming. Reported ROUGE values elsewhere in the package are the
f1 component.
"""

from __future__ import annotations

import io
import re
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .kernels import lcs_length

_TOKEN_RE = re.compile(r"[a-z0-9]+")

METRICS_CSV_COLUMNS = (
    "task",
    "strategy",
    "model",
    "accuracy",
    "precision",
    "recall",
    "f1",
    "rouge1",
    "rouge2",
    "rougeL",
)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on maximal runs of non-alphanumeric characters."""
    return _TOKEN_RE.findall(text.lower())


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_pr(cls, precision: float, recall: float) -> "RougeScore":
        return cls(precision, recall, _f1(precision, recall))


ZERO_ROUGE = RougeScore(0.0, 0.0, 0.0)


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    if len(tokens) < n:
        return Counter()
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: str, reference: str, n: int) -> RougeScore:
    """Clipped n-gram overlap ROUGE for n in {1, 2}.

    An empty candidate or reference side contributes 0 to the affected
    component rather than raising.
    """
    if n not in (1, 2):
        raise ValidationError(f"rouge_n supports n in {{1, 2}}, got {n}")
    cand = _ngram_counts(tokenize(candidate), n)
    ref = _ngram_counts(tokenize(reference), n)
    if not cand and not ref:
        return ZERO_ROUGE
    overlap = sum(min(count, ref[gram]) for gram, count in cand.items())
    n_cand = sum(cand.values())
    n_ref = sum(ref.values())
    precision = overlap / n_cand if n_cand else 0.0
    recall = overlap / n_ref if n_ref else 0.0
    return RougeScore.from_pr(precision, recall)


def rouge_l(candidate: str, reference: str) -> RougeScore:
    """LCS-based ROUGE over token sequences."""
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        return ZERO_ROUGE
    ids: dict[str, int] = {}
    a = np.array([ids.setdefault(t, len(ids)) for t in cand], dtype=np.int64)
    b = np.array([ids.setdefault(t, len(ids)) for t in ref], dtype=np.int64)
    lcs = lcs_length(a, b)
    return RougeScore.from_pr(lcs / len(cand), lcs / len(ref))


def score_against_references(candidate: str, references: list[str], scorer) -> float:
    """Arithmetic mean of scorer(candidate, ref) over the references."""
    if not references:
        raise ValidationError("at least one reference required")
    return sum(scorer(candidate, ref) for ref in references) / len(references)


SCORERS = {
    "rouge1-f1": lambda cand, ref: rouge_n(cand, ref, 1).f1,
    "rouge2-f1": lambda cand, ref: rouge_n(cand, ref, 2).f1,
    "rougeL-f1": lambda cand, ref: rouge_l(cand, ref).f1,
}


@dataclass(frozen=True)
class ClassificationReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    counts: tuple[int, int, int, int]  # (tp, fp, tn, fn)
    undefined: tuple[str, ...] = ()  # metrics reported as 0 because 0/0


def classification_report(
    predictions: list[str], golds: list[str], positive: str
) -> ClassificationReport:
    """Binary confusion counts plus accuracy / precision / recall / f1.

    Ratios with a zero denominator are reported as 0 and named in
    ``undefined``.
    """
    if len(predictions) != len(golds):
        raise ValidationError(
            f"length mismatch: {len(predictions)} predictions vs {len(golds)} golds"
        )
    if not golds:
        raise ValidationError("empty label lists")
    label_space = set(predictions) | set(golds)
    if len(label_space) > 2:
        raise ValidationError(f"expected a binary label space, got {sorted(label_space)}")
    tp = fp = tn = fn = 0
    for pred, gold in zip(predictions, golds):
        if pred == positive:
            if gold == positive:
                tp += 1
            else:
                fp += 1
        else:
            if gold == positive:
                fn += 1
            else:
                tn += 1
    total = tp + fp + tn + fn
    undefined = []
    accuracy = (tp + tn) / total
    if tp + fp == 0:
        precision = 0.0
        undefined.append("precision")
    else:
        precision = tp / (tp + fp)
    if tp + fn == 0:
        recall = 0.0
        undefined.append("recall")
    else:
        recall = tp / (tp + fn)
    if precision + recall == 0.0:
        f1 = 0.0
        if tp + fp == 0 or tp + fn == 0:
            undefined.append("f1")
    else:
        f1 = _f1(precision, recall)
    return ClassificationReport(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        counts=(tp, fp, tn, fn),
        undefined=tuple(undefined),
    )


def format_metrics_csv(rows: list[dict]) -> str:
    """Render report rows to the metrics.csv layout.

    Each row carries ``task``, ``strategy``, ``model`` plus whichever of the
    metric columns apply; missing metrics stay blank.
    """
    out = io.StringIO()
    out.write(",".join(METRICS_CSV_COLUMNS) + "\n")
    for row in rows:
        cells = []
        for col in METRICS_CSV_COLUMNS:
            value = row.get(col)
            if value is None:
                cells.append("")
            elif isinstance(value, float):
                cells.append(f"{value:.6f}")
            else:
                cells.append(str(value))
        out.write(",".join(cells) + "\n")
    return out.getvalue()
