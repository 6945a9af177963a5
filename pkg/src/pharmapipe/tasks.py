"""Experiment runners for the three studies: hospital mortality prediction,
APACHE II range prediction, and 24-hour medication-plan generation.

Metrics for prediction tasks are computed over non-failed patients:
unparseable responses count as incorrect (never dropped), backend failures
are excluded from metric denominators and reported as a failure count. The
binary confusion counts cover the parseable subset only.
"""

from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .embeddings import EmbeddingProviderConfig, EmbeddingVector, embed_batch
from .errors import BackendError, ConfigError, PharmaPipeError, ValidationError
from .fewshot import (
    PromptBundle,
    SelectionStrategy,
    build_prompt,
    select_examples,
)
from .llm import CompletionParams
from .metrics import (
    ClassificationReport,
    classification_report,
    rouge_l,
    rouge_n,
)
from .optimizer import OptimizationTrace, OptimizerConfig, optimize
from .records import (
    Cohort,
    CohortEntry,
    MedicationOrder,
    PatientOutcomes,
    PatientRecord,
    render_portrait,
)

UNPARSEABLE = "unparseable"
POSITIVE_LABEL = "deceased"
NEGATIVE_LABEL = "survived"

_MORTALITY_POSITIVE = ("deceased", "expired", "died", "will not survive", "mortality: yes")
_MORTALITY_NEGATIVE = ("survive", "alive", "discharged")
_RANGE_RE = re.compile(r"(\d+)\s*-\s*(\d+)")


@dataclass(frozen=True)
class ApacheBin:
    lower: int
    upper: int
    label: str

    def __post_init__(self):
        if self.lower % 5 != 0 or not (0 <= self.lower <= 70):
            raise ValidationError(f"bin lower bound must be a multiple of 5 in [0, 70]")
        if self.upper != min(self.lower + 4, 71):
            raise ValidationError("bin upper bound must be min(lower+4, 71)")


def bin_apache(score: int) -> ApacheBin:
    """Width-5 bin containing an APACHE II score (0-71)."""
    if not (0 <= score <= 71):
        raise ValidationError(f"APACHE II score out of range [0, 71]: {score}")
    lower = (score // 5) * 5
    lower = min(lower, 70)
    upper = min(lower + 4, 71)
    return ApacheBin(lower=lower, upper=upper, label=f"{lower}-{upper}")


@dataclass(frozen=True)
class ExperimentConfig:
    task: str  # mortality | apache_range | medication_plan
    strategy: SelectionStrategy = SelectionStrategy()
    params: CompletionParams = CompletionParams()
    split_seed: int = 0
    train_fraction: float = 0.7
    optimizer: OptimizerConfig | None = None
    embedding: EmbeddingProviderConfig = EmbeddingProviderConfig(kind="hashed", dim=256)

    def __post_init__(self):
        if self.task not in ("mortality", "apache_range", "medication_plan"):
            raise ConfigError(f"unknown task: {self.task!r}")
        if not (0.0 < self.train_fraction < 1.0):
            raise ConfigError("train_fraction must be in (0, 1)")
        if self.optimizer is not None and self.task != "medication_plan":
            raise ConfigError("optimizer is only valid for the medication_plan task")


def split_cohort(cohort: Cohort, seed: int, train_fraction: float = 0.7) -> tuple[Cohort, Cohort]:
    """Seeded shuffle-then-split; disjoint and exhaustive, both halves non-empty."""
    if len(cohort) < 2:
        raise ValidationError("cohort must have at least 2 records to split")
    if not (0.0 < train_fraction < 1.0):
        raise ValidationError("train_fraction must be in (0, 1)")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(cohort))
    n_train = int(round(len(cohort) * train_fraction))
    n_train = max(1, min(n_train, len(cohort) - 1))
    entries = list(cohort.entries)
    train = tuple(entries[i] for i in order[:n_train])
    test = tuple(entries[i] for i in order[n_train:])
    return (
        Cohort(entries=train, provenance=cohort.provenance),
        Cohort(entries=test, provenance=cohort.provenance),
    )


# ---------------------------------------------------------------------------
# Answer rendering and response parsing
# ---------------------------------------------------------------------------


def render_mortality_answer(outcomes: PatientOutcomes) -> str:
    return POSITIVE_LABEL if outcomes.mortality else NEGATIVE_LABEL


def render_apache_answer(record: PatientRecord) -> str:
    if record.apache_ii is None:
        raise ValidationError(f"patient {record.id} has no APACHE II score")
    return f"APACHE II range {bin_apache(record.apache_ii).label}"


def render_medication_plan(meds: tuple[MedicationOrder, ...]) -> str:
    """Canonical 24-hour plan: one lowercased order per line, alphabetized by
    drug so ROUGE is insensitive to MAR ordering. Empty plans render empty.
    """
    lines = sorted(
        f"{m.drug} {m.dose:g} {m.unit} {m.route} {m.frequency}".lower()
        for m in meds
    )
    return "\n".join(lines)


def parse_label(response: str, task: str) -> str:
    """Map free-text model output to a task label, or ``"unparseable"``.

    Mortality: earliest case-insensitive keyword occurrence wins (positive
    phrases checked against negative by position, so "will not survive"
    beats its embedded "survive"). APACHE: the first L-U digit range maps to
    the bin containing its lower bound.
    """
    if task == "mortality":
        text = response.lower()
        hits = []
        for phrase in _MORTALITY_POSITIVE:
            idx = text.find(phrase)
            if idx >= 0:
                hits.append((idx, 0, POSITIVE_LABEL))
        for phrase in _MORTALITY_NEGATIVE:
            idx = text.find(phrase)
            if idx >= 0:
                hits.append((idx, 1, NEGATIVE_LABEL))
        if not hits:
            return UNPARSEABLE
        return min(hits)[2]
    if task == "apache_range":
        match = _RANGE_RE.search(response)
        if not match:
            return UNPARSEABLE
        lower = int(match.group(1))
        if not (0 <= lower <= 71):
            return UNPARSEABLE
        return bin_apache(lower).label
    raise ConfigError(f"parse_label does not apply to task {task!r}")


# ---------------------------------------------------------------------------
# Run results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PatientLog:
    patient_id: str
    bundle: PromptBundle
    status: str  # ok | unparseable | failed
    raw_response: str | None = None
    parsed: object = None  # label str, or rouge f1 dict for medication plans
    gold: str | None = None
    error: str | None = None

    def demo_source_ids(self) -> list[str]:
        return [d.source_id for d in self.bundle.demonstrations]


@dataclass(frozen=True)
class PredictionReport:
    task: str
    n_test: int
    n_failed: int
    n_unparseable: int
    accuracy: float  # unparseables count as incorrect; failures excluded
    classification: ClassificationReport | None = None  # parseable subset, mortality only


@dataclass(frozen=True)
class MedplanReport:
    task: str
    n_test: int
    n_failed: int
    rouge1: float
    rouge2: float
    rougeL: float
    optimizer_enabled: bool


@dataclass(frozen=True)
class PredictionRunResult:
    report: PredictionReport
    per_patient: tuple[PatientLog, ...]
    test_ids: tuple[str, ...]


@dataclass(frozen=True)
class MedplanRunResult:
    report: MedplanReport
    per_patient: tuple[PatientLog, ...]
    traces: tuple[OptimizationTrace, ...]
    test_ids: tuple[str, ...]


# ---------------------------------------------------------------------------
# Runners
# ---------------------------------------------------------------------------


def _pool_and_embeddings(
    config: ExperimentConfig,
    train: Cohort,
    test: Cohort,
    answer_fn,
) -> tuple[list[tuple[PatientRecord, str]], dict[str, EmbeddingVector] | None]:
    pool = [(entry.record, answer_fn(entry)) for entry in train]
    embeddings = None
    if config.strategy.kind == "sim_k":
        records = [entry.record for entry in train] + [entry.record for entry in test]
        portraits = [render_portrait(r) for r in records]
        vectors = embed_batch(portraits, config.embedding)
        embeddings = {r.id: v for r, v in zip(records, vectors)}
    return pool, embeddings


def _map_patients(work, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [work(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(work, items))


def run_prediction(
    config: ExperimentConfig, cohort: Cohort, backend, jobs: int = 1
) -> PredictionRunResult:
    """Select demonstrations, prompt, parse, and score one prediction task."""
    if config.task not in ("mortality", "apache_range"):
        raise ConfigError(f"run_prediction does not handle task {config.task!r}")
    train, test = split_cohort(cohort, config.split_seed, config.train_fraction)
    if config.task == "apache_range":
        # Patients without an APACHE II score can be neither demonstrated nor scored.
        train_entries = tuple(e for e in train if e.record.apache_ii is not None)
        test_entries = tuple(e for e in test if e.record.apache_ii is not None)
        if not train_entries or not test_entries:
            raise ValidationError("apache_range requires APACHE II scores in both splits")
        train = Cohort(entries=train_entries, provenance=train.provenance)
        test = Cohort(entries=test_entries, provenance=test.provenance)
    if config.task == "mortality":
        answer_fn = lambda entry: render_mortality_answer(entry.outcomes)
        gold_fn = answer_fn
    else:
        answer_fn = lambda entry: render_apache_answer(entry.record)
        gold_fn = lambda entry: bin_apache(entry.record.apache_ii).label
    pool, embeddings = _pool_and_embeddings(config, train, test, answer_fn)

    def work(entry: CohortEntry) -> PatientLog:
        record = entry.record
        demos = select_examples(config.strategy, pool, record, embeddings)
        bundle = build_prompt(config.task, demos, record)
        gold = gold_fn(entry)
        try:
            response = backend.complete(bundle.as_transcript(), config.params)
        except PharmaPipeError as exc:
            return PatientLog(
                patient_id=record.id,
                bundle=bundle,
                status="failed",
                gold=gold,
                error=str(exc),
            )
        label = parse_label(response, config.task)
        status = "ok" if label != UNPARSEABLE else UNPARSEABLE
        return PatientLog(
            patient_id=record.id,
            bundle=bundle,
            status=status,
            raw_response=response,
            parsed=label,
            gold=gold,
        )

    logs = _map_patients(work, list(test), jobs)
    report = _aggregate_prediction(config.task, logs)
    return PredictionRunResult(
        report=report,
        per_patient=tuple(logs),
        test_ids=tuple(test.ids()),
    )


def _aggregate_prediction(task: str, logs: list[PatientLog]) -> PredictionReport:
    if not logs:
        raise ValidationError("empty test set")
    n_failed = sum(1 for log in logs if log.status == "failed")
    n_unparseable = sum(1 for log in logs if log.status == UNPARSEABLE)
    attempted = [log for log in logs if log.status != "failed"]
    if not attempted:
        raise BackendError("every patient failed at the backend; no metrics to report")
    correct = sum(1 for log in attempted if log.parsed == log.gold)
    accuracy = correct / len(attempted)
    classification = None
    if task == "mortality":
        parsed = [log for log in attempted if log.status == "ok"]
        if parsed:
            classification = classification_report(
                [log.parsed for log in parsed],
                [log.gold for log in parsed],
                positive=POSITIVE_LABEL,
            )
    return PredictionReport(
        task=task,
        n_test=len(logs),
        n_failed=n_failed,
        n_unparseable=n_unparseable,
        accuracy=accuracy,
        classification=classification,
    )


def run_medplan(
    config: ExperimentConfig, cohort: Cohort, backend, jobs: int = 1
) -> MedplanRunResult:
    """Generate 24-hour medication plans, single-shot or optimizer-driven,
    scored by mean ROUGE-1/2/L f1 against the canonical MAR rendering.
    """
    if config.task != "medication_plan":
        raise ConfigError(f"run_medplan does not handle task {config.task!r}")
    train, test = split_cohort(cohort, config.split_seed, config.train_fraction)
    answer_fn = lambda entry: render_medication_plan(entry.meds)
    pool, embeddings = _pool_and_embeddings(config, train, test, answer_fn)

    def work(entry: CohortEntry) -> tuple[PatientLog, OptimizationTrace | None]:
        record = entry.record
        demos = select_examples(config.strategy, pool, record, embeddings)
        bundle = build_prompt(config.task, demos, record)
        reference = render_medication_plan(entry.meds)
        if config.optimizer is not None:
            trace = optimize(
                record.id, [reference], bundle, config.optimizer, backend, config.params
            )
            if trace.error is not None and not trace.steps:
                log = PatientLog(
                    patient_id=record.id,
                    bundle=bundle,
                    status="failed",
                    gold=reference,
                    error=trace.error,
                )
                return log, trace
            response = trace.best_output
        else:
            trace = None
            try:
                response = backend.complete(bundle.as_transcript(), config.params)
            except PharmaPipeError as exc:
                log = PatientLog(
                    patient_id=record.id,
                    bundle=bundle,
                    status="failed",
                    gold=reference,
                    error=str(exc),
                )
                return log, None
        scores = {
            "rouge1": rouge_n(response, reference, 1).f1,
            "rouge2": rouge_n(response, reference, 2).f1,
            "rougeL": rouge_l(response, reference).f1,
        }
        log = PatientLog(
            patient_id=record.id,
            bundle=bundle,
            status="ok",
            raw_response=response,
            parsed=scores,
            gold=reference,
        )
        return log, trace

    results = _map_patients(work, list(test), jobs)
    logs = [log for log, _ in results]
    traces = tuple(trace for _, trace in results if trace is not None)
    scored = [log for log in logs if log.status == "ok"]
    if not scored:
        raise BackendError("every patient failed at the backend; no metrics to report")
    report = MedplanReport(
        task=config.task,
        n_test=len(logs),
        n_failed=sum(1 for log in logs if log.status == "failed"),
        rouge1=sum(log.parsed["rouge1"] for log in scored) / len(scored),
        rouge2=sum(log.parsed["rouge2"] for log in scored) / len(scored),
        rougeL=sum(log.parsed["rougeL"] for log in scored) / len(scored),
        optimizer_enabled=config.optimizer is not None,
    )
    return MedplanRunResult(
        report=report,
        per_patient=tuple(logs),
        traces=traces,
        test_ids=tuple(test.ids()),
    )


# ---------------------------------------------------------------------------
# Re-aggregation from per-patient rows (the `report` CLI subcommand)
# ---------------------------------------------------------------------------


def reaggregate(rows: list[dict]) -> dict:
    """Recompute the report.csv metric row from per_patient.jsonl rows.

    Rows must share one task and carry status, parsed, and gold fields.
    """
    if not rows:
        raise ValidationError("no per-patient rows to aggregate")
    tasks = {row.get("task") for row in rows}
    if len(tasks) != 1:
        raise ValidationError(f"rows mix tasks: {sorted(t or '?' for t in tasks)}")
    task = tasks.pop()
    attempted = [row for row in rows if row["status"] != "failed"]
    if not attempted:
        raise ValidationError("all rows failed")
    if task == "medication_plan":
        return {
            "task": task,
            "rouge1": sum(r["parsed"]["rouge1"] for r in attempted) / len(attempted),
            "rouge2": sum(r["parsed"]["rouge2"] for r in attempted) / len(attempted),
            "rougeL": sum(r["parsed"]["rougeL"] for r in attempted) / len(attempted),
        }
    accuracy = sum(1 for r in attempted if r["parsed"] == r["gold"]) / len(attempted)
    row = {"task": task, "accuracy": accuracy}
    if task == "mortality":
        parsed = [r for r in attempted if r["status"] == "ok"]
        if parsed:
            rep = classification_report(
                [r["parsed"] for r in parsed],
                [r["gold"] for r in parsed],
                positive=POSITIVE_LABEL,
            )
            row.update(precision=rep.precision, recall=rep.recall, f1=rep.f1)
    return row
