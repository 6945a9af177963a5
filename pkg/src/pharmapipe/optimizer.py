"""Iterative prompt-optimization loop.

Each iteration sends a prompt, scores the output against the references
(mean over references), and branches: score strictly above the threshold
merges the previous output back in encouragingly (``iter_good``), otherwise
discouragingly (``iter_bad``). Merging always starts from the ORIGINAL
dynamic prompt, not the previous merged prompt. The best-scoring output
across iterations is returned; the full trace preserves everything else.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import PharmaPipeError, ValidationError
from .fewshot import PromptBundle
from .llm import CompletionParams
from .metrics import SCORERS, score_against_references

GOOD_MERGE_TEMPLATE = (
    "A previous response of good quality was:\n{output}\n"
    "Produce a response of similar style and content, improving completeness."
)

BAD_MERGE_TEMPLATE = (
    "A previous response of poor quality was:\n{output}\n"
    "Avoid this style and content; produce a substantially different and "
    "more clinically complete response."
)


@dataclass(frozen=True)
class OptimizerConfig:
    iterations: int = 4
    threshold: float = 0.20
    scorer: str = "rouge1-f1"
    good_template: str = GOOD_MERGE_TEMPLATE
    bad_template: str = BAD_MERGE_TEMPLATE

    def __post_init__(self):
        if self.iterations < 1:
            raise ValidationError("iterations must be >= 1")
        if not (0.0 <= self.threshold <= 1.0):
            raise ValidationError("threshold must be in [0, 1]")
        if isinstance(self.scorer, str) and self.scorer not in SCORERS:
            raise ValidationError(
                f"unknown scorer {self.scorer!r}; known: {sorted(SCORERS)}"
            )


@dataclass(frozen=True)
class OptimizationStep:
    iteration: int
    prompt_kind: str  # dynamic | iter_good | iter_bad
    prompt_text: str
    output_text: str
    score: float


@dataclass(frozen=True)
class OptimizationTrace:
    steps: tuple[OptimizationStep, ...]
    best_output: str
    best_score: float
    patient_id: str = ""
    error: str | None = None


def _append_block(bundle: PromptBundle, block: str) -> PromptBundle:
    return PromptBundle(
        system_text=bundle.system_text,
        demonstrations=bundle.demonstrations,
        query_portrait=bundle.query_portrait,
        task_question=f"{bundle.task_question}\n\n{block}",
    )


def merge_good(
    base_prompt: PromptBundle, output: str, template: str = GOOD_MERGE_TEMPLATE
) -> PromptBundle:
    """Append the encourage-repetition block for a good previous output."""
    if not output:
        raise ValidationError("cannot merge an empty output")
    return _append_block(base_prompt, template.format(output=output))


def merge_bad(
    base_prompt: PromptBundle, output: str, template: str = BAD_MERGE_TEMPLATE
) -> PromptBundle:
    """Append the avoid-repetition block for a poor previous output."""
    if not output:
        raise ValidationError("cannot merge an empty output")
    return _append_block(base_prompt, template.format(output=output))


def _resolve_scorer(scorer):
    if callable(scorer):
        return scorer
    return SCORERS[scorer]


def optimize(
    query_id: str,
    references: list[str],
    dynamic_prompt: PromptBundle,
    config: OptimizerConfig,
    backend,
    params: CompletionParams | None = None,
) -> OptimizationTrace:
    """Run the feedback loop for one patient: exactly ``iterations`` backend
    calls on success; on a backend error the trace is truncated at the
    failing step with the error recorded.
    """
    if not references:
        raise ValidationError("references must be non-empty")
    scorer = _resolve_scorer(config.scorer)
    params = params or CompletionParams()
    steps: list[OptimizationStep] = []
    error: str | None = None
    prev_output = ""
    prev_score = 0.0
    for it in range(config.iterations):
        if it == 0:
            kind = "dynamic"
            prompt = dynamic_prompt
        elif prev_score > config.threshold:
            kind = "iter_good"
            prompt = merge_good(dynamic_prompt, prev_output, config.good_template)
        else:
            kind = "iter_bad"
            prompt = merge_bad(dynamic_prompt, prev_output, config.bad_template)
        try:
            output = backend.complete(prompt.as_transcript(), params)
        except PharmaPipeError as exc:
            error = f"iteration {it}: {exc}"
            break
        score = score_against_references(output, references, scorer)
        steps.append(
            OptimizationStep(
                iteration=it,
                prompt_kind=kind,
                prompt_text=prompt.rendered_text(),
                output_text=output,
                score=score,
            )
        )
        prev_output = output
        prev_score = score
    if steps:
        best = max(steps, key=lambda s: s.score)
        first_best = next(s for s in steps if s.score == best.score)
        best_output, best_score = first_best.output_text, first_best.score
    else:
        best_output, best_score = "", 0.0
    return OptimizationTrace(
        steps=tuple(steps),
        best_output=best_output,
        best_score=best_score,
        patient_id=query_id,
        error=error,
    )


def trace_jsonl_lines(trace: OptimizationTrace) -> list[str]:
    """One trace.jsonl line per step."""
    return [
        json.dumps(
            {
                "patient_id": trace.patient_id,
                "iter": step.iteration,
                "prompt_kind": step.prompt_kind,
                "score": step.score,
                "output": step.output_text,
            },
            ensure_ascii=False,
        )
        for step in trace.steps
    ]
