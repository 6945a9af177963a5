"""Command-line entry point.

Subcommands: gen-data, embed, cluster, predict, prescribe, report, replay.
Every run writes a RunManifest (config snapshot, input hashes, seeds,
version, timestamps) before any backend call; `replay` re-executes a
manifest's argv and reproduces the artifacts byte-identically for mock
backends. All randomness flows from explicit --seed flags. Exit codes:
0 success, 1 validation/usage error, 2 backend failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .clustering import agglomerate, cut, project_2d, purity
from .embeddings import EmbeddingProviderConfig, EmbeddingVector, embed_batch
from .errors import (
    AuthError,
    BackendError,
    ConfigError,
    PharmaPipeError,
    ProtocolError,
    TransportError,
    ValidationError,
)
from .fewshot import SelectionStrategy
from .llm import CompletionParams, LiveBackend, MockBackend, MockScript
from .metrics import format_metrics_csv
from .optimizer import OptimizerConfig, trace_jsonl_lines
from .records import (
    diagnosis_category,
    generate_synthetic_cohort,
    parse_cohort,
    render_portrait,
    serialize_cohort,
)
from .tasks import (
    ExperimentConfig,
    MedplanRunResult,
    PredictionRunResult,
    reaggregate,
    run_medplan,
    run_prediction,
)

API_KEY_ENV = "PHARMAPIPE_API_KEY"


class _UsageError(Exception):
    def __init__(self, message: str, parser: argparse.ArgumentParser):
        super().__init__(message)
        self.parser = parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message, self)


# ---------------------------------------------------------------------------
# Manifest
# ---------------------------------------------------------------------------


def _sha256(path: Path) -> str:
    digest = hashlib.sha256(path.read_bytes()).hexdigest()
    return f"sha256:{digest}"


def write_manifest(
    manifest_path: Path,
    subcommand: str,
    argv: list[str],
    args: argparse.Namespace,
    input_paths: list[Path],
    seeds: dict,
) -> None:
    config = {
        key: (str(value) if isinstance(value, Path) else value)
        for key, value in vars(args).items()
        if not callable(value)
    }
    manifest = {
        "tool": "pharmapipe",
        "version": __version__,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "subcommand": subcommand,
        "argv": list(argv),
        "seeds": seeds,
        "inputs": {str(p): _sha256(p) for p in input_paths},
        "config": config,
    }
    manifest_path.parent.mkdir(parents=True, exist_ok=True)
    manifest_path.write_text(
        json.dumps(manifest, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


# ---------------------------------------------------------------------------
# Shared IO helpers
# ---------------------------------------------------------------------------


def _read_cohort(path: Path):
    return parse_cohort(path.read_text(encoding="utf-8"))


def write_vectors_jsonl(ids: list[str], vectors: list[EmbeddingVector]) -> str:
    lines = [
        json.dumps(
            {"id": pid, "dim": vec.dim, "values": [float(v) for v in vec.values]},
            ensure_ascii=False,
        )
        for pid, vec in zip(ids, vectors)
    ]
    return "\n".join(lines) + "\n"


def read_vectors_jsonl(text: str) -> dict[str, EmbeddingVector]:
    out: dict[str, EmbeddingVector] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            out[str(obj["id"])] = EmbeddingVector(
                values=np.asarray(obj["values"], dtype=np.float64),
                dim=int(obj["dim"]),
                source=str(obj.get("source", "file")),
            )
        except (KeyError, ValueError) as exc:
            raise ValidationError(f"vectors line {lineno}: {exc}") from None
    if not out:
        raise ValidationError("empty vectors file")
    return out


def _load_mock_script(path: Path) -> MockScript:
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"mock script {path}: invalid JSON: {exc.msg}") from None
    rules = tuple((str(p), str(r)) for p, r in obj.get("rules", []))
    return MockScript(rules=rules, default_response=str(obj.get("default_response", "")))


def _make_backend(args: argparse.Namespace):
    if args.backend == "mock":
        if not args.script:
            raise ValidationError("mock backend requires --script")
        return MockBackend(_load_mock_script(Path(args.script)))
    if not args.live:
        raise ValidationError("live backend requires the --live flag")
    if not args.base_url:
        raise ValidationError("live backend requires --base-url")
    return LiveBackend(
        base_url=args.base_url,
        api_key=os.environ.get(API_KEY_ENV),
        max_in_flight=args.jobs,
    )


# Run config file: flat `key = value` lines (# comments allowed) mapping the
# documented keys onto CLI flags. Explicit flags override config entries.
_CONFIG_KEY_FLAGS = {
    "strategy.kind": "--strategy",
    "strategy.k": "--k",
    "strategy.seed": "--seed",
    "split.seed": "--split-seed",
    "split.train_fraction": "--train-fraction",
    "llm.backend": "--backend",
    "llm.script": "--script",
    "llm.model_id": "--model",
    "llm.base_url": "--base-url",
    "llm.temperature": "--temperature",
    "llm.max_tokens": "--max-tokens",
    "optimizer.iterations": "--iterations",
    "optimizer.threshold": "--threshold",
    "optimizer.scorer": "--scorer",
}

_CONFIG_TASK_TO_PREDICT_ARG = {"mortality": "mortality", "apache_range": "apache", "apache": "apache"}


def parse_run_config(text: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValidationError(f"run config line {lineno}: expected 'key = value'")
        key, value = stripped.split("=", 1)
        entries[key.strip()] = value.strip()
    return entries


def _config_argv_prefix(entries: dict[str, str], subcommand: str) -> list[str]:
    tokens: list[str] = []
    for key, value in entries.items():
        if key == "task":
            continue  # handled per subcommand
        if key == "optimizer.enabled":
            if subcommand == "prescribe" and value.lower() in ("1", "true", "yes"):
                tokens.append("--optimize")
            continue
        flag = _CONFIG_KEY_FLAGS.get(key)
        if flag is None:
            raise ValidationError(f"unknown run config key: {key!r}")
        if subcommand != "prescribe" and flag in ("--iterations", "--threshold", "--scorer"):
            raise ValidationError(f"run config key {key!r} only applies to prescribe")
        tokens.extend([flag, value])
    return tokens


def _expand_config_argv(argv: list[str]) -> list[str]:
    """Splice run-config entries in as flags ahead of the user's flags, so
    explicit flags win by argparse last-occurrence rules.
    """
    if not argv or argv[0] not in ("predict", "prescribe"):
        return argv
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        return argv  # let argparse report the missing value
    config_path = Path(argv[idx + 1])
    entries = parse_run_config(config_path.read_text(encoding="utf-8"))
    prefix = _config_argv_prefix(entries, argv[0])
    head = [argv[0]]
    task = entries.get("task")
    if argv[0] == "predict":
        positional_given = len(argv) > 1 and not argv[1].startswith("-")
        if not positional_given:
            if task is None:
                raise ValidationError("predict needs a task (positional or config key 'task')")
            mapped = _CONFIG_TASK_TO_PREDICT_ARG.get(task)
            if mapped is None:
                raise ValidationError(f"run config task {task!r} is not a prediction task")
            head.append(mapped)
    elif task is not None and task != "medication_plan":
        raise ValidationError(f"prescribe runs task medication_plan, config says {task!r}")
    return head + prefix + argv[1:]


def _parse_mix(text: str) -> dict[str, float]:
    mix = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ValidationError(f"bad --mix entry {part!r}; expected CHAPTER=WEIGHT")
        key, value = part.split("=", 1)
        try:
            mix[key.strip()] = float(value)
        except ValueError:
            raise ValidationError(f"bad --mix weight in {part!r}") from None
    if not mix:
        raise ValidationError("--mix parsed to an empty mapping")
    return mix


# ---------------------------------------------------------------------------
# Subcommand implementations
# ---------------------------------------------------------------------------


def _cmd_gen_data(args, argv) -> int:
    out = Path(args.out)
    write_manifest(
        out.parent / (out.name + ".manifest.json"),
        "gen-data",
        argv,
        args,
        [],
        {"seed": args.seed},
    )
    mix = _parse_mix(args.mix) if args.mix else None
    cohort = generate_synthetic_cohort(
        seed=args.seed, n=args.n, category_mix=mix, mortality_prevalence=args.prevalence
    )
    out.write_text(serialize_cohort(cohort), encoding="utf-8")
    print(f"wrote {len(cohort)} records to {out}")
    return 0


def _cmd_embed(args, argv) -> int:
    cohort_path = Path(args.cohort)
    out = Path(args.out)
    cohort = _read_cohort(cohort_path)
    write_manifest(
        out.parent / (out.name + ".manifest.json"),
        "embed",
        argv,
        args,
        [cohort_path],
        {},
    )
    if args.provider == "remote" and not args.live:
        raise ValidationError("remote embedding provider requires the --live flag")
    config = EmbeddingProviderConfig(
        kind=args.provider,
        dim=args.dim,
        model_id=args.model,
        base_url=args.base_url,
        max_in_flight=args.max_in_flight,
        api_key=os.environ.get(API_KEY_ENV) if args.live else None,
    )
    portraits = [render_portrait(entry.record) for entry in cohort]
    vectors = embed_batch(portraits, config)
    out.write_text(write_vectors_jsonl(cohort.ids(), vectors), encoding="utf-8")
    print(f"embedded {len(vectors)} portraits (dim={args.dim}) to {out}")
    return 0


_SVG_COLORS = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


def _render_plot_svg(points, cluster_ids, categories) -> str:
    size, margin = 640.0, 40.0
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    span_x = (max(xs) - min(xs)) or 1.0
    span_y = (max(ys) - min(ys)) or 1.0
    category_order = sorted(set(categories))
    shape_of = {c: i % 4 for i, c in enumerate(category_order)}
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0f}" height="{size:.0f}" '
        f'viewBox="0 0 {size:.0f} {size:.0f}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    for (x, y), cid, cat in zip(points, cluster_ids, categories):
        px = margin + (x - min(xs)) / span_x * (size - 2 * margin)
        py = size - margin - (y - min(ys)) / span_y * (size - 2 * margin)
        color = _SVG_COLORS[cid % len(_SVG_COLORS)]
        shape = shape_of[cat]
        if shape == 0:
            parts.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="4" fill="{color}"/>')
        elif shape == 1:
            parts.append(
                f'<rect x="{px - 3.5:.2f}" y="{py - 3.5:.2f}" width="7" height="7" fill="{color}"/>'
            )
        elif shape == 2:
            parts.append(
                f'<path d="M {px:.2f} {py - 4.5:.2f} L {px - 4:.2f} {py + 3.5:.2f} '
                f'L {px + 4:.2f} {py + 3.5:.2f} Z" fill="{color}"/>'
            )
        else:
            parts.append(
                f'<path d="M {px:.2f} {py - 4.5:.2f} L {px + 4.5:.2f} {py:.2f} '
                f'L {px:.2f} {py + 4.5:.2f} L {px - 4.5:.2f} {py:.2f} Z" fill="{color}"/>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _cmd_cluster(args, argv) -> int:
    cohort_path, vectors_path, out = Path(args.cohort), Path(args.vectors), Path(args.out)
    cohort = _read_cohort(cohort_path)
    vector_map = read_vectors_jsonl(vectors_path.read_text(encoding="utf-8"))
    write_manifest(
        out.parent / (out.name + ".manifest.json"),
        "cluster",
        argv,
        args,
        [cohort_path, vectors_path],
        {"seed": args.seed},
    )
    ids = cohort.ids()
    missing = [pid for pid in ids if pid not in vector_map]
    if missing:
        raise ValidationError(f"vectors file missing ids: {missing[:5]}")
    vectors = [vector_map[pid] for pid in ids]
    dendrogram = agglomerate(vectors, linkage=args.linkage, metric=args.metric)
    assignment = cut(dendrogram, args.k)
    categories = [diagnosis_category(e.record.admission_diagnosis) for e in cohort]
    score = purity(assignment, categories)
    points = None
    if args.project != "none":
        points = project_2d(vectors, method=args.project, seed=args.seed).points
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["patient_id", "cluster_id", "category_label", "x", "y"])
    for i, pid in enumerate(ids):
        x = f"{points[i][0]:.6f}" if points else ""
        y = f"{points[i][1]:.6f}" if points else ""
        writer.writerow([pid, assignment.labels[i], categories[i], x, y])
    out.write_text(buf.getvalue(), encoding="utf-8")
    if args.plot:
        if points is None:
            raise ValidationError("--plot requires --project pca or tsne")
        Path(args.plot).write_text(
            _render_plot_svg(points, assignment.labels, categories), encoding="utf-8"
        )
    print(f"purity={score:.4f}")
    print(f"wrote {len(ids)} assignments to {out}")
    return 0


def _per_patient_rows(result) -> list[dict]:
    rows = []
    for log in result.per_patient:
        rows.append(
            {
                "patient_id": log.patient_id,
                "prompt_file": f"prompts/{log.patient_id}.json",
                "raw_response": log.raw_response,
                "parsed_label_or_rouge": log.parsed,
                "status": log.status,
                "task": result.report.task,
                "gold": log.gold,
            }
        )
    return rows


def _write_run_outputs(out_dir: Path, result, report_row: dict) -> None:
    prompts_dir = out_dir / "prompts"
    prompts_dir.mkdir(parents=True, exist_ok=True)
    for log in result.per_patient:
        (prompts_dir / f"{log.patient_id}.json").write_text(
            log.bundle.to_json() + "\n", encoding="utf-8"
        )
    rows = _per_patient_rows(result)
    with open(out_dir / "per_patient.jsonl", "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    (out_dir / "report.csv").write_text(format_metrics_csv([report_row]), encoding="utf-8")
    if isinstance(result, MedplanRunResult) and result.traces:
        with open(out_dir / "trace.jsonl", "w", encoding="utf-8") as fh:
            for trace in sorted(result.traces, key=lambda t: t.patient_id):
                for line in trace_jsonl_lines(trace):
                    fh.write(line + "\n")


def _experiment_config(args, task: str) -> ExperimentConfig:
    strategy = SelectionStrategy(kind=args.strategy, k=args.k, seed=args.seed)
    params = CompletionParams(
        model_id=args.model,
        temperature=args.temperature,
        max_tokens=args.max_tokens,
    )
    optimizer = None
    if task == "medication_plan" and args.optimize:
        optimizer = OptimizerConfig(
            iterations=args.iterations,
            threshold=args.threshold,
            scorer=args.scorer,
        )
    return ExperimentConfig(
        task=task,
        strategy=strategy,
        params=params,
        split_seed=args.split_seed,
        train_fraction=args.train_fraction,
        optimizer=optimizer,
        embedding=EmbeddingProviderConfig(kind="hashed", dim=args.embed_dim),
    )


def _cmd_predict(args, argv) -> int:
    if args.task is None:
        raise ValidationError("predict needs a task: mortality or apache")
    task = {"mortality": "mortality", "apache": "apache_range"}[args.task]
    cohort_path = Path(args.cohort)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cohort = _read_cohort(cohort_path)
    inputs = [cohort_path] + ([Path(args.script)] if args.script else [])
    if args.config:
        inputs.append(Path(args.config))
    write_manifest(
        out_dir / "run_manifest.json",
        "predict",
        argv,
        args,
        inputs,
        {"seed": args.seed, "split_seed": args.split_seed},
    )
    backend = _make_backend(args)
    config = _experiment_config(args, task)
    result: PredictionRunResult = run_prediction(config, cohort, backend, jobs=args.jobs)
    report = result.report
    row = {
        "task": task,
        "strategy": f"{config.strategy.kind}:{config.strategy.k}",
        "model": args.model,
        "accuracy": report.accuracy,
    }
    if report.classification is not None:
        row.update(
            precision=report.classification.precision,
            recall=report.classification.recall,
            f1=report.classification.f1,
        )
    _write_run_outputs(out_dir, result, row)
    print(
        f"task={task} n_test={report.n_test} accuracy={report.accuracy:.4f} "
        f"unparseable={report.n_unparseable} failed={report.n_failed}"
    )
    return 0


def _cmd_prescribe(args, argv) -> int:
    cohort_path = Path(args.cohort)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cohort = _read_cohort(cohort_path)
    inputs = [cohort_path] + ([Path(args.script)] if args.script else [])
    if args.config:
        inputs.append(Path(args.config))
    write_manifest(
        out_dir / "run_manifest.json",
        "prescribe",
        argv,
        args,
        inputs,
        {"seed": args.seed, "split_seed": args.split_seed},
    )
    backend = _make_backend(args)
    config = _experiment_config(args, "medication_plan")
    result = run_medplan(config, cohort, backend, jobs=args.jobs)
    report = result.report
    row = {
        "task": "medication_plan",
        "strategy": f"{config.strategy.kind}:{config.strategy.k}"
        + (":optimized" if config.optimizer else ""),
        "model": args.model,
        "rouge1": report.rouge1,
        "rouge2": report.rouge2,
        "rougeL": report.rougeL,
    }
    _write_run_outputs(out_dir, result, row)
    print(
        f"task=medication_plan n_test={report.n_test} rouge1={report.rouge1:.4f} "
        f"rouge2={report.rouge2:.4f} rougeL={report.rougeL:.4f} failed={report.n_failed}"
    )
    return 0


def _cmd_report(args, argv) -> int:
    per_patient = Path(args.per_patient)
    out = Path(args.out)
    rows = []
    for line in per_patient.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        rows.append(
            {
                "task": obj.get("task"),
                "status": obj["status"],
                "parsed": obj.get("parsed_label_or_rouge"),
                "gold": obj.get("gold"),
            }
        )
    write_manifest(
        out.parent / (out.name + ".manifest.json"),
        "report",
        argv,
        args,
        [per_patient],
        {},
    )
    row = reaggregate(rows)
    out.write_text(format_metrics_csv([row]), encoding="utf-8")
    print(f"re-aggregated {len(rows)} rows to {out}")
    return 0


def _cmd_replay(args, argv) -> int:
    manifest_path = Path(args.manifest)
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read manifest {manifest_path}: {exc}") from None
    for path_str, digest in manifest.get("inputs", {}).items():
        path = Path(path_str)
        if not path.exists():
            raise ValidationError(f"replay input missing: {path}")
        if _sha256(path) != digest:
            raise ValidationError(f"replay input changed since the run: {path}")
    stored_argv = manifest.get("argv")
    if not stored_argv:
        raise ValidationError("manifest has no argv to replay")
    print(f"replaying: pharmapipe {' '.join(stored_argv)}")
    return main(stored_argv)


# ---------------------------------------------------------------------------
# Argument wiring
# ---------------------------------------------------------------------------


def _add_backend_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--backend", choices=["mock", "live"], default="mock")
    p.add_argument("--script", help="mock script JSON (rules + default_response)")
    p.add_argument("--model", default="mock", help="model id sent to the backend")
    p.add_argument("--base-url", default="", help="chat-completions endpoint base URL")
    p.add_argument("--temperature", type=float, default=0.0)
    p.add_argument("--max-tokens", type=int, default=512)
    p.add_argument("--live", action="store_true", help="allow live API calls")
    p.add_argument("--jobs", type=int, default=4, help="bounded per-patient parallelism")


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cohort", required=True, help="patients.jsonl")
    p.add_argument("--config", help="run config file (flat key = value lines)")
    p.add_argument("--strategy", choices=["rand", "freq", "bcat", "sim"], default="rand")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--seed", type=int, default=0, help="selection strategy seed")
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--train-fraction", type=float, default=0.7)
    p.add_argument("--embed-dim", type=int, default=256, help="hashed embedding dim for sim_k")
    p.add_argument("--out-dir", required=True)
    _add_backend_flags(p)


def build_parser() -> _Parser:
    parser = _Parser(prog="pharmapipe", description=__doc__)
    parser.add_argument("--version", action="version", version=f"pharmapipe {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a seeded synthetic cohort")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mix", help='chapter mix, e.g. "I00-I99=2,G00-G99=1"')
    p.add_argument("--prevalence", type=float, default=0.10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_data)

    p = sub.add_parser("embed", help="embed patient portraits to a vectors file")
    p.add_argument("--cohort", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dim", type=int, default=256)
    p.add_argument("--provider", choices=["hashed", "remote"], default="hashed")
    p.add_argument("--model", default="text-embedding-ada-002")
    p.add_argument("--base-url", default="")
    p.add_argument("--max-in-flight", type=int, default=4)
    p.add_argument("--live", action="store_true")
    p.set_defaults(func=_cmd_embed)

    p = sub.add_parser("cluster", help="agglomerative clustering over a vectors file")
    p.add_argument("--cohort", required=True)
    p.add_argument("--vectors", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--linkage", choices=["single", "complete", "average", "ward"], default="average")
    p.add_argument("--metric", choices=["cosine_distance", "euclidean"], default="cosine_distance")
    p.add_argument("--project", choices=["none", "pca", "tsne"], default="none")
    p.add_argument("--seed", type=int, default=0, help="projection seed")
    p.add_argument("--out", required=True)
    p.add_argument("--plot", help="optional SVG scatter path")
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("predict", help="mortality or APACHE II range prediction")
    p.add_argument("task", nargs="?", choices=["mortality", "apache"])
    _add_experiment_flags(p)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("prescribe", help="24-hour medication plan generation")
    _add_experiment_flags(p)
    p.add_argument("--optimize", action="store_true", help="enable the iterative optimizer")
    p.add_argument("--iterations", type=int, default=4)
    p.add_argument("--threshold", type=float, default=0.20)
    p.add_argument("--scorer", default="rouge1-f1")
    p.set_defaults(func=_cmd_prescribe)

    p = sub.add_parser("report", help="re-aggregate per_patient.jsonl into report.csv")
    p.add_argument("--per-patient", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("replay", help="re-execute a run from its manifest")
    p.add_argument("manifest")
    p.set_defaults(func=_cmd_replay)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        expanded = _expand_config_argv(argv)
        args = parser.parse_args(expanded)
        return args.func(args, argv)
    except _UsageError as exc:
        exc.parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValidationError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (TransportError, AuthError, ProtocolError, BackendError) as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return 2
    except PharmaPipeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
