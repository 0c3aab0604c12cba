"""Command-line entry point.

    codeuq run            corpus -> report.jsonl + manifest.json + caches
    codeuq eval           report.jsonl -> evaluation summary JSON
    codeuq calibrate      report.jsonl -> abstention threshold JSON
    codeuq learn-weights  run dir -> fitted distance weights JSON
    codeuq sample         corpus tasks -> candidates.jsonl via an endpoint

Defaults mirror the reference configuration (K=10 candidates per task,
N=10 inputs, 200 ms timeout, weights 1.0,0.8,0.6, temperature 0.6), so the
zero-flag run is the standard setup.  Exit codes: 0 success, 2 partial
failures (some tasks errored, recorded in the report), 1 fatal config error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from . import __version__
from .clustering import partition
from .corpus import Corpus, load_corpus, load_report, write_corpus, write_report
from .evaluation import (
    calibrate_abstention,
    dsde_under_weights,
    learn_weights,
    summarize,
    weight_training_example,
)
from .executor import ExecConfig, ExecutionSignature, ReplayExecutor
from .fuzzgen import FuzzConfig
from .metrics import DEFAULT_WEIGHTS, DistanceWeights
from .pipeline import run_corpus
from .sampler import SamplerConfig, sample_candidates


@dataclass
class RunManifest:
    corpus_path: str
    fuzz_config: dict
    exec_config: dict
    weights: tuple[float, float, float]
    rng_seeds: list[int]
    version: str
    timings_s: dict

    def write(self, path: Path) -> None:
        path.write_text(json.dumps(asdict(self), indent=2) + "\n", encoding="utf-8")


def _parse_weights(text: str) -> DistanceWeights:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("weights must be three comma-separated reals")
    return DistanceWeights(*parts)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="codeuq",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the full pipeline over a corpus")
    run.add_argument("--corpus", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--n", type=int, default=10, help="fuzz inputs per task")
    run.add_argument("--k", type=int, default=10, help="expected candidates per task")
    run.add_argument("--timeout-ms", type=int, default=200)
    run.add_argument("--temperature", type=float, default=0.6, help="recorded in the manifest")
    run.add_argument("--weights", type=_parse_weights, default=DEFAULT_WEIGHTS)
    run.add_argument("--mode", choices=("seeded", "seed-free"), default="seeded")
    run.add_argument("--fuzz-seed", type=int, default=1)
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--shim", default=None, help="path to an execution shim")
    run.add_argument("--memory-cap-mb", type=int, default=None)
    run.add_argument(
        "--replay", default=None, help="recorded signatures JSON; skips live execution"
    )

    ev = sub.add_parser("eval", help="summarize predictive performance of a report")
    ev.add_argument("--report", required=True)
    ev.add_argument("--corpus", default=None, help="join difficulty for per-level breakdown")
    ev.add_argument("--out", default=None, help="write JSON here instead of stdout")

    cal = sub.add_parser("calibrate", help="fit an abstention threshold")
    cal.add_argument("--report", required=True)
    cal.add_argument("--metric", choices=("sde", "dsde", "sc_entropy"), default="dsde")
    cal.add_argument("--fpr-cap", type=float, default=0.05)
    cal.add_argument("--folds", type=int, default=5)
    cal.add_argument("--seed", type=int, default=0)
    cal.add_argument("--out", default=None)

    lw = sub.add_parser("learn-weights", help="fit distance weights on a run directory")
    lw.add_argument("--run-dir", required=True)
    lw.add_argument("--split-ratio", type=float, default=0.8)
    lw.add_argument("--split-seed", type=int, default=0)
    lw.add_argument("--out", default=None)

    sm = sub.add_parser("sample", help="sample candidates from an endpoint")
    sm.add_argument("--corpus", required=True)
    sm.add_argument("--endpoint", required=True)
    sm.add_argument("--model", required=True)
    sm.add_argument("--k", type=int, default=10)
    sm.add_argument("--temperature", type=float, default=0.6)
    sm.add_argument("--api-key-env", default="CODEUQ_API_KEY")
    sm.add_argument("--archive", default=None)

    return parser


def _metric_key(name: str) -> str:
    return {"sde": "sde", "dsde": "dsde", "sc_entropy": "baseline_sc_entropy"}[name]


def cmd_run(args) -> int:
    try:
        corpus = load_corpus(args.corpus)
        fuzz_config = FuzzConfig(n_inputs=args.n, mode=args.mode, rng_seed=args.fuzz_seed)
        exec_config = ExecConfig(
            timeout_ms_per_input=args.timeout_ms,
            max_parallel_workers=args.jobs,
            memory_cap_mb=args.memory_cap_mb,
            shim_path=Path(args.shim) if args.shim else None,
        )
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    executor = None
    if args.replay:
        executor = ReplayExecutor.from_file(args.replay)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    output = run_corpus(
        corpus, fuzz_config, args.weights, exec_config=exec_config, executor=executor
    )
    wall = time.perf_counter() - started

    (out_dir / "inputs").mkdir(exist_ok=True)
    (out_dir / "signatures").mkdir(exist_ok=True)
    for result in output.results:
        if result.error is not None:
            continue
        inputs_path = out_dir / "inputs" / f"{result.task_id}.json"
        inputs_path.write_text(
            json.dumps([iv.to_json() for iv in result.inputs]) + "\n", encoding="utf-8"
        )
        ReplayExecutor.record(
            result.signatures + result.ref_signatures,
            out_dir / "signatures" / f"{result.task_id}.json",
        )

    write_report(output.rows, out_dir / "report.jsonl")
    manifest = RunManifest(
        corpus_path=str(args.corpus),
        fuzz_config={
            "n_inputs": fuzz_config.n_inputs,
            "mode": fuzz_config.mode,
            "rng_seed": fuzz_config.rng_seed,
            "numeric_magnitude_cap": fuzz_config.numeric_magnitude_cap,
            "max_collection_len": fuzz_config.max_collection_len,
        },
        exec_config={
            "timeout_ms_per_input": exec_config.timeout_ms_per_input,
            "max_parallel_workers": exec_config.max_parallel_workers,
            "memory_cap_mb": exec_config.memory_cap_mb,
            "shim_path": str(exec_config.shim_path) if exec_config.shim_path else None,
            "k_expected": args.k,
            "sampling_temperature": args.temperature,
        },
        weights=args.weights.as_tuple(),
        rng_seeds=[args.fuzz_seed],
        version=__version__,
        timings_s={
            "sampling": 0.0,
            "fuzzing": output.timings.fuzzing_s,
            "execution": output.timings.execution_s,
            "metric": output.timings.metric_s,
            "wall": wall,
        },
    )
    manifest.write(out_dir / "manifest.json")
    return 2 if output.had_failures else 0


def _rows_with_targets(rows):
    usable = [
        r
        for r in rows
        if "error" not in r and r.get("pass1") is not None and r.get("partial_pass1") is not None
    ]
    return usable


def cmd_eval(args) -> int:
    rows = load_report(args.report)
    usable = _rows_with_targets(rows)
    if not usable:
        print("error: report has no rows with correctness targets", file=sys.stderr)
        return 1
    difficulties = None
    if args.corpus:
        corpus = load_corpus(args.corpus)
        by_id = {t.task_id: t.difficulty for t in corpus.tasks}
        difficulties = [by_id.get(r["task_id"], "Unknown") for r in usable]
    pass1 = [bool(r["pass1"]) for r in usable]
    partial = [float(r["partial_pass1"]) for r in usable]
    summary = {
        "n_tasks": len(usable),
        "metrics": {
            name: summarize(
                [float(r[_metric_key(name)]) for r in usable], pass1, partial, difficulties
            ).to_json()
            for name in ("sde", "dsde", "sc_entropy")
        },
    }
    _emit(summary, args.out)
    return 0


def cmd_calibrate(args) -> int:
    rows = load_report(args.report)
    usable = _rows_with_targets(rows)
    if not usable:
        print("error: report has no rows with correctness targets", file=sys.stderr)
        return 1
    scores = [float(r[_metric_key(args.metric)]) for r in usable]
    pass1 = [bool(r["pass1"]) for r in usable]
    report = calibrate_abstention(scores, pass1, args.fpr_cap, args.folds, args.seed)
    out = {"metric": args.metric, **report.to_json()}
    _emit(out, args.out)
    return 0


def _load_run_examples(run_dir: Path):
    rows = load_report(run_dir / "report.jsonl")
    examples = []
    for row in _rows_with_targets(rows):
        task_id = row["task_id"]
        sig_path = run_dir / "signatures" / f"{task_id}.json"
        inputs_path = run_dir / "inputs" / f"{task_id}.json"
        if not sig_path.exists() or not inputs_path.exists():
            continue
        n_inputs = len(json.loads(inputs_path.read_text(encoding="utf-8")))
        with open(sig_path, encoding="utf-8") as fh:
            recorded = [ExecutionSignature.from_json(o) for o in json.load(fh)]
        # the cache also holds reference-test recordings; keep the fuzz set
        signatures = [s for s in recorded if len(s.outcomes) == n_inputs]
        examples.append(
            weight_training_example(partition(signatures), float(row["partial_pass1"]))
        )
    return examples


def cmd_learn_weights(args) -> int:
    run_dir = Path(args.run_dir)
    examples = _load_run_examples(run_dir)
    if len(examples) < 2:
        print("error: need at least two tasks with signatures and targets", file=sys.stderr)
        return 1
    import random

    order = list(range(len(examples)))
    random.Random(args.split_seed).shuffle(order)
    cut = max(1, int(len(order) * args.split_ratio))
    train = [examples[i] for i in order[:cut]]
    test = [examples[i] for i in order[cut:]]

    learned = learn_weights(train)

    def _test_auroc(weights):
        from .evaluation import auroc

        if not test:
            return None
        labels = [ex.failed for ex in test]
        if all(labels) or not any(labels):
            return None
        return auroc([dsde_under_weights(ex, weights) for ex in test], labels)

    out = {
        "learned": learned.as_tuple(),
        "default": DEFAULT_WEIGHTS.as_tuple(),
        "n_train": len(train),
        "n_test": len(test),
        "test_auroc_learned": _test_auroc(learned),
        "test_auroc_default": _test_auroc(DEFAULT_WEIGHTS),
    }
    _emit(out, args.out)
    return 0


def cmd_sample(args) -> int:
    corpus = load_corpus(args.corpus)
    config = SamplerConfig(
        endpoint_url=args.endpoint,
        model_name=args.model,
        temperature=args.temperature,
        k_samples=args.k,
        api_key_env_var=args.api_key_env,
    )
    candidates = []
    for task in corpus.tasks:
        candidates.extend(sample_candidates(task, config, archive_dir=args.archive))
    write_corpus(Corpus(tasks=corpus.tasks, candidates=candidates), args.corpus)
    print(f"sampled {len(candidates)} candidates over {len(corpus.tasks)} tasks")
    return 0


def _emit(obj, out_path: str | None) -> None:
    text = json.dumps(obj, indent=2)
    if out_path:
        Path(out_path).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "run": cmd_run,
        "eval": cmd_eval,
        "calibrate": cmd_calibrate,
        "learn-weights": cmd_learn_weights,
        "sample": cmd_sample,
    }
    try:
        return handlers[args.command](args)
    except Exception as exc:  # fatal configuration / IO problems
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
