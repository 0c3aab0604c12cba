"""End-to-end per-task pipeline: fuzz inputs, execute, cluster, score.

This is the library-level engine behind the CLI: given a corpus it produces
report rows, per-stage wall-clock timings and replayable caches (generated
inputs and execution signatures).  Any object with a
run(task, candidates, inputs) method works as the executor, so recorded
signatures can stand in for live subprocesses.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .clustering import ClusterPartition, partition
from .corpus import CandidateProgram, Corpus, InputValue, Task, report_row
from .evaluation import CorrectnessTargets, correctness
from .executor import (
    ExecConfig,
    ExecutionSignature,
    InputQuality,
    SubprocessExecutor,
    diagnostics,
)
from .fuzzgen import FuzzConfig, generate_inputs
from .metrics import DistanceWeights, UncertaintyScores, score_task


@dataclass
class StageTimings:
    fuzzing_s: float = 0.0
    execution_s: float = 0.0
    metric_s: float = 0.0

    def add(self, other: "StageTimings") -> None:
        self.fuzzing_s += other.fuzzing_s
        self.execution_s += other.execution_s
        self.metric_s += other.metric_s


@dataclass
class TaskResult:
    task_id: str
    inputs: list[InputValue] = field(default_factory=list)
    signatures: list[ExecutionSignature] = field(default_factory=list)
    partition: ClusterPartition | None = None
    scores: UncertaintyScores | None = None
    quality: InputQuality | None = None
    targets: CorrectnessTargets | None = None
    ref_signatures: list[ExecutionSignature] = field(default_factory=list)
    inputs_complete: bool = True
    timings: StageTimings = field(default_factory=StageTimings)
    error: str | None = None  # set when the task failed; row is flagged

    @property
    def flagged(self) -> bool:
        """True when the task produced no behavioural signal at all (every
        cell crashed, e.g. no candidate parsed); metrics are still defined
        but the row is marked and the run reports a partial failure."""
        return self.quality is not None and self.quality.valid_exec_rate == 0.0

    def to_report_row(self) -> dict:
        if self.error is not None:
            return {"task_id": self.task_id, "error": self.error}
        diag = self.quality.to_json()
        if not self.inputs_complete:
            diag["inputs_incomplete"] = True
        if self.flagged:
            diag["no_valid_executions"] = True
        return report_row(
            task_id=self.task_id,
            sde=self.scores.sde,
            dsde=self.scores.dsde,
            sc_entropy=self.scores.sc_entropy,
            cluster_sizes=self.partition.sizes,
            dominant_index=self.partition.dominant_index,
            pass1=self.targets.pass1 if self.targets else None,
            partial_pass1=self.targets.partial_pass1 if self.targets else None,
            diagnostics=diag,
        )


def run_task(
    task: Task,
    candidates: list[CandidateProgram],
    fuzz_config: FuzzConfig,
    weights: DistanceWeights,
    executor,
    inputs: list[InputValue] | None = None,
) -> TaskResult:
    """Run stages 2-4 for one task; exceptions land in result.error."""
    result = TaskResult(task_id=task.task_id)
    try:
        t0 = time.perf_counter()
        if inputs is None:
            generated = generate_inputs(task, fuzz_config)
            inputs = generated.values
            result.inputs_complete = generated.complete
        result.inputs = inputs
        t1 = time.perf_counter()
        result.timings.fuzzing_s = t1 - t0

        result.signatures = executor.run(task, candidates, inputs)
        t2 = time.perf_counter()
        result.timings.execution_s = t2 - t1

        result.partition = partition(result.signatures)
        result.scores = score_task(result.partition, weights)
        result.quality = diagnostics(result.signatures, inputs)
        result.timings.metric_s = time.perf_counter() - t2

        if task.reference_tests:
            t3 = time.perf_counter()
            result.targets, result.ref_signatures = _reference_correctness(
                task, candidates, executor
            )
            result.timings.execution_s += time.perf_counter() - t3
    except Exception as exc:  # per-task isolation: record, keep going
        result.error = f"{type(exc).__name__}: {exc}"
    return result


def _reference_correctness(task, candidates, executor):
    """Execute the rank-1 candidate on the reference-test inputs."""
    top = min(candidates, key=lambda c: c.rank)
    ref_inputs = [iv for iv, _ in task.reference_tests]
    expected = [exp for _, exp in task.reference_tests]
    signatures = executor.run(task, [top], ref_inputs)
    outcomes = signatures[0].outcomes
    return correctness(task, list(zip(outcomes, expected))), signatures


@dataclass
class RunOutput:
    results: list[TaskResult]
    rows: list[dict]
    timings: StageTimings
    had_failures: bool


def run_corpus(
    corpus: Corpus,
    fuzz_config: FuzzConfig,
    weights: DistanceWeights = DistanceWeights(),
    exec_config: ExecConfig | None = None,
    executor=None,
) -> RunOutput:
    """Run the pipeline over every task, in corpus order."""
    if executor is None:
        executor = SubprocessExecutor(exec_config or ExecConfig())
    results = []
    total = StageTimings()
    for task in corpus.tasks:
        candidates = corpus.candidates_for(task.task_id)
        if not candidates:
            result = TaskResult(task_id=task.task_id, error="NoCandidates: task has none")
        else:
            result = run_task(task, candidates, fuzz_config, weights, executor)
        results.append(result)
        total.add(result.timings)
    rows = [r.to_report_row() for r in results]
    had_failures = any(r.error is not None or r.flagged for r in results)
    return RunOutput(results=results, rows=rows, timings=total, had_failures=had_failures)
