"""Run the whole pipeline on a tiny in-memory corpus and inspect the report.

Stages: fuzz a shared input set per task, execute every candidate on it in
sandboxed subprocesses, cluster by identical execution behaviour, score the
clusters, and grade the top-ranked candidate against reference tests.
"""

import json

from codeuq.corpus import CandidateProgram, Corpus, FunctionInterface, InputValue, Task
from codeuq.fuzzgen import FuzzConfig
from codeuq.metrics import DEFAULT_WEIGHTS
from codeuq.pipeline import run_corpus

task = Task(
    task_id="absolute_sum",
    description="Return the sum of absolute values of the integer list.",
    interface=FunctionInterface("abs_sum", (("nums", "List[int]"),), "int"),
    seed_inputs=(InputValue.args([[1, -2, 3]]), InputValue.args([[-10, 5]])),
    reference_tests=(
        (InputValue.args([[1, -2, 3]]), 6),
        (InputValue.args([[]]), 0),
        (InputValue.args([[-7]]), 7),
    ),
)

CORRECT = "def abs_sum(nums):\n    return sum(abs(n) for n in nums)\n"
FORGOT_ABS = "def abs_sum(nums):\n    return sum(nums)\n"
CRASHES_EMPTY = "def abs_sum(nums):\n    return max(nums) and sum(abs(n) for n in nums)\n"

candidates = [
    CandidateProgram("absolute_sum", 1, CORRECT),
    CandidateProgram("absolute_sum", 2, CORRECT),
    CandidateProgram("absolute_sum", 3, CORRECT),
    CandidateProgram("absolute_sum", 4, FORGOT_ABS),
    CandidateProgram("absolute_sum", 5, FORGOT_ABS),
    CandidateProgram("absolute_sum", 6, CRASHES_EMPTY),
]

corpus = Corpus(tasks=[task], candidates=candidates)
output = run_corpus(corpus, FuzzConfig(n_inputs=8, rng_seed=1), DEFAULT_WEIGHTS)

row = output.rows[0]
print("report row:")
print(json.dumps(row, indent=2))

result = output.results[0]
print("\nclusters (by candidate rank):")
for i, cluster in enumerate(result.partition.clusters):
    marker = "  <- contains the top-ranked candidate" if i == result.partition.dominant_index else ""
    print(f"  cluster {i}: ranks {list(cluster.members)}  p={float(cluster.probability):.2f}{marker}")

print("\nfuzzed inputs:")
for iv in result.inputs:
    print(f"  {iv.canonical()}")

print(
    f"\nstage timings: fuzz {output.timings.fuzzing_s * 1e3:.1f} ms, "
    f"execute {output.timings.execution_s:.2f} s, "
    f"metric {output.timings.metric_s * 1e3:.2f} ms"
)
