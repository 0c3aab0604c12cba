"""codeuq: execution-clustering uncertainty estimation for sampled programs.

Candidate programs for one task are executed on a shared fuzzed input set,
clustered by identical execution behaviour, and scored with distance-aware
uncertainty metrics that weigh how severely the behaviours differ, not just
whether they do.
"""

__version__ = "0.1.0"

from .canon import normalize
from .clustering import Cluster, ClusterPartition, partition
from .corpus import (
    CandidateProgram,
    Corpus,
    FunctionInterface,
    InputValue,
    StdinProgram,
    Task,
    load_corpus,
    load_report,
    write_corpus,
    write_report,
)
from .evaluation import (
    AbstentionPolicy,
    CorrectnessTargets,
    auroc,
    calibrate_abstention,
    correctness,
    learn_weights,
    pearson,
    spearman,
    summarize,
)
from .executor import (
    ErrorType,
    ExecConfig,
    ExecutionSignature,
    InputQuality,
    Outcome,
    ReplayExecutor,
    SubprocessExecutor,
    diagnostics,
    execute_all,
)
from .fuzzgen import FuzzConfig, TypeHint, infer_types, mutate_seeded, sample_seed_free
from .metrics import (
    DEFAULT_WEIGHTS,
    DistanceMatrix,
    DistanceWeights,
    UncertaintyScores,
    cluster_distance,
    distance_matrix,
    dsde,
    per_input_delta,
    sc_entropy,
    score_task,
    sde,
)
from .pipeline import RunOutput, TaskResult, run_corpus, run_task
