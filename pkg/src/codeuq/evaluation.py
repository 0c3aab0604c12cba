"""Correctness targets, predictive statistics and deployment calibration.

AUROC here is the Mann-Whitney statistic with half credit for ties:
the probability that a randomly chosen failing task receives a strictly
higher uncertainty score than a randomly chosen passing task, plus half the
tie probability.  Failure is the positive class, so an informative
uncertainty score reads above 0.5.

Degenerate inputs (a single class, zero variance) raise rather than return
a silent 0 or NaN; summary builders catch these and report an explicit
undefined marker.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .canon import canonical_json, normalize
from .clustering import ClusterPartition
from .corpus import Task
from .executor import Outcome
from .metrics import DistanceWeights, distance_from_counts, pair_case_counts


class DegenerateLabels(ValueError):
    """Both classes are required but only one is present."""


class DegenerateVariance(ValueError):
    """Correlation is undefined when either vector is constant."""


class NoReferenceTests(ValueError):
    pass


# --- correctness targets ---------------------------------------------------------


@dataclass(frozen=True)
class CorrectnessTargets:
    pass1: bool
    partial_pass1: float


def expected_canonical(task: Task, expected) -> str:
    """Canonical form of a reference-test expectation, matching how the
    candidate's own output is normalized."""
    if task.is_stdin:
        return normalize(expected if isinstance(expected, str) else str(expected))
    return canonical_json(expected)


def correctness(task: Task, results: list[tuple[Outcome, object]]) -> CorrectnessTargets:
    """pass@1 and partial_pass@1 of the top-ranked candidate.

    results pairs the candidate's outcome on each reference-test input with
    the expected output.  Matching reuses canonical normalization; crashed
    cells never match.
    """
    if not results:
        raise NoReferenceTests(f"task {task.task_id!r} has no reference tests")
    matched = 0
    for outcome, expected in results:
        if outcome.is_normal and outcome.canonical_output == expected_canonical(task, expected):
            matched += 1
    partial = matched / len(results)
    return CorrectnessTargets(pass1=(partial == 1.0), partial_pass1=partial)


# --- rank statistics --------------------------------------------------------------


def midranks(values: list[float]) -> list[float]:
    """1-based ranks with ties assigned the average of their positions."""
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def auroc(scores: list[float], failure: list[bool]) -> float:
    """Mann-Whitney AUROC of scores against failure labels, ties half-credited."""
    if len(scores) != len(failure):
        raise ValueError("scores and labels differ in length")
    n_pos = sum(failure)
    n_neg = len(failure) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabels("need at least one failure and one success")
    ranks = midranks(scores)
    rank_sum = sum(r for r, f in zip(ranks, failure) if f)
    u = rank_sum - n_pos * (n_pos + 1) / 2
    return u / (n_pos * n_neg)


def pearson(x: list[float], y: list[float]) -> float:
    if len(x) != len(y) or len(x) < 2:
        raise ValueError("need two equal-length vectors of size >= 2")
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateVariance("constant vector")
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    return sxy / math.sqrt(sxx * syy)


def spearman(x: list[float], y: list[float]) -> float:
    """Pearson correlation of midranks (average-rank tie handling)."""
    return pearson(midranks(x), midranks(y))


# --- evaluation summaries ----------------------------------------------------------


@dataclass
class StatResult:
    value: float | None
    undefined_reason: str | None = None

    def to_json(self):
        if self.value is None:
            return {"value": None, "undefined": self.undefined_reason}
        return {"value": self.value}


@dataclass
class EvalSummary:
    n_tasks: int
    auroc: StatResult
    pearson_r: StatResult
    spearman_rho: StatResult
    per_difficulty: dict[str, "EvalSummary"] = field(default_factory=dict)

    def to_json(self):
        out = {
            "n_tasks": self.n_tasks,
            "auroc": self.auroc.to_json(),
            "pearson_r": self.pearson_r.to_json(),
            "spearman_rho": self.spearman_rho.to_json(),
        }
        if self.per_difficulty:
            out["per_difficulty"] = {
                name: summary.to_json() for name, summary in self.per_difficulty.items()
            }
        return out


def _stat(fn, *args) -> StatResult:
    try:
        return StatResult(fn(*args))
    except (DegenerateLabels, DegenerateVariance, ValueError) as exc:
        return StatResult(None, undefined_reason=str(exc))


def summarize(
    scores: list[float],
    pass1: list[bool],
    partial: list[float],
    difficulties: list[str] | None = None,
) -> EvalSummary:
    """AUROC against pass@1 failure plus correlations with partial_pass@1."""
    failures = [not p for p in pass1]
    summary = EvalSummary(
        n_tasks=len(scores),
        auroc=_stat(auroc, scores, failures),
        pearson_r=_stat(pearson, scores, partial),
        spearman_rho=_stat(spearman, scores, partial),
    )
    if difficulties:
        for level in sorted(set(difficulties)):
            idx = [i for i, d in enumerate(difficulties) if d == level]
            summary.per_difficulty[level] = summarize(
                [scores[i] for i in idx],
                [pass1[i] for i in idx],
                [partial[i] for i in idx],
            )
    return summary


# --- distance-weight learning --------------------------------------------------------


@dataclass(frozen=True)
class WeightTrainingExample:
    """Everything a weight grid search needs from one task: the dominant
    cluster's pairwise delta-case counts and probabilities, plus the label."""

    probabilities: tuple[float, ...]
    dominant_index: int
    dominant_pair_counts: tuple[tuple[int, ...], ...]  # one per cluster, () at c*
    partial_pass1: float

    @property
    def failed(self) -> bool:
        return self.partial_pass1 < 1.0


def weight_training_example(
    partition: ClusterPartition, partial_pass1: float
) -> WeightTrainingExample:
    reps = [c.representative_signature for c in partition.clusters]
    c_star = partition.dominant_index
    counts = tuple(
        () if i == c_star else tuple(pair_case_counts(reps[c_star], reps[i]))
        for i in range(partition.m)
    )
    return WeightTrainingExample(
        probabilities=tuple(partition.probabilities()),
        dominant_index=c_star,
        dominant_pair_counts=counts,
        partial_pass1=partial_pass1,
    )


def dsde_under_weights(example: WeightTrainingExample, w: DistanceWeights) -> float:
    total = 0.0
    for i, counts in enumerate(example.dominant_pair_counts):
        if i == example.dominant_index:
            continue
        total += example.probabilities[i] * distance_from_counts(counts, w)
    return total


def weight_grid(step: float = 0.05) -> list[DistanceWeights]:
    levels = [round(step * k, 10) for k in range(int(round(1.0 / step)) + 1)]
    return [DistanceWeights(a, b, c) for a in levels for b in levels for c in levels]


_DEFAULT = DistanceWeights()


def learn_weights(
    train: list[WeightTrainingExample], grid: list[DistanceWeights] | None = None
) -> DistanceWeights:
    """Exhaustive grid search for the weights maximizing train AUROC of the
    top-anchored score.

    No ordering constraint is imposed on (a, b, c).  Ties break toward the
    default (1, 0.8, 0.6) by L1 proximity, then to the lexicographically
    smallest triple.
    """
    if not train:
        raise ValueError("empty training set")
    labels = [ex.failed for ex in train]
    if all(labels) or not any(labels):
        raise DegenerateLabels("training set has a single class")
    if grid is None:
        grid = weight_grid()

    best: tuple[float, float, tuple[float, float, float]] | None = None
    best_weights = None
    for w in grid:
        scores = [dsde_under_weights(ex, w) for ex in train]
        value = auroc(scores, labels)
        l1 = abs(w.a - _DEFAULT.a) + abs(w.b - _DEFAULT.b) + abs(w.c - _DEFAULT.c)
        key = (-value, l1, w.as_tuple())
        if best is None or key < best:
            best = key
            best_weights = w
    return best_weights


# --- abstention calibration ------------------------------------------------------------


@dataclass(frozen=True)
class AbstentionPolicy:
    """Accept the top-ranked output iff its uncertainty score <= tau."""

    tau: float
    metric: str  # sde | dsde | sc_entropy
    fpr_cap: float

    def accept(self, score: float) -> bool:
        return score <= self.tau


@dataclass
class FoldOutcome:
    tau: float
    accuracy: float
    fpr: float
    infeasible: bool


@dataclass
class AbstentionReport:
    tau: float  # threshold refit on the full dataset under the cap
    fpr_cap: float
    folds: list[FoldOutcome]
    accuracy_mean: float
    accuracy_std: float
    fpr_mean: float
    fpr_std: float
    any_infeasible: bool

    def to_json(self):
        return {
            "tau": self.tau,
            "fpr_cap": self.fpr_cap,
            "accuracy_mean": self.accuracy_mean,
            "accuracy_std": self.accuracy_std,
            "fpr_mean": self.fpr_mean,
            "fpr_std": self.fpr_std,
            "n_folds": len(self.folds),
            "any_infeasible": self.any_infeasible,
            "folds": [
                {"tau": f.tau, "accuracy": f.accuracy, "fpr": f.fpr, "infeasible": f.infeasible}
                for f in self.folds
            ],
        }


def _policy_stats(scores, correct, tau) -> tuple[float, float]:
    """Selective accuracy and FPR of accept-iff-score<=tau.

    accuracy = (correct accepted + incorrect abstained) / n
    fpr      = incorrect accepted / incorrect  (0 when nothing is incorrect)
    """
    n = len(scores)
    accepted = [s <= tau for s in scores]
    good = sum(1 for acc, ok in zip(accepted, correct) if (ok and acc) or (not ok and not acc))
    incorrect = [i for i, ok in enumerate(correct) if not ok]
    if incorrect:
        fpr = sum(1 for i in incorrect if accepted[i]) / len(incorrect)
    else:
        fpr = 0.0
    return good / n, fpr


def _candidate_thresholds(scores) -> list[float]:
    distinct = sorted(set(scores))
    mids = [(a + b) / 2 for a, b in zip(distinct, distinct[1:])]
    return [-math.inf] + mids + [math.inf]


def _choose_tau(scores, correct, fpr_cap) -> tuple[float, bool]:
    best = None
    for tau in _candidate_thresholds(scores):
        accuracy, fpr = _policy_stats(scores, correct, tau)
        if fpr > fpr_cap:
            continue
        # maximize accuracy, then minimize FPR, then accept more (larger tau)
        key = (-accuracy, fpr, -tau)
        if best is None or key < best[0]:
            best = (key, tau)
    if best is None:
        return -math.inf, True  # abstain everything
    return best[1], False


def calibrate_abstention(
    scores: list[float],
    pass1: list[bool],
    fpr_cap: float,
    folds: int = 5,
    rng_seed: int = 0,
) -> AbstentionReport:
    """Cross-validated threshold selection under an FPR cap.

    Candidate thresholds are midpoints between consecutive distinct scores
    plus infinite sentinels.  Per fold, tau maximizes training accuracy
    subject to training FPR <= fpr_cap; held-out accuracy and FPR are
    reported as mean +/- std across folds.  The cap binds on training folds
    only.  The returned tau is refit on the full dataset the same way.
    """
    if folds < 2:
        raise ValueError("folds must be >= 2")
    if len(scores) != len(pass1):
        raise ValueError("scores and labels differ in length")
    if len(scores) < folds:
        raise ValueError("fewer tasks than folds")

    indices = list(range(len(scores)))
    random.Random(rng_seed).shuffle(indices)
    chunks = [indices[i::folds] for i in range(folds)]

    outcomes: list[FoldOutcome] = []
    for held_out in chunks:
        held = set(held_out)
        train_idx = [i for i in indices if i not in held]
        tau, infeasible = _choose_tau(
            [scores[i] for i in train_idx], [pass1[i] for i in train_idx], fpr_cap
        )
        accuracy, fpr = _policy_stats(
            [scores[i] for i in held_out], [pass1[i] for i in held_out], tau
        )
        outcomes.append(FoldOutcome(tau, accuracy, fpr, infeasible))

    accs = [f.accuracy for f in outcomes]
    fprs = [f.fpr for f in outcomes]
    final_tau, _ = _choose_tau(scores, pass1, fpr_cap)
    return AbstentionReport(
        tau=final_tau,
        fpr_cap=fpr_cap,
        folds=outcomes,
        accuracy_mean=_mean(accs),
        accuracy_std=_std(accs),
        fpr_mean=_mean(fprs),
        fpr_std=_std(fprs),
        any_infeasible=any(f.infeasible for f in outcomes),
    )


def _mean(xs) -> float:
    return sum(xs) / len(xs)


def _std(xs) -> float:
    m = _mean(xs)
    return math.sqrt(sum((x - m) ** 2 for x in xs) / len(xs))
