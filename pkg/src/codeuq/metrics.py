"""Distance-aware uncertainty scores over semantic clusters.

The per-input outcome distance delta(o, o') is graded:

    0   both normal, equal canonical outputs
    1   both normal, unequal
    a   exactly one abnormal
    b   both abnormal, different error types
    c   both abnormal, same error type

Cluster distance d_ij is the mean of delta over the N shared inputs, taken
on any representatives (members of a cluster share one signature, so the
choice cannot matter).  Two scores aggregate the distances:

    sde  = sum_{i<j} p_i p_j d_ij          global behavioural diversity
           (a Rao quadratic entropy over the cluster distribution)
    dsde = sum_{i != c*} p_i d_{c*, i}     disagreement with the cluster
           holding the top-ranked candidate

Both are 0 when all candidates behave identically.  Computation is pure and
must stay below 1 ms per task at K = N = 10.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .clustering import ClusterPartition
from .executor import ExecutionSignature, LengthMismatch, Outcome


@dataclass(frozen=True)
class DistanceWeights:
    a: float = 1.0  # exactly one outcome abnormal
    b: float = 0.8  # both abnormal, different error types
    c: float = 0.6  # both abnormal, same error type

    def __post_init__(self):
        for name in ("a", "b", "c"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"weight {name}={v} outside [0, 1]")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a, self.b, self.c)


DEFAULT_WEIGHTS = DistanceWeights()


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class DistanceMatrix:
    m: int
    entries: tuple[tuple[float, ...], ...]  # symmetric, zero diagonal, in [0,1]

    def __getitem__(self, ij: tuple[int, int]) -> float:
        i, j = ij
        return self.entries[i][j]


@dataclass(frozen=True)
class UncertaintyScores:
    sde: float
    dsde: float
    sc_entropy: float  # Shannon entropy over cluster probabilities, nats


def per_input_delta(o: Outcome, o_prime: Outcome, w: DistanceWeights) -> float:
    """Graded disagreement between two outcomes on one input."""
    if o.is_normal and o_prime.is_normal:
        return 0.0 if o.canonical_output == o_prime.canonical_output else 1.0
    if o.is_normal or o_prime.is_normal:
        return w.a
    if o.error_type == o_prime.error_type:
        return w.c
    return w.b


def cluster_distance(
    sig_i: ExecutionSignature, sig_j: ExecutionSignature, w: DistanceWeights
) -> float:
    """Mean per-input delta between two signatures."""
    if len(sig_i.outcomes) != len(sig_j.outcomes):
        raise LengthMismatch("signatures have different lengths")
    n = len(sig_i.outcomes)
    return sum(per_input_delta(a, b, w) for a, b in zip(sig_i.outcomes, sig_j.outcomes)) / n


def distance_matrix(
    partition: ClusterPartition, w: DistanceWeights = DEFAULT_WEIGHTS
) -> DistanceMatrix:
    """Pairwise cluster distances from cluster representatives."""
    reps = [c.representative_signature for c in partition.clusters]
    m = len(reps)
    rows = [[0.0] * m for _ in range(m)]
    for i in range(m):
        for j in range(i + 1, m):
            d = cluster_distance(reps[i], reps[j], w)
            rows[i][j] = rows[j][i] = d
    return DistanceMatrix(m, tuple(tuple(row) for row in rows))


def sde(partition: ClusterPartition, dmat: DistanceMatrix) -> float:
    """sum over cluster pairs i<j of p_i * p_j * d_ij."""
    if dmat.m != partition.m:
        raise DimensionMismatch(f"matrix is {dmat.m}x{dmat.m}, partition has {partition.m}")
    p = partition.probabilities()
    return sum(
        p[i] * p[j] * dmat[i, j]
        for i in range(partition.m)
        for j in range(i + 1, partition.m)
    )


def dsde(partition: ClusterPartition, dmat: DistanceMatrix) -> float:
    """sum over clusters i != c* of p_i * d_{c*, i}, anchored at the cluster
    containing the top-ranked candidate."""
    if dmat.m != partition.m:
        raise DimensionMismatch(f"matrix is {dmat.m}x{dmat.m}, partition has {partition.m}")
    c_star = partition.dominant_index
    p = partition.probabilities()
    return sum(p[i] * dmat[c_star, i] for i in range(partition.m) if i != c_star)


def sc_entropy(partition: ClusterPartition) -> float:
    """Shannon entropy (nats) over cluster probabilities.

    This is the self-consistency baseline: exact-match clustering with no
    distance term.  Any log base gives the same AUROC ranking.
    """
    return -sum(p * math.log(p) for p in partition.probabilities() if p > 0)


def score_task(
    partition: ClusterPartition, w: DistanceWeights = DEFAULT_WEIGHTS
) -> UncertaintyScores:
    """All three uncertainty scores for one task's partition."""
    dmat = distance_matrix(partition, w)
    return UncertaintyScores(
        sde=sde(partition, dmat),
        dsde=dsde(partition, dmat),
        sc_entropy=sc_entropy(partition),
    )


# --- support for weight learning -----------------------------------------------

# Per cluster pair, how many of the N inputs fall in each delta case.  With
# these counts the distance under any weights is a dot product, so a weight
# grid search never re-touches signatures.
CASES = ("normal_eq", "normal_neq", "one_abnormal", "abnormal_diff", "abnormal_same")


def pair_case_counts(
    sig_i: ExecutionSignature, sig_j: ExecutionSignature
) -> tuple[int, int, int, int, int]:
    if len(sig_i.outcomes) != len(sig_j.outcomes):
        raise LengthMismatch("signatures have different lengths")
    counts = [0, 0, 0, 0, 0]
    for a, b in zip(sig_i.outcomes, sig_j.outcomes):
        if a.is_normal and b.is_normal:
            counts[0 if a.canonical_output == b.canonical_output else 1] += 1
        elif a.is_normal or b.is_normal:
            counts[2] += 1
        elif a.error_type == b.error_type:
            counts[4] += 1
        else:
            counts[3] += 1
    return tuple(counts)


def distance_from_counts(counts, w: DistanceWeights) -> float:
    eq, neq, one_abn, abn_diff, abn_same = counts
    n = eq + neq + one_abn + abn_diff + abn_same
    return (neq + w.a * one_abn + w.b * abn_diff + w.c * abn_same) / n
