import math
import random
from fractions import Fraction

import pytest

from codeuq.clustering import Cluster, ClusterPartition, partition
from codeuq.executor import ErrorType, ExecutionSignature, LengthMismatch, Outcome
from codeuq.metrics import (
    DEFAULT_WEIGHTS,
    DimensionMismatch,
    DistanceMatrix,
    DistanceWeights,
    cluster_distance,
    distance_from_counts,
    distance_matrix,
    dsde,
    pair_case_counts,
    per_input_delta,
    sc_entropy,
    score_task,
    sde,
)

N_OK = Outcome.normal("7")
N_OK2 = Outcome.normal("8")
ABN_V = Outcome.abnormal(ErrorType.runtime("ValueError"))
ABN_T = Outcome.abnormal(ErrorType.runtime("TypeError"))


def test_delta_totality_table():
    w = DEFAULT_WEIGHTS
    assert per_input_delta(N_OK, Outcome.normal("7"), w) == 0.0
    assert per_input_delta(N_OK, N_OK2, w) == 1.0
    assert per_input_delta(N_OK, ABN_V, w) == 1.0  # a
    assert per_input_delta(ABN_V, N_OK, w) == 1.0  # a, symmetric
    assert per_input_delta(ABN_V, ABN_T, w) == 0.8  # b
    assert per_input_delta(ABN_V, Outcome.abnormal(ErrorType.runtime("ValueError")), w) == 0.6  # c


def test_delta_custom_weights():
    w = DistanceWeights(0.5, 0.4, 0.1)
    assert per_input_delta(N_OK, ABN_V, w) == 0.5
    assert per_input_delta(ABN_V, ABN_T, w) == 0.4
    assert per_input_delta(ABN_V, ABN_V, w) == 0.1


def test_weights_validated():
    with pytest.raises(ValueError):
        DistanceWeights(1.5, 0.5, 0.5)
    with pytest.raises(ValueError):
        DistanceWeights(1.0, -0.1, 0.5)


def _sig(rank, outcomes):
    return ExecutionSignature("t", rank, tuple(outcomes))


def test_cluster_distance_identical_is_zero():
    sig = _sig(1, [N_OK] * 10)
    assert cluster_distance(sig, _sig(2, [N_OK] * 10), DEFAULT_WEIGHTS) == 0.0


def test_cluster_distance_one_of_ten():
    a = _sig(1, [Outcome.normal(str(i)) for i in range(10)])
    b_outcomes = [Outcome.normal(str(i)) for i in range(9)] + [Outcome.normal("x")]
    assert cluster_distance(a, _sig(2, b_outcomes), DEFAULT_WEIGHTS) == pytest.approx(0.10)


def test_cluster_distance_all_differ():
    a = _sig(1, [Outcome.normal(f"a{i}") for i in range(10)])
    b = _sig(2, [Outcome.normal(f"b{i}") for i in range(10)])
    assert cluster_distance(a, b, DEFAULT_WEIGHTS) == pytest.approx(1.0)


def test_cluster_distance_length_mismatch():
    with pytest.raises(LengthMismatch):
        cluster_distance(_sig(1, [N_OK]), _sig(2, [N_OK, N_OK]), DEFAULT_WEIGHTS)


def _two_cluster_partition(size_a: int, size_b: int, distance: float, dominant_first=True):
    """Synthetic partition + matrix with the given sizes and inter-distance."""
    k = size_a + size_b
    rep_a = _sig(1, [N_OK])
    rep_b = _sig(size_a + 1, [N_OK2])
    clusters = (
        Cluster(tuple(range(1, size_a + 1)), size_a, Fraction(size_a, k), rep_a),
        Cluster(tuple(range(size_a + 1, k + 1)), size_b, Fraction(size_b, k), rep_b),
    )
    dominant = 0 if dominant_first else 1
    part = ClusterPartition("t", clusters, dominant)
    dmat = DistanceMatrix(2, ((0.0, distance), (distance, 0.0)))
    return part, dmat


def test_sde_worked_examples():
    part, dmat = _two_cluster_partition(8, 2, 0.10)
    assert sde(part, dmat) == pytest.approx(0.016, abs=1e-12)
    part, dmat = _two_cluster_partition(6, 4, 1.00)
    assert sde(part, dmat) == pytest.approx(0.24, abs=1e-12)


def test_sde_single_cluster_zero():
    sigs = [_sig(r, [N_OK]) for r in range(1, 6)]
    part = partition(sigs)
    assert sde(part, distance_matrix(part)) == 0.0


def test_dsde_worked_examples():
    part, dmat = _two_cluster_partition(8, 2, 0.10, dominant_first=True)
    assert dsde(part, dmat) == pytest.approx(0.020, abs=1e-12)
    part, dmat = _two_cluster_partition(2, 8, 1.00, dominant_first=True)
    assert dsde(part, dmat) == pytest.approx(0.800, abs=1e-12)
    part, dmat = _two_cluster_partition(4, 6, 0.30, dominant_first=True)
    assert dsde(part, dmat) == pytest.approx(0.180, abs=1e-12)


def test_dimension_mismatch():
    part, _ = _two_cluster_partition(8, 2, 0.1)
    bad = DistanceMatrix(3, ((0.0,) * 3,) * 3)
    with pytest.raises(DimensionMismatch):
        sde(part, bad)
    with pytest.raises(DimensionMismatch):
        dsde(part, bad)


def test_sc_entropy_values():
    single = partition([_sig(r, [N_OK]) for r in range(1, 4)])
    assert sc_entropy(single) == 0.0
    part, _ = _two_cluster_partition(5, 5, 1.0)
    assert sc_entropy(part) == pytest.approx(math.log(2), abs=1e-12)
    part, _ = _two_cluster_partition(8, 2, 1.0)
    # frozen from a 30-digit computation of -sum(p ln p) at p = (0.8, 0.2)
    assert sc_entropy(part) == pytest.approx(0.5004024235381879, abs=1e-12)


def _random_partition(rng, max_m=6):
    m = rng.randint(1, max_m)
    sizes = [rng.randint(1, 5) for _ in range(m)]
    k = sum(sizes)
    clusters = []
    start = 1
    for size in sizes:
        ranks = tuple(range(start, start + size))
        clusters.append(Cluster(ranks, size, Fraction(size, k), _sig(ranks[0], [N_OK])))
        start += size
    dominant = 0  # rank 1 lives in the first cluster by construction
    part = ClusterPartition("t", tuple(clusters), dominant)
    rows = [[0.0] * m for _ in range(m)]
    for i in range(m):
        for j in range(i + 1, m):
            rows[i][j] = rows[j][i] = rng.random()
    return part, DistanceMatrix(m, tuple(tuple(r) for r in rows))


def test_rao_identity_triangular_equals_half_double_sum():
    rng = random.Random(2024)
    for _ in range(1000):
        part, dmat = _random_partition(rng)
        p = part.probabilities()
        full = sum(
            p[i] * p[j] * dmat[i, j] for i in range(part.m) for j in range(part.m)
        )
        assert abs(sde(part, dmat) - full / 2) <= 1e-12


def test_monotonicity_in_distance():
    rng = random.Random(3)
    for _ in range(200):
        part, dmat = _random_partition(rng, max_m=5)
        if part.m < 2:
            continue
        i = rng.randrange(part.m)
        j = rng.randrange(part.m)
        if i == j:
            continue
        bumped = [list(row) for row in dmat.entries]
        bumped[i][j] = bumped[j][i] = min(1.0, dmat[i, j] + 0.25)
        dmat2 = DistanceMatrix(part.m, tuple(tuple(r) for r in bumped))
        assert sde(part, dmat2) >= sde(part, dmat) - 1e-15
        touches_dominant = part.dominant_index in (i, j)
        if touches_dominant and bumped[i][j] > dmat[i, j]:
            assert dsde(part, dmat2) > dsde(part, dmat)
        else:
            assert dsde(part, dmat2) == pytest.approx(dsde(part, dmat))


def test_weight_monotonicity():
    sigs = [_sig(1, [N_OK, ABN_V]), _sig(2, [ABN_T, ABN_V]), _sig(3, [N_OK2, N_OK])]
    part = partition(sigs)
    low = DistanceWeights(0.5, 0.4, 0.3)
    high = DistanceWeights(0.9, 0.8, 0.7)
    s_low = score_task(part, low)
    s_high = score_task(part, high)
    assert s_high.sde >= s_low.sde
    assert s_high.dsde >= s_low.dsde


def test_zero_law_end_to_end():
    part = partition([_sig(r, [N_OK, N_OK2]) for r in range(1, 11)])
    scores = score_task(part)
    assert scores.sde == 0.0
    assert scores.dsde == 0.0
    assert scores.sc_entropy == 0.0


def test_representative_independence():
    # two members per cluster: distances must not depend on which member
    # stands for the cluster, because members share a signature key
    a1 = _sig(1, [N_OK, ABN_V])
    a2 = _sig(2, [N_OK, ABN_V])
    b1 = _sig(3, [N_OK2, ABN_V])
    b2 = _sig(4, [N_OK2, ABN_V])
    w = DEFAULT_WEIGHTS
    for rep_a in (a1, a2):
        for rep_b in (b1, b2):
            assert cluster_distance(rep_a, rep_b, w) == cluster_distance(a1, b1, w)


def test_bound_chain():
    rng = random.Random(17)
    for _ in range(300):
        part, dmat = _random_partition(rng)
        p = part.probabilities()
        assert 0.0 <= sde(part, dmat) <= 0.5 + 1e-12
        assert dsde(part, dmat) <= sum(p[i] for i in range(part.m) if i != part.dominant_index) + 1e-12


def test_sde_two_cluster_upper_bound_attained():
    part, dmat = _two_cluster_partition(5, 5, 1.0)
    assert sde(part, dmat) == pytest.approx(0.25)


def test_pair_case_counts_and_distance_from_counts():
    a = _sig(1, [N_OK, N_OK2, ABN_V, ABN_V, N_OK])
    b = _sig(2, [N_OK, N_OK, ABN_T, ABN_V, ABN_V])
    counts = pair_case_counts(a, b)
    assert counts == (1, 1, 1, 1, 1)
    w = DEFAULT_WEIGHTS
    assert distance_from_counts(counts, w) == pytest.approx(cluster_distance(a, b, w))


def test_metric_speed_budget():
    # well under 1 ms per task at K = N = 10
    import time

    rng = random.Random(9)
    parts = []
    for _ in range(100):
        keys = [[str(rng.randint(0, 3)) for _ in range(10)] for _ in range(10)]
        sigs = [
            ExecutionSignature("t", r + 1, tuple(Outcome.normal(k) for k in keys[r]))
            for r in range(10)
        ]
        parts.append(partition(sigs))
    start = time.perf_counter()
    for part in parts:
        score_task(part)
    per_task = (time.perf_counter() - start) / len(parts)
    assert per_task < 0.001
