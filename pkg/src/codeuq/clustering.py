"""Semantic clustering of candidates by exact execution-signature equality.

Two candidates land in the same cluster iff their signatures agree
componentwise: normal outcomes by canonical output string, abnormal ones by
error type.  All numeric tolerance lives in canonical normalization, so this
stays a pure hash-partition.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .executor import ExecutionSignature, LengthMismatch


@dataclass(frozen=True)
class Cluster:
    members: tuple[int, ...]  # candidate ranks, ascending
    size: int
    probability: Fraction  # size / K, exact
    representative_signature: ExecutionSignature


@dataclass(frozen=True)
class ClusterPartition:
    task_id: str
    clusters: tuple[Cluster, ...]
    dominant_index: int  # cluster containing the top-ranked candidate

    @property
    def m(self) -> int:
        return len(self.clusters)

    @property
    def sizes(self) -> list[int]:
        return [c.size for c in self.clusters]

    def probabilities(self) -> list[float]:
        return [float(c.probability) for c in self.clusters]


def partition(signatures: list[ExecutionSignature]) -> ClusterPartition:
    """Partition signatures into semantic clusters.

    Clusters are sorted by (descending size, ascending smallest member rank)
    so reports are deterministic; probabilities are exact rationals summing
    to 1.  Raises LengthMismatch when signatures disagree on input count.
    """
    if not signatures:
        raise ValueError("cannot partition an empty signature list")
    n = len(signatures[0].outcomes)
    for sig in signatures:
        if len(sig.outcomes) != n:
            raise LengthMismatch(
                f"signature for rank {sig.rank} has {len(sig.outcomes)} outcomes, expected {n}"
            )
    ranks = sorted(sig.rank for sig in signatures)
    if ranks != list(range(1, len(signatures) + 1)):
        raise ValueError(f"ranks {ranks} are not exactly 1..K")

    groups: dict[tuple, list[ExecutionSignature]] = {}
    for sig in sorted(signatures, key=lambda s: s.rank):
        groups.setdefault(sig.key(), []).append(sig)

    k = len(signatures)
    clusters = []
    for members in groups.values():
        member_ranks = tuple(sorted(m.rank for m in members))
        clusters.append(
            Cluster(
                members=member_ranks,
                size=len(members),
                probability=Fraction(len(members), k),
                representative_signature=members[0],
            )
        )
    clusters.sort(key=lambda c: (-c.size, c.members[0]))

    dominant_index = next(i for i, c in enumerate(clusters) if 1 in c.members)
    task_id = signatures[0].task_id
    return ClusterPartition(task_id, tuple(clusters), dominant_index)
