"""Choosing which observed sources to condition on.

Exhaustively scores every nonempty subset of the candidate observed nodes
by the number of conditionally independent groups it induces, preferring
more groups, then smaller subsets, then lexicographically smaller id
tuples. Observed nodes that only ever act as colliders are pruned from the
candidates first (conditioning them can only open paths, never block one);
the pruning can be disabled to verify exactly that.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .dsep import LatentPartition, partition
from .errors import GraphTooLarge, NoCandidates, NoObservedSources
from .graph import COLLIDER, NON_COLLIDER, Dag, classify_roles

MAX_CANDIDATES = 20


@dataclass(frozen=True)
class SelectionReport:
    chosen: frozenset[int]
    partition: LatentPartition
    group_count: int
    candidates: frozenset[int]
    candidates_evaluated: int
    table: tuple[tuple[tuple[int, ...], int], ...]


def candidate_set(dag: Dag, prune: bool = True) -> frozenset[int]:
    """Observed nodes eligible for conditioning.

    With pruning, drops nodes whose role set is exactly ``{collider}``.
    """
    if not dag.observed:
        raise NoObservedSources("graph has no observed sources")
    if not prune:
        return frozenset(dag.observed)
    roles = classify_roles(dag)
    candidates = frozenset(
        v for v in dag.observed if roles[v] != frozenset({COLLIDER})
    )
    if not candidates:
        raise NoCandidates(
            "every observed source acts only as a collider; nothing to condition on"
        )
    return candidates


def enumerate_subsets(dag: Dag, prune: bool = True) -> list[tuple[tuple[int, ...], int]]:
    """Score every nonempty candidate subset by its induced group count.

    Subsets are enumerated by size then lexicographically, one partition
    evaluation each; the empty set is excluded by construction.
    """
    candidates = sorted(candidate_set(dag, prune=prune))
    if len(candidates) > MAX_CANDIDATES:
        raise GraphTooLarge(
            f"{len(candidates)} candidate nodes would mean "
            f"2^{len(candidates)} subsets; limit is {MAX_CANDIDATES}"
        )
    table = []
    for size in range(1, len(candidates) + 1):
        for subset in combinations(candidates, size):
            groups = partition(dag, subset).groups
            table.append((subset, len(groups)))
    return table


def select(dag: Dag, prune: bool = True) -> SelectionReport:
    """Pick the conditioning set inducing the most fine-grained partition.

    Ties go to the smaller subset, then to the lexicographically smaller id
    tuple; the enumeration order makes a single strict comparison realize
    all three rules. The all-confounder set seeds the incumbent, but any
    subset producing at least one group replaces it.
    """
    candidates = candidate_set(dag, prune=prune)
    roles = classify_roles(dag)
    incumbent = tuple(
        sorted(v for v in candidates if roles[v] == frozenset({NON_COLLIDER}))
    )
    best_count = 0

    table = enumerate_subsets(dag, prune=prune)
    for subset, count in table:
        if count > best_count:
            best_count = count
            incumbent = subset

    chosen = frozenset(incumbent)
    part = partition(dag, chosen)
    return SelectionReport(
        chosen=chosen,
        partition=part,
        group_count=len(part.groups),
        candidates=candidates,
        candidates_evaluated=len(table),
        table=tuple(table),
    )
