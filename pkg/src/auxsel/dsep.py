"""d-separation queries and latent partitioning.

``bayes_ball`` computes the set of nodes d-connected to a source set in one
graph traversal; ``d_separated_oracle`` re-derives the same answer by
enumerating every simple skeleton path (exponential, capped at 20 nodes) so
the fast path can be validated against it. ``partition`` groups the
unobserved nodes into conditionally independent blocks by running Bayes-ball
repeatedly.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .errors import GraphTooLarge, InvalidId, NotObserved, OverlappingSets
from .graph import MAX_PATH_ENUM_NODES, Dag, _simple_skeleton_paths

_UP = 0    # ball arrived from a child
_DOWN = 1  # ball arrived from a parent


@dataclass(frozen=True)
class ReachabilityResult:
    """Nodes d-connected to ``sources`` given ``conditioning``.

    ``reached`` excludes the conditioning set and all observed nodes (they
    are never members of a latent group); the raw visited set including
    observed nodes is kept in ``visited`` for d-separation tests.
    """

    sources: frozenset[int]
    conditioning: frozenset[int]
    reached: frozenset[int]
    visited: frozenset[int]


@dataclass(frozen=True)
class LatentPartition:
    """Disjoint groups of unobserved nodes, mutually d-separated given
    ``conditioning``. Groups are sorted ascending and listed by smallest
    member, so the representation is canonical."""

    conditioning: frozenset[int]
    unconditioned_observed: frozenset[int]
    groups: tuple[tuple[int, ...], ...]


def _validate_ids(dag: Dag, nodes) -> frozenset[int]:
    out = frozenset(int(v) for v in nodes)
    for v in out:
        if not 0 <= v < dag.n:
            raise InvalidId(f"node id {v} out of range for {dag.n} nodes")
    return out


def bayes_ball(dag: Dag, sources, conditioning) -> ReachabilityResult:
    """One Bayes-ball sweep from ``sources`` given ``conditioning``.

    Visits are keyed on (node, arrival direction): a node reached from a
    child passes the ball to its parents and bounces it to its children
    unless conditioned; a node reached from a parent passes it to children
    when unconditioned and bounces it to parents when conditioned. A
    conditioned descendant re-opens a collider through the bounce, so no
    explicit descendant check is needed on this path.
    """
    src = _validate_ids(dag, sources)
    cond = _validate_ids(dag, conditioning)
    if src & cond:
        raise OverlappingSets(f"sources and conditioning share {sorted(src & cond)}")

    visited: set[tuple[int, int]] = set()
    queue = deque((s, _UP) for s in sorted(src))
    while queue:
        node, direction = queue.popleft()
        if (node, direction) in visited:
            continue
        visited.add((node, direction))
        if direction == _UP:
            if node in cond:
                continue
            for p in dag.parents[node]:
                queue.append((p, _UP))
            for c in dag.children[node]:
                queue.append((c, _DOWN))
        else:
            if node in cond:
                for p in dag.parents[node]:
                    queue.append((p, _UP))
            else:
                for c in dag.children[node]:
                    queue.append((c, _DOWN))

    seen = frozenset(node for node, _ in visited)
    return ReachabilityResult(
        sources=src,
        conditioning=cond,
        reached=frozenset(v for v in seen if v not in cond and v not in dag.observed),
        visited=frozenset(v for v in seen if v not in cond),
    )


def d_separated(dag: Dag, a, b, conditioning) -> bool:
    """True iff every path between ``a`` and ``b`` is blocked by
    ``conditioning``. Computed from Bayes-ball reachability."""
    a_set = _validate_ids(dag, a)
    b_set = _validate_ids(dag, b)
    cond = _validate_ids(dag, conditioning)
    if not a_set or not b_set:
        raise OverlappingSets("a and b must be nonempty")
    if a_set & b_set or a_set & cond or b_set & cond:
        raise OverlappingSets("a, b and conditioning must be pairwise disjoint")
    result = bayes_ball(dag, a_set, cond)
    return not (result.visited & b_set)


def d_separated_oracle(dag: Dag, a, b, conditioning) -> bool:
    """Path-enumeration d-separation, independent of Bayes-ball.

    A simple skeleton path is active iff every interior collider is in the
    conditioning set or has a descendant there, and every interior
    non-collider is outside it. Separated means no active path exists.
    """
    if dag.n > MAX_PATH_ENUM_NODES:
        raise GraphTooLarge(
            f"oracle enumerates paths; {dag.n} nodes exceeds the "
            f"{MAX_PATH_ENUM_NODES}-node limit"
        )
    a_set = _validate_ids(dag, a)
    b_set = _validate_ids(dag, b)
    cond = _validate_ids(dag, conditioning)
    if not a_set or not b_set:
        raise OverlappingSets("a and b must be nonempty")
    if a_set & b_set or a_set & cond or b_set & cond:
        raise OverlappingSets("a, b and conditioning must be pairwise disjoint")

    for x in sorted(a_set):
        for y in sorted(b_set):
            for path in _simple_skeleton_paths(dag, x, y):
                if _path_active(dag, path, cond):
                    return False
    return True


def _path_active(dag: Dag, path, cond) -> bool:
    for i in range(1, len(path) - 1):
        prev, v, nxt = path[i - 1], path[i], path[i + 1]
        is_collider = (prev, v) in dag.edges and (nxt, v) in dag.edges
        if is_collider:
            if v not in cond and not (dag.descendants[v] & cond):
                return False
        elif v in cond:
            return False
    return True


def partition(dag: Dag, conditioning) -> LatentPartition:
    """Group unobserved nodes into conditionally independent blocks.

    Blocks are the connected components of the pairwise "d-connected given
    ``conditioning``" relation, grown to a fixpoint with one Bayes-ball
    sweep per unobserved node (d-connection is not transitive, so reached
    sets that overlap must merge).
    """
    cond = _validate_ids(dag, conditioning)
    not_observed = cond - dag.observed
    if not_observed:
        raise NotObserved(
            f"conditioning nodes {sorted(not_observed)} are not observed"
        )

    unassigned = set(dag.unobserved)
    groups = []
    while unassigned:
        seed = min(unassigned)
        component = {seed}
        frontier = [seed]
        while frontier:
            v = frontier.pop()
            reached = bayes_ball(dag, {v}, cond).reached
            new = reached - component
            component |= new
            frontier.extend(sorted(new))
        groups.append(tuple(sorted(component)))
        unassigned -= component

    groups.sort(key=lambda g: g[0])
    return LatentPartition(
        conditioning=cond,
        unconditioned_observed=frozenset(dag.observed - cond),
        groups=tuple(groups),
    )
