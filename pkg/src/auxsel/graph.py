"""Directed acyclic graphs with observability annotations.

A :class:`Dag` stores the causal graph, which nodes are observed, and the
derived structure (adjacency, descendant closure) that the d-separation and
selection machinery queries. Nodes are dense integer ids ``0..n-1`` with
unique string labels.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from itertools import combinations

from .errors import CycleDetected, FormatError, GraphTooLarge, InvalidId

# Structural roles a node can play on paths between unobserved nodes.
COLLIDER = "collider"
NON_COLLIDER = "non-collider"

# Path enumeration (role classification, the brute-force oracle) is
# exponential in the worst case; refuse inputs beyond this size.
MAX_PATH_ENUM_NODES = 20


@dataclass(frozen=True)
class Dag:
    """Immutable DAG with per-node observed flags.

    ``parents``/``children`` are tuples of sorted tuples indexed by node id;
    ``descendants`` is the strict descendant closure (node excluded).
    """

    n: int
    edges: frozenset[tuple[int, int]]
    observed: frozenset[int]
    labels: tuple[str, ...]
    parents: tuple[tuple[int, ...], ...] = field(repr=False, compare=False)
    children: tuple[tuple[int, ...], ...] = field(repr=False, compare=False)
    descendants: tuple[frozenset[int], ...] = field(repr=False, compare=False)

    @property
    def nodes(self) -> range:
        return range(self.n)

    @property
    def unobserved(self) -> tuple[int, ...]:
        return tuple(v for v in range(self.n) if v not in self.observed)

    def label_of(self, node: int) -> str:
        return self.labels[node]

    def id_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InvalidId(f"unknown node label {label!r}") from None

    def neighbors(self, node: int) -> tuple[int, ...]:
        """Skeleton neighbors (parents and children, merged)."""
        return tuple(sorted(set(self.parents[node]) | set(self.children[node])))


def build_dag(n: int, edges, observed, labels=None) -> Dag:
    """Validate and construct a :class:`Dag`.

    Raises ``InvalidId`` for out-of-range ids, duplicate edges or bad labels,
    and ``CycleDetected`` when the edge set has a directed cycle (self-loops
    included).
    """
    if n < 1:
        raise InvalidId(f"node count must be positive, got {n}")
    edge_list = [(int(u), int(v)) for u, v in edges]
    for u, v in edge_list:
        if not (0 <= u < n and 0 <= v < n):
            raise InvalidId(f"edge ({u},{v}) out of range for {n} nodes")
        if u == v:
            raise CycleDetected(f"self-loop on node {u}")
    edge_set = frozenset(edge_list)
    if len(edge_set) != len(edge_list):
        raise InvalidId("duplicate edges in edge list")

    observed_set = frozenset(int(v) for v in observed)
    for v in observed_set:
        if not 0 <= v < n:
            raise InvalidId(f"observed node {v} out of range")

    if labels is None:
        labels = tuple(f"z{v + 1}" for v in range(n))
    else:
        labels = tuple(str(s) for s in labels)
        if len(labels) != n:
            raise InvalidId(f"expected {n} labels, got {len(labels)}")
        if len(set(labels)) != n:
            raise InvalidId("node labels must be unique")

    parents = [[] for _ in range(n)]
    children = [[] for _ in range(n)]
    for u, v in sorted(edge_set):
        parents[v].append(u)
        children[u].append(v)

    _check_acyclic(n, children)

    # Strict descendant closure, one reverse DFS per node. Cached here so
    # collider checks in d-separation queries are O(1) set lookups.
    descendants = []
    for v in range(n):
        seen: set[int] = set()
        stack = list(children[v])
        while stack:
            w = stack.pop()
            if w not in seen:
                seen.add(w)
                stack.extend(children[w])
        descendants.append(frozenset(seen))

    return Dag(
        n=n,
        edges=edge_set,
        observed=observed_set,
        labels=labels,
        parents=tuple(tuple(sorted(p)) for p in parents),
        children=tuple(tuple(sorted(c)) for c in children),
        descendants=tuple(descendants),
    )


def _check_acyclic(n: int, children) -> None:
    indegree = [0] * n
    for cs in children:
        for c in cs:
            indegree[c] += 1
    queue = [v for v in range(n) if indegree[v] == 0]
    emitted = 0
    while queue:
        v = queue.pop()
        emitted += 1
        for c in children[v]:
            indegree[c] -= 1
            if indegree[c] == 0:
                queue.append(c)
    if emitted != n:
        cyclic = sorted(v for v in range(n) if indegree[v] > 0)
        raise CycleDetected(f"directed cycle through nodes {cyclic}")


def topological_order(dag: Dag) -> list[int]:
    """Kahn's algorithm with an id min-heap, so ties break ascending."""
    indegree = [len(dag.parents[v]) for v in range(dag.n)]
    heap = [v for v in range(dag.n) if indegree[v] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        v = heapq.heappop(heap)
        order.append(v)
        for c in dag.children[v]:
            indegree[c] -= 1
            if indegree[c] == 0:
                heapq.heappush(heap, c)
    return order


def classify_roles(dag: Dag) -> dict[int, frozenset[str]]:
    """Structural roles of each node on unobserved-pair paths.

    A node is a ``collider`` if some simple skeleton path between two
    distinct unobserved nodes traverses it with both arrows inward, and a
    ``non-collider`` if some such path traverses it as a chain or fork
    interior. Endpoints never earn a role; a node may hold both roles,
    one, or neither.
    """
    if dag.n > MAX_PATH_ENUM_NODES:
        raise GraphTooLarge(
            f"role classification enumerates paths; {dag.n} nodes exceeds "
            f"the {MAX_PATH_ENUM_NODES}-node limit"
        )
    roles: dict[int, set[str]] = {v: set() for v in range(dag.n)}
    for a, b in combinations(dag.unobserved, 2):
        for path in _simple_skeleton_paths(dag, a, b):
            for i in range(1, len(path) - 1):
                prev, v, nxt = path[i - 1], path[i], path[i + 1]
                if (prev, v) in dag.edges and (nxt, v) in dag.edges:
                    roles[v].add(COLLIDER)
                else:
                    roles[v].add(NON_COLLIDER)
    return {v: frozenset(r) for v, r in roles.items()}


def _simple_skeleton_paths(dag: Dag, start: int, goal: int):
    """Yield every simple path between two nodes in the undirected skeleton."""
    path = [start]
    on_path = {start}

    def extend(v):
        if v == goal:
            yield list(path)
            return
        for w in dag.neighbors(v):
            if w not in on_path:
                path.append(w)
                on_path.add(w)
                yield from extend(w)
                path.pop()
                on_path.remove(w)

    yield from extend(start)


def random_dag(rng, n: int, edge_prob: float = 0.4, observed_prob: float = 0.4) -> Dag:
    """Random DAG: strictly upper-triangular adjacency under a random
    node permutation, each node observed independently."""
    perm = [int(v) for v in rng.permutation(n)]
    edges = [
        (perm[i], perm[j])
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < edge_prob
    ]
    observed = {v for v in range(n) if rng.random() < observed_prob}
    return build_dag(n, edges, observed)


# --- JSON graph format -------------------------------------------------
#
# {"nodes": [{"id": 0, "label": "z1", "observed": false}, ...],
#  "edges": [[0, 1], [2, 1], [3, 2]]}
#
# Unknown keys are rejected and ids must be dense 0..n-1.

_NODE_KEYS = {"id", "label", "observed"}


def graph_from_json(obj) -> Dag:
    if not isinstance(obj, dict):
        raise FormatError("graph JSON must be an object")
    unknown = set(obj) - {"nodes", "edges"}
    if unknown:
        raise FormatError(f"unknown graph keys: {sorted(unknown)}")
    if "nodes" not in obj or "edges" not in obj:
        raise FormatError("graph JSON needs 'nodes' and 'edges'")
    nodes = obj["nodes"]
    if not isinstance(nodes, list) or not nodes:
        raise FormatError("'nodes' must be a non-empty list")

    n = len(nodes)
    labels: list[str | None] = [None] * n
    observed = set()
    seen_ids = set()
    for entry in nodes:
        if not isinstance(entry, dict):
            raise FormatError("each node must be an object")
        unknown = set(entry) - _NODE_KEYS
        if unknown:
            raise FormatError(f"unknown node keys: {sorted(unknown)}")
        if "id" not in entry or not isinstance(entry["id"], int):
            raise FormatError("each node needs an integer 'id'")
        i = entry["id"]
        if not 0 <= i < n or i in seen_ids:
            raise FormatError(f"node ids must be dense 0..{n - 1} without repeats")
        seen_ids.add(i)
        labels[i] = str(entry.get("label", f"z{i + 1}"))
        if not isinstance(entry.get("observed", False), bool):
            raise FormatError("'observed' must be a boolean")
        if entry.get("observed", False):
            observed.add(i)

    edges = obj["edges"]
    if not isinstance(edges, list):
        raise FormatError("'edges' must be a list")
    pairs = []
    for e in edges:
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(x, int) for x in e)):
            raise FormatError(f"edge {e!r} is not a pair of integer ids")
        pairs.append((e[0], e[1]))

    return build_dag(n, pairs, observed, labels)


def graph_to_json(dag: Dag) -> dict:
    return {
        "nodes": [
            {"id": v, "label": dag.labels[v], "observed": v in dag.observed}
            for v in range(dag.n)
        ],
        "edges": [[u, v] for u, v in sorted(dag.edges)],
    }
