import itertools

import numpy as np
import pytest

from auxsel import (
    bayes_ball,
    build_dag,
    d_separated,
    d_separated_oracle,
    partition,
)
from auxsel.errors import GraphTooLarge, NotObserved, OverlappingSets
from tests.conftest import make_corpus


# --- Bayes-ball -----------------------------------------------------------

def test_bayes_ball_opens_conditioned_collider(fig1d):
    result = bayes_ball(fig1d, {0}, {1})
    assert 2 in result.reached  # z3 reachable once the collider z2 is conditioned


def test_bayes_ball_blocked_without_collider(fig1d):
    result = bayes_ball(fig1d, {0}, {3})
    assert result.reached == frozenset({0})


def test_bayes_ball_disconnected():
    dag = build_dag(2, [], set())
    assert bayes_ball(dag, {0}, set()).reached == frozenset({0})


def test_bayes_ball_excludes_conditioning_and_observed(fig1d):
    result = bayes_ball(fig1d, {0}, {1})
    assert not result.reached & result.conditioning
    assert not result.reached & fig1d.observed


def test_bayes_ball_overlap_error(fig1d):
    with pytest.raises(OverlappingSets):
        bayes_ball(fig1d, {0, 1}, {1})


def test_bayes_ball_monotone_in_sources(small_corpus):
    for dag in small_corpus[:60]:
        if dag.n < 3:
            continue
        base = bayes_ball(dag, {0}, set()).reached
        grown = bayes_ball(dag, {0, 1}, set()).reached
        assert base <= grown


# --- d-separation ---------------------------------------------------------

def test_dsep_fig1d_paper_cases(fig1d):
    assert d_separated(fig1d, {0}, {2}, {3}) is True
    assert d_separated(fig1d, {0}, {2}, {1, 3}) is False


def test_dsep_blocked_chain():
    chain = build_dag(3, [(0, 1), (1, 2)], set())
    assert d_separated(chain, {0}, {2}, {1}) is True
    assert d_separated(chain, {0}, {2}, set()) is False


def test_dsep_requires_disjoint_nonempty(fig1d):
    with pytest.raises(OverlappingSets):
        d_separated(fig1d, {0}, {0}, set())
    with pytest.raises(OverlappingSets):
        d_separated(fig1d, {0}, set(), set())
    with pytest.raises(OverlappingSets):
        d_separated(fig1d, {0}, {2}, {0})


# --- brute-force oracle ---------------------------------------------------

def test_oracle_textbook_collider():
    collider = build_dag(3, [(0, 2), (1, 2)], set())
    assert d_separated_oracle(collider, {0}, {1}, set()) is True
    assert d_separated_oracle(collider, {0}, {1}, {2}) is False


def test_oracle_conditioned_descendant_opens_collider():
    dag = build_dag(4, [(0, 2), (1, 2), (2, 3)], set())
    assert d_separated_oracle(dag, {0}, {1}, {3}) is False


def test_oracle_refuses_large_graphs():
    big = build_dag(21, [(i, i + 1) for i in range(20)], set())
    with pytest.raises(GraphTooLarge):
        d_separated_oracle(big, {0}, {20}, set())


def test_oracle_agrees_on_fig1d_conditioning_lattice(fig1d):
    for k in range(3):
        for cond in itertools.combinations((1, 3), k):
            expected = d_separated_oracle(fig1d, {0}, {2}, set(cond))
            assert d_separated(fig1d, {0}, {2}, set(cond)) == expected


def test_oracle_equivalence_on_corpus(small_corpus):
    """Bayes-ball against path enumeration over every pair and every
    conditioning subset of the remaining nodes."""
    queries = 0
    for dag in small_corpus:
        for a, b in itertools.combinations(range(dag.n), 2):
            rest = [v for v in range(dag.n) if v not in (a, b)]
            for k in range(len(rest) + 1):
                for cond in itertools.combinations(rest, k):
                    fast = d_separated(dag, {a}, {b}, set(cond))
                    slow = d_separated_oracle(dag, {a}, {b}, set(cond))
                    assert fast == slow, (
                        f"mismatch on n={dag.n} edges={sorted(dag.edges)} "
                        f"a={a} b={b} cond={cond}"
                    )
                    queries += 1
    assert queries > 3000


def test_dsep_symmetry(small_corpus):
    rng = np.random.default_rng(2)
    for dag in small_corpus[:80]:
        if dag.n < 3:
            continue
        a, b, c = rng.choice(dag.n, size=3, replace=False)
        assert d_separated(dag, {a}, {b}, {c}) == d_separated(dag, {b}, {a}, {c})


# --- partition ------------------------------------------------------------

def test_partition_fig1d_paper_cases(fig1d):
    assert partition(fig1d, {1}).groups == ((0, 2),)
    assert partition(fig1d, {3}).groups == ((0,), (2,))
    assert partition(fig1d, {1, 3}).groups == ((0, 2),)


def test_partition_fig1c(fig1c):
    assert partition(fig1c, {4}).groups == ((0,), (1,), (2, 3))


def test_partition_rejects_unobserved_conditioning(fig1d):
    with pytest.raises(NotObserved):
        partition(fig1d, {0})


def test_partition_records_unconditioned_observed(fig1d):
    part = partition(fig1d, {3})
    assert part.unconditioned_observed == frozenset({1})


def check_partition_laws(dag, conditioning):
    part = partition(dag, conditioning)
    members = [v for g in part.groups for v in g]
    # disjoint cover of the unobserved nodes
    assert sorted(members) == list(dag.unobserved)
    assert len(set(members)) == len(members)
    # inter-group separation, re-verified with the oracle
    for g1, g2 in itertools.combinations(part.groups, 2):
        for x in g1:
            for y in g2:
                assert d_separated_oracle(dag, {x}, {y}, conditioning)
    # intra-group cohesion: the pairwise d-connection relation must link
    # every member (d-connection is not transitive, so connectivity of the
    # relation graph is the defining property, not pairwise connection)
    for group in part.groups:
        if len(group) == 1:
            continue
        linked = {group[0]}
        frontier = [group[0]]
        while frontier:
            x = frontier.pop()
            for y in group:
                if y not in linked and not d_separated_oracle(dag, {x}, {y}, conditioning):
                    linked.add(y)
                    frontier.append(y)
        assert linked == set(group), f"group {group} not d-connected as a component"


def test_partition_laws_on_corpus(small_corpus):
    for dag in small_corpus:
        observed = sorted(dag.observed)
        for k in range(len(observed) + 1):
            for cond in itertools.combinations(observed, k):
                check_partition_laws(dag, frozenset(cond))


def test_partition_nontransitive_collider_merges():
    # z1 -> z2 <- z3 with everything latent: z1 and z3 are marginally
    # independent but both depend on z2, so the three collapse to one group.
    dag = build_dag(3, [(0, 1), (2, 1)], set())
    assert partition(dag, set()).groups == ((0, 1, 2),)
    assert d_separated_oracle(dag, {0}, {2}, set()) is True
