import numpy as np
import pytest

from auxsel import build_dag, random_dag


@pytest.fixture
def fig1d():
    """Two observed sources: z1 -> z2 <- z3 <- z4, observed {z2, z4}."""
    return build_dag(4, [(0, 1), (2, 1), (3, 2)], {1, 3})


@pytest.fixture
def fig1c():
    """Single observed source z5: z3 -> z5, z3 -> z4, z5 -> {z1, z2, z4}."""
    return build_dag(5, [(2, 4), (2, 3), (4, 0), (4, 1), (4, 3)], {4})


@pytest.fixture
def fork5():
    """One observed root fanning out to four latents."""
    return build_dag(
        5,
        [(0, 1), (0, 2), (0, 3), (0, 4)],
        {0},
        labels=("u", "z1", "z2", "z3", "z4"),
    )


def make_corpus(count, max_nodes=6, seed=0, edge_prob=0.4, observed_prob=0.4):
    """Random DAG corpus; node counts cycle through 2..max_nodes."""
    rng = np.random.default_rng(seed)
    dags = []
    for i in range(count):
        n = 2 + i % (max_nodes - 1)
        dags.append(random_dag(rng, n, edge_prob=edge_prob, observed_prob=observed_prob))
    return dags


@pytest.fixture(scope="session")
def small_corpus():
    return make_corpus(150, max_nodes=5, seed=7)
