import numpy as np
import pytest

from copgambler.graph import generate


def small_graphs():
    """The n <= 8 instances shared by the exact and Monte Carlo checks."""
    graphs = {
        "S4": generate("star", 4),
        "P4": generate("path", 4),
        "C4": generate("cycle", 4),
        "P2": generate("path", 2),
        "K3": generate("cycle", 3),
    }
    for n, seed in [(5, 1), (6, 2), (7, 3), (8, 4)]:
        graphs[f"T{n}s{seed}"] = generate("random_tree", n, seed)
    return graphs


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture
def star4():
    return generate("star", 4)
