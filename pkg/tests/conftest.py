"""Shared fixtures: small hand-built maps plus lattice and random instances.

Each hand-built fixture has closed-form voltages/widths worked out in the
tests that use it, so they double as oracles.
"""

import numpy as np
import pytest

from smithtile import build_map, make_lattice, random_map, solve_voltage


@pytest.fixture(scope="session")
def path_map():
    # v0 - a - v1 with unit conductances.  h = [0, 1/2, 1], eta = 1/2.
    return build_map(3, [(0, 1, 1.0), (1, 2, 1.0)],
                     [[0], [1, 2], [3]], marked=(0, 2))


@pytest.fixture(scope="session")
def path4_map():
    # v0 - a - b - v1, unit conductances.  h = [0, 1/3, 2/3, 1].
    return build_map(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)],
                     [[0], [1, 2], [3, 4], [5]], marked=(0, 3))


@pytest.fixture(scope="session")
def parallel3_map():
    # three parallel unit edges between the marked poles; eta = 3.
    return build_map(2, [(0, 1, 1.0)] * 3,
                     [[0, 2, 4], [5, 3, 1]], marked=(0, 1))


@pytest.fixture(scope="session")
def rung_map():
    # two disjoint 2-paths v0-a-v1 and v0-b-v1 plus a rung a-b carrying
    # zero current by symmetry: h(a) = h(b) = 1/2.
    return build_map(4, [(0, 1, 1.0), (1, 3, 1.0), (0, 2, 1.0),
                         (2, 3, 1.0), (1, 2, 1.0)],
                     [[0, 4], [1, 8, 2], [5, 6, 9], [3, 7]],
                     marked=(0, 3))


@pytest.fixture(scope="session")
def triangle_map():
    return build_map(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)],
                     [[0, 4], [1, 2], [3, 5]], marked=(0, 2))


@pytest.fixture(scope="session")
def weighted_triangle_map():
    # spanning-tree weights proportional to conductance products:
    # {01,12}: 2, {01,02}: 2, {12,02}: 1 -> probs 0.4 / 0.4 / 0.2.
    return build_map(3, [(0, 1, 2.0), (1, 2, 1.0), (0, 2, 1.0)],
                     [[0, 4], [1, 2], [3, 5]], marked=(0, 2))


@pytest.fixture(scope="session")
def lattice8():
    return make_lattice(8, 2.0)


@pytest.fixture(scope="session")
def lattice16():
    return make_lattice(16, 2.0)


@pytest.fixture(scope="session")
def lattice8_solved(lattice8):
    m, emb = lattice8
    return m, emb, solve_voltage(m)


@pytest.fixture(scope="session")
def random_maps():
    """Twenty generic weighted maps with embeddings, assorted sizes."""
    return [random_map(seed) for seed in range(20)]


@pytest.fixture(scope="session")
def small_random_maps():
    """Five maps small enough for the dense exact-law recursions."""
    out = []
    for seed in range(5):
        m, emb = random_map(seed, n=5, H=1.2, splits=2, diagonals=1,
                            deletions=1)
        assert m.num_vertices <= 50
        out.append((m, emb))
    return out
