"""Property-based checks of the algebraic helpers and small-map laws."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from smithtile import (build_map, dcmp, excursion_from_increments, reduce_mod,
                       solve_voltage, step_law, wrap_angle, wrap_signed)
from smithtile.map_core import insert_vertices

TWO_PI = 2.0 * math.pi

finite = st.floats(min_value=-1e6, max_value=1e6,
                   allow_nan=False, allow_infinity=False)
conductances = st.floats(min_value=0.05, max_value=50.0,
                         allow_nan=False, allow_infinity=False)


@settings(max_examples=80, deadline=None)
@given(finite)
def test_wrap_angle_is_congruent(x):
    r = wrap_angle(x)
    assert 0.0 <= r < TWO_PI
    k = (x - r) / TWO_PI
    assert abs(k - round(k)) < 1e-6


@settings(max_examples=80, deadline=None)
@given(finite, st.floats(min_value=0.1, max_value=100.0))
def test_wrap_signed_range(x, period):
    r = wrap_signed(x, period)
    assert -period / 2 < r <= period / 2 + 1e-12
    k = (x - r) / period
    assert abs(k - round(k)) < 1e-6


@settings(max_examples=80, deadline=None)
@given(finite, st.floats(min_value=0.1, max_value=100.0))
def test_reduce_mod_range(x, eta):
    r = reduce_mod(x, eta)
    assert 0.0 <= r < eta
    k = (x - r) / eta
    assert abs(k - round(k)) < 1e-6


@settings(max_examples=50, deadline=None)
@given(st.lists(conductances, min_size=2, max_size=7))
def test_star_step_law_proportional(cs):
    k = len(cs)
    edges = [(0, i + 1, c) for i, c in enumerate(cs)]
    rotation = [[2 * i for i in range(k)]] + [[2 * i + 1] for i in range(k)]
    m = build_map(k + 1, edges, rotation, marked=(1, 2))
    law = step_law(m, 0)
    tot = sum(cs)
    assert sum(law.values()) == pytest.approx(1.0, abs=1e-12)
    for i, c in enumerate(cs):
        assert law[i + 1] == pytest.approx(c / tot, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(conductances, conductances)
def test_series_flow_strength(c1, c2):
    m = build_map(3, [(0, 1, c1), (1, 2, c2)], [[0], [1, 2], [3]],
                  marked=(0, 2))
    v = solve_voltage(m)
    assert v.eta == pytest.approx(1.0 / (1.0 / c1 + 1.0 / c2), rel=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.lists(conductances, min_size=2, max_size=5))
def test_parallel_flow_strength(cs):
    k = len(cs)
    edges = [(0, 1, c) for c in cs]
    rotation = [[2 * i for i in range(k)],
                [2 * i + 1 for i in range(k - 1, -1, -1)]]
    m = build_map(2, edges, rotation, marked=(0, 1))
    v = solve_voltage(m)
    assert v.eta == pytest.approx(sum(cs), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(conductances, st.floats(min_value=0.01, max_value=0.99))
def test_split_preserves_series_conductance(c, t):
    m = build_map(2, [(0, 1, c)], [[0], [1]], marked=(0, 1))
    m2, _, origin = insert_vertices(m, None, [(0, t)])
    assert origin.tolist() == [0, 0]
    assert 1.0 / np.sum(1.0 / m2.conductance) == pytest.approx(c, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)),
                min_size=1, max_size=6),
       st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)),
                min_size=1, max_size=6),
       st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)),
                min_size=1, max_size=6))
def test_dcmp_metric_properties(p, q, r):
    P, Q, R = np.array(p), np.array(q), np.array(r)
    assert dcmp(P, Q) == dcmp(Q, P)
    assert dcmp(P, P) == 0.0
    assert dcmp(P, R) <= dcmp(P, Q) + dcmp(Q, R) + 1e-9


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(min_value=0.0, max_value=5.0), min_size=1,
                max_size=10),
       st.lists(st.floats(min_value=0.0, max_value=5.0), min_size=1,
                max_size=10))
def test_excursion_from_heights(mid_l, mid_r):
    # any nonnegative height profile pinned to zero at both ends is a valid
    # excursion; the lattice values must reproduce the profile
    n = max(len(mid_l), len(mid_r))
    hl = np.array([0.0] + mid_l + [0.0] * (n - len(mid_l)) + [0.0])
    hr = np.array([0.0] + mid_r + [0.0] * (n - len(mid_r)) + [0.0])
    exc = excursion_from_increments(np.diff(hl), np.diff(hr))
    exc.check()
    assert exc.n == n + 1
    assert np.allclose(exc.l, hl, atol=1e-9)
    assert np.allclose(exc.r, hr, atol=1e-9)
