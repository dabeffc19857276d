"""Rotation-system maps: construction checks, duality, lifts, refinement."""

import math

import numpy as np
import pytest

from smithtile import (CylinderEmbedding, MapError, build_map,
                       check_embedding, dual, insert_vertices, lift_path,
                       path_winding, wrap_angle, wrap_signed)
from smithtile.map_core import (dual_cycle_winding_cut,
                                dual_cycle_winding_dtheta, marked_cut_path)

TWO_PI = 2.0 * math.pi


# -- construction and Euler counting ---------------------------------------

def test_counts_path(path_map):
    m = path_map
    assert (m.num_vertices, m.num_edges, m.num_faces) == (3, 2, 1)
    assert (m.v0, m.v1) == (0, 2)


def test_counts_parallel3(parallel3_map):
    m = parallel3_map
    assert (m.num_vertices, m.num_edges, m.num_faces) == (2, 3, 3)


def test_counts_rung(rung_map):
    m = rung_map
    assert (m.num_vertices, m.num_edges, m.num_faces) == (4, 5, 3)


def test_counts_triangle(triangle_map):
    m = triangle_map
    assert (m.num_vertices, m.num_edges, m.num_faces) == (3, 3, 2)


def test_twin_and_edge_of(path_map):
    m = path_map
    for h in range(m.num_darts):
        assert m.twin(h) == h ^ 1
        assert m.edge_of(h) == h >> 1
        assert m.dart_tail[h] == m.dart_head[h ^ 1]


def test_face_orbits_are_closed_walks(parallel3_map):
    m = parallel3_map
    for orbit in m.face_darts:
        for i, h in enumerate(orbit):
            g = orbit[(i + 1) % len(orbit)]
            assert m.dart_head[h] == m.dart_tail[g]


def test_torus_rotation_rejected():
    # one vertex, two self-loops interleaved: V - E + F = 1 - 2 + 1 = 0.
    with pytest.raises(MapError, match="Euler characteristic 0"):
        build_map(1, [(0, 0, 1.0), (0, 0, 1.0)], [[0, 2, 1, 3]])


def test_rotation_must_stay_at_vertex():
    with pytest.raises(MapError, match="different vertex"):
        build_map(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)],
                  [[0, 5], [1, 2], [3, 4]])


def test_rotation_must_cover_all_darts():
    with pytest.raises(MapError, match="does not cover"):
        build_map(3, [(0, 1, 1.0), (1, 2, 1.0)], [[0], [1, 2], []])


def test_rotation_duplicate_dart_rejected():
    with pytest.raises(MapError, match="appears twice"):
        build_map(3, [(0, 1, 1.0), (1, 2, 1.0)], [[0, 0], [1, 2], [3]])


def test_no_edges_rejected():
    with pytest.raises(MapError, match="at least one edge"):
        build_map(1, [], [[]])


def test_nonpositive_conductance_rejected():
    with pytest.raises(MapError, match="positive"):
        build_map(2, [(0, 1, 0.0)], [[0], [1]])
    with pytest.raises(MapError, match="positive"):
        build_map(2, [(0, 1, -2.0)], [[0], [1]])
    with pytest.raises(MapError, match="positive"):
        build_map(2, [(0, 1, math.inf)], [[0], [1]])


def test_disconnected_rejected():
    with pytest.raises(MapError, match="not connected"):
        build_map(4, [(0, 1, 1.0), (2, 3, 1.0)], [[0], [1], [2], [3]])


def test_marked_vertices_validated():
    with pytest.raises(MapError, match="distinct"):
        build_map(2, [(0, 1, 1.0)], [[0], [1]], marked=(0, 0))
    with pytest.raises(MapError, match="out of range"):
        build_map(2, [(0, 1, 1.0)], [[0], [1]], marked=(0, 5))


def test_pi_weight_counts_self_loops_twice():
    m = build_map(2, [(0, 1, 1.0), (0, 0, 2.0)], [[0, 2, 3], [1]],
                  marked=(0, 1))
    assert m.pi_weight[0] == pytest.approx(1.0 + 2.0 * 2.0)
    assert m.pi_weight[1] == pytest.approx(1.0)


def test_arrays_are_frozen(path_map):
    with pytest.raises(ValueError):
        path_map.conductance[0] = 5.0


# -- angle helpers ----------------------------------------------------------

def test_wrap_angle_range():
    assert wrap_angle(0.0) == 0.0
    assert wrap_angle(TWO_PI) == pytest.approx(0.0, abs=1e-12)
    assert wrap_angle(-0.1) == pytest.approx(TWO_PI - 0.1)
    assert 0.0 <= wrap_angle(123.456) < TWO_PI


def test_wrap_signed_halves():
    assert wrap_signed(0.0) == 0.0
    assert wrap_signed(math.pi + 0.1) == pytest.approx(0.1 - math.pi)
    assert wrap_signed(3.2, period=2.0) == pytest.approx(-0.8)
    # half-period ties land on the closed upper end of (-p/2, p/2]
    assert wrap_signed(3.0, period=2.0) == 1.0
    assert abs(wrap_signed(7.7, period=1.0)) <= 0.5


# -- embeddings, lifts, winding ---------------------------------------------

def lattice_row_loop(n, row):
    """Darts 2 * edge for the horizontal edges of one lattice row."""
    return [2 * (row * n + j) for j in range(n)]


def test_lift_path_empty(lattice8):
    m, emb = lattice8
    out = lift_path(m, emb, [])
    assert out.shape == (1,)
    assert out[0] == 0.0


def test_lift_path_row_loop_winds_once(lattice8):
    m, emb = lattice8
    darts = lattice_row_loop(8, 3)
    lifts = lift_path(m, emb, darts)
    assert lifts[0] == 0.0
    assert lifts[-1] == pytest.approx(TWO_PI, abs=1e-12)
    assert path_winding(m, emb, darts) == pytest.approx(1.0, abs=1e-12)


def test_lift_path_face_boundary_closes(lattice8):
    m, emb = lattice8
    for orbit in m.face_darts[:10]:
        if any(m.is_marked(int(m.dart_tail[h])) for h in orbit):
            continue
        lifts = lift_path(m, emb, orbit)
        assert abs(lifts[-1]) < 1e-12


def test_lift_path_rejects_non_path(lattice8):
    m, emb = lattice8
    darts = lattice_row_loop(8, 0)
    bad = [darts[0], darts[2]]          # skips a vertex
    with pytest.raises(MapError, match="do not form a path"):
        lift_path(m, emb, bad)


def test_dart_dtheta_antisymmetric(lattice8):
    m, emb = lattice8
    hs = np.arange(m.num_darts)
    dt = emb.dart_dtheta(hs)
    assert np.allclose(dt, -emb.dart_dtheta(hs ^ 1), atol=0.0)


def test_check_embedding_accepts_and_rejects(lattice8):
    m, emb = lattice8
    check_embedding(m, emb)
    bad = CylinderEmbedding(emb.theta.copy(), emb.height.copy(),
                            emb.dtheta.copy())
    # find an edge with both endpoints unmarked and tamper with it
    for k in range(m.num_edges):
        t, h = int(m.edge_tail[k]), int(m.edge_head[k])
        if not (m.is_marked(t) or m.is_marked(h)):
            bad.dtheta[k] += 0.5
            break
    with pytest.raises(MapError):
        check_embedding(m, bad)


def test_check_embedding_wrong_lengths(path_map):
    emb = CylinderEmbedding(np.zeros(2), np.zeros(2), np.zeros(2))
    with pytest.raises(MapError, match="wrong length"):
        check_embedding(path_map, emb)


# -- duality ----------------------------------------------------------------

def test_dual_of_parallel3_is_triangle_cycle(parallel3_map):
    dm = dual(parallel3_map)
    d = dm.map
    assert (d.num_vertices, d.num_edges, d.num_faces) == (3, 3, 2)
    assert np.allclose(d.conductance, 1.0)
    # every dual vertex has degree 2: a single 3-cycle
    assert all(d.degree(v) == 2 for v in range(3))


def test_dual_conductance_is_reciprocal(random_maps):
    for m, _ in random_maps[:5]:
        d = dual(m).map
        assert np.allclose(d.conductance * m.conductance, 1.0, atol=1e-12)


def test_dual_reuses_dart_ids(rung_map):
    dm = dual(rung_map)
    d = dm.map
    assert d.num_darts == rung_map.num_darts
    for h in range(rung_map.num_darts):
        # dual dart h leaves the face right of primal dart h
        assert d.dart_tail[h] == rung_map.face_of[h]


def test_double_dual_counts(random_maps):
    for m, _ in random_maps[:5]:
        d = dual(m).map
        dd = dual(d).map
        assert dd.num_vertices == m.num_vertices
        assert dd.num_edges == m.num_edges
        assert dd.num_faces == m.num_faces
        assert np.allclose(dd.conductance, m.conductance, rtol=1e-12)


def test_double_dual_faces_partition_by_primal_head(random_maps):
    # faces of the dual correspond to primal vertices: each dual face orbit
    # collects exactly the darts pointing at one primal vertex.
    for m, _ in random_maps[:5]:
        d = dual(m).map
        assert d.num_faces == m.num_vertices
        for orbit in d.face_darts:
            heads = {int(m.dart_head[h]) for h in orbit}
            assert len(heads) == 1
            assert len(orbit) == m.degree(heads.pop())


def test_dual_pole_faces_flank_marked_vertices(lattice8):
    # pole_faces lists exactly the faces incident to each marked vertex
    m, emb = lattice8
    dm = dual(m, emb)
    bot, top = dm.pole_faces
    assert bot == sorted({int(m.face_of[h]) for h in m.vertex_darts[m.v0]})
    assert top == sorted({int(m.face_of[h]) for h in m.vertex_darts[m.v1]})
    for f in bot:
        orbit = m.face_darts[f]
        assert any(int(m.dart_tail[h]) == m.v0 for h in orbit)
    assert not set(bot) & set(top)


def test_marked_cut_path_runs_bottom_to_top(lattice8):
    m, _ = lattice8
    cut = marked_cut_path(m)
    assert int(m.dart_tail[cut[0]]) == m.v0
    assert int(m.dart_head[cut[-1]]) == m.v1
    for a, b in zip(cut[:-1], cut[1:]):
        assert m.dart_head[a] == m.dart_tail[b]


def test_marked_cut_path_requires_marks(triangle_map):
    m = build_map(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)],
                  [[0, 4], [1, 2], [3, 5]])
    with pytest.raises(MapError, match="marked"):
        marked_cut_path(m)


def test_dual_cycle_winding_agreement(lattice8):
    # both winding computations must agree on dual face boundaries (0) and
    # on any closed dual cycle.
    m, emb = lattice8
    dm = dual(m, emb)
    d = dm.map
    cut = marked_cut_path(m)
    for orbit in d.face_darts[:20]:
        wc = dual_cycle_winding_cut(dm, orbit, cut=cut)
        wd = dual_cycle_winding_dtheta(dm, orbit)
        assert wc == wd


def test_dual_cycle_winding_needs_displacements(parallel3_map):
    dm = dual(parallel3_map)          # no embedding given
    with pytest.raises(MapError, match="no displacement"):
        dual_cycle_winding_dtheta(dm, dm.map.face_darts[0])


# -- refinement -------------------------------------------------------------

def test_insert_midpoint_splits_conductance(path_map):
    m2, _, origin = insert_vertices(path_map, None, [(0, 0.5)])
    assert m2.num_vertices == 4
    assert m2.num_edges == 3
    new = [k for k in range(3) if origin[k] == 0]
    assert sorted(m2.conductance[new].tolist()) == [2.0, 2.0]


def test_insert_fraction_conductances():
    m = build_map(2, [(0, 1, 3.0)], [[0], [1]], marked=(0, 1))
    m2, _, origin = insert_vertices(m, None, [(0, 1.0 / 3.0)])
    assert sorted(m2.conductance.tolist()) == pytest.approx([4.5, 9.0])


def test_insert_preserves_series_conductance(random_maps):
    m, emb = random_maps[0]
    pts = [(k, 0.3) for k in range(0, m.num_edges, 7)]
    m2, emb2, origin = insert_vertices(m, emb, pts)
    check_embedding(m2, emb2)
    inv = np.zeros(m.num_edges)
    np.add.at(inv, origin, 1.0 / m2.conductance)
    assert np.allclose(1.0 / inv, m.conductance, rtol=1e-12)


def test_insert_appends_vertices_in_order(path_map):
    m2, _, _ = insert_vertices(path_map, None, [(1, 0.25), (0, 0.75)])
    # originals keep ids 0..2; new ids 3 (edge 1) and 4 (edge 0)
    assert m2.num_vertices == 5
    tails = set(map(int, m2.edge_tail)) | set(map(int, m2.edge_head))
    assert tails == {0, 1, 2, 3, 4}
    assert (m2.v0, m2.v1) == (path_map.v0, path_map.v1)


def test_insert_rejects_bad_fractions(path_map):
    with pytest.raises(MapError, match="not in"):
        insert_vertices(path_map, None, [(0, 0.0)])
    with pytest.raises(MapError, match="not in"):
        insert_vertices(path_map, None, [(0, 1.0)])
    with pytest.raises(MapError, match="strictly increasing"):
        insert_vertices(path_map, None, [(0, 0.5), (0, 0.5)])


def test_insert_euler_still_sphere(random_maps):
    m, emb = random_maps[1]
    m2, emb2, _ = insert_vertices(m, emb, [(0, 0.5), (0, 0.75), (1, 0.1)])
    assert m2.num_vertices - m2.num_edges + m2.num_faces == 2
