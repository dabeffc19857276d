"""Rectangle tilings: geometry, validation report, adjacency, rendering."""

import math

import numpy as np
import pytest

from smithtile import (TilingReport, build_diagram, conjugate,
                       contact_violations, dart_drift, dual, reduce_mod,
                       render_svg, smith_embedding, solve_voltage, validate)


def diagram_for(m, emb=None):
    v = solve_voltage(m)
    dm = dual(m, emb)
    return build_diagram(m, dm, v, conjugate(dm, v))


def report_is_exact(rep, tol=1e-12):
    return (rep.overlap_area <= tol and rep.coverage_defect <= tol
            and rep.area_defect <= tol and rep.max_aspect_defect <= tol
            and rep.max_level_defect <= tol)


# -- closed-form diagrams ----------------------------------------------------

def test_reduce_mod_range():
    assert reduce_mod(5.5, 3.0) == pytest.approx(2.5)
    assert reduce_mod(-0.5, 3.0) == pytest.approx(2.5)
    assert reduce_mod(3.0, 3.0) == 0.0
    for x in (-7.1, 0.0, 2.9, 123.4):
        assert 0.0 <= reduce_mod(x, 3.0) < 3.0


def test_path_diagram_two_belts(path_map):
    # both rectangles wrap the whole circumference eta = 1/2
    d = diagram_for(path_map)
    assert d.eta == pytest.approx(0.5, abs=1e-12)
    assert np.allclose(d.rect_width, [0.5, 0.5], atol=1e-12)
    assert np.allclose(d.rect_x0, [0.0, 0.0], atol=1e-12)
    assert np.allclose(sorted(zip(d.rect_y0, d.rect_y1)),
                       [(0.0, 0.5), (0.5, 1.0)], atol=1e-12)
    assert report_is_exact(validate(d))
    assert contact_violations(d) == 0


def test_path_smith_points(path_map):
    d = diagram_for(path_map)
    se = smith_embedding(d)
    assert np.allclose(se.points, [[0.0, 0.0], [0.25, 0.5], [0.0, 1.0]],
                       atol=1e-12)
    assert se.eta == d.eta


def test_parallel3_diagram_unit_squares(parallel3_map):
    d = diagram_for(parallel3_map)
    assert d.eta == pytest.approx(3.0, abs=1e-12)
    assert np.allclose(d.rect_width, 1.0, atol=1e-12)
    assert np.allclose(d.rect_y0, 0.0, atol=0.0)
    assert np.allclose(d.rect_y1, 1.0, atol=0.0)
    assert sorted(d.rect_x0.tolist()) == pytest.approx([0.0, 1.0, 2.0],
                                                       abs=1e-12)
    # marked vertices own full-circumference boundary arcs
    assert d.hseg_len[parallel3_map.v0] == pytest.approx(3.0)
    assert d.hseg_len[parallel3_map.v1] == pytest.approx(3.0)
    rep = validate(d)
    assert report_is_exact(rep)
    assert rep.max_seg_length == pytest.approx(3.0)
    assert contact_violations(d) == 0


def test_rung_keeps_degenerate_rectangle(rung_map):
    # the symmetric rung carries no current: its rectangle has zero width
    # but is still present, and the tiling remains exact
    d = diagram_for(rung_map)
    assert d.eta == pytest.approx(1.0, abs=1e-12)
    assert d.rect_width[4] == 0.0
    assert np.allclose(np.sort(d.rect_width), [0.0, 0.5, 0.5, 0.5, 0.5],
                       atol=1e-12)
    assert report_is_exact(validate(d))
    assert contact_violations(d) == 0


def test_report_passed_gate():
    good = TilingReport(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0)
    assert good.passed(1e-9)
    bad = TilingReport(1.0, 0.1, 0.0, 0.0, 0.0, 0.0, 1.0)
    assert not bad.passed(1e-9)


# -- generic maps ------------------------------------------------------------

def test_random_maps_tile_exactly(random_maps):
    for m, emb in random_maps:
        d = diagram_for(m, emb)
        rep = validate(d)
        assert rep.passed(1e-9), rep
        assert contact_violations(d) == 0


def test_rect_widths_are_flows(random_maps):
    m, emb = random_maps[0]
    v = solve_voltage(m)
    d = diagram_for(m, emb)
    assert np.allclose(d.rect_width, np.abs(v.dart_flow(2 * np.arange(m.num_edges))),
                       atol=1e-12)
    assert np.all(d.rect_y1 >= d.rect_y0)


# -- lattice geometry --------------------------------------------------------

def test_lattice_squares(lattice8_solved):
    m, emb, v = lattice8_solved
    d = diagram_for(m, emb)
    n = 8
    M = (m.num_vertices - 2) // n
    side = 1.0 / (M + 1)
    dh = np.abs(v.values[m.edge_head] - v.values[m.edge_tail])
    flat = dh < 1e-12
    assert np.all(d.rect_width[flat] <= 1e-12)
    assert np.allclose(d.rect_width[~flat], side, atol=1e-10)
    assert np.allclose(d.rect_y1[~flat] - d.rect_y0[~flat], side, atol=1e-10)
    assert report_is_exact(validate(d), tol=1e-10)


def test_lattice_columns_aligned(lattice8_solved):
    # segment midpoints in one lattice column share an abscissa mod eta, and
    # neighboring columns sit eta/n apart
    m, emb, v = lattice8_solved
    d = diagram_for(m, emb)
    se = smith_embedding(d)
    n = 8
    M = (m.num_vertices - 2) // n
    eta = d.eta
    cols = []
    for j in range(n):
        xs = np.array([se.points[r * n + j, 0] for r in range(M)])
        rel = np.mod(xs - xs[0] + eta / 2, eta) - eta / 2
        assert np.max(np.abs(rel)) < 1e-9
        cols.append(xs[0])
    for j in range(n):
        gap = reduce_mod(cols[(j + 1) % n] - cols[j], eta)
        assert gap == pytest.approx(eta / n, abs=1e-9)


# -- midpoint drift ----------------------------------------------------------

def test_drift_telescopes_around_faces(random_maps):
    m, emb = random_maps[1]
    d = diagram_for(m, emb)
    for orbit in m.face_darts:
        if any(m.is_marked(int(m.dart_tail[h])) for h in orbit):
            continue
        s = sum(dart_drift(d, int(h)) for h in orbit)
        assert abs(s) < 1e-12


def test_drift_row_cycle_winds_once(lattice8_solved):
    m, emb, v = lattice8_solved
    d = diagram_for(m, emb)
    row = [2 * (3 * 8 + j) for j in range(8)]
    s = sum(dart_drift(d, h) for h in row)
    assert s == pytest.approx(d.eta, abs=1e-12)


# -- rendering ---------------------------------------------------------------

def test_render_svg_basic(path_map):
    d = diagram_for(path_map)
    svg = render_svg(d)
    assert svg.startswith("<svg")
    assert svg.rstrip().endswith("</svg>")
    # background plus one piece per full-width belt
    assert svg.count("<rect") == 1 + 2
    assert "<line" in svg


def test_render_svg_options(parallel3_map):
    d = diagram_for(parallel3_map)
    assert render_svg(d) == render_svg(d)
    assert render_svg(d, color_by="size") != render_svg(d, color_by="order")
    no_seg = render_svg(d, segments=False)
    assert "<line" not in no_seg
    narrow = render_svg(d, width_px=300)
    assert 'width="300"' in narrow
    with pytest.raises(ValueError, match="color_by"):
        render_svg(d, color_by="rainbow")


def test_render_svg_splits_seam_rectangles(random_maps):
    m, emb = random_maps[0]
    d = diagram_for(m, emb)
    eta = d.eta
    seam = sum(1 for k in range(m.num_edges)
               if d.rect_width[k] > 0 and d.rect_x0[k] + d.rect_width[k] > eta)
    drawn = sum(1 for k in range(m.num_edges)
                if d.rect_width[k] > 0 and d.rect_y1[k] > d.rect_y0[k])
    svg = render_svg(d, segments=False)
    assert svg.count("<rect") == 1 + drawn + seam
