"""Rectangle tilings of the finite cylinder built from voltage and conjugate.

Each edge becomes a rectangle whose height is its voltage increment and whose
width is its flow, so the aspect ratio equals the conductance.  Each vertex
becomes a horizontal segment (its incoming rectangles chained side by side,
which must form one arc), each face a vertical segment.  The circumference of
the tiled cylinder is the flow strength eta and the height runs from 0 to 1.
"""

from __future__ import annotations

import colorsys
import math
from dataclasses import dataclass

import numpy as np

from .map_core import CombMap, DualMap, MapError
from .electrical import Conjugate, Voltage, harmonic_darts


class TilingError(ValueError):
    """The tiling could not be assembled from consistent data."""


def reduce_mod(x: float, eta: float) -> float:
    r = math.fmod(x, eta)
    if r < 0:
        r += eta
    # r + eta can round up to eta when r is a tiny negative
    return 0.0 if r >= eta else r


@dataclass
class SmithDiagram:
    map: CombMap
    dual: DualMap
    voltage: Voltage
    conjugate: Conjugate
    eta: float
    harm: np.ndarray        # harmonically oriented dart per edge
    rect_x0: np.ndarray     # left abscissa in [0, eta)
    rect_width: np.ndarray
    rect_y0: np.ndarray
    rect_y1: np.ndarray
    hseg_start: np.ndarray  # per vertex, arc start in [0, eta)
    hseg_len: np.ndarray
    hseg_level: np.ndarray
    vseg_x: np.ndarray      # per dual vertex
    vseg_y0: np.ndarray
    vseg_y1: np.ndarray
    sheet: np.ndarray       # per dart: integer k with rect interval + k*eta inside
                            # the tail vertex's segment interval


@dataclass
class TilingReport:
    eta: float
    overlap_area: float
    coverage_defect: float
    area_defect: float
    max_aspect_defect: float
    max_level_defect: float
    max_seg_length: float

    def passed(self, tol: float = 1e-9) -> bool:
        return (self.overlap_area <= tol and self.coverage_defect <= tol
                and self.area_defect <= tol and self.max_aspect_defect <= tol
                and self.max_level_defect <= tol
                and self.max_seg_length <= self.eta + tol)


def build_diagram(m: CombMap, dmap: DualMap, v: Voltage, c: Conjugate,
                  tol: float = 1e-9) -> SmithDiagram:
    E = m.num_edges
    eta = v.eta
    h = v.values
    harm = harmonic_darts(v)
    widths = v.dart_flow(harm)
    if np.any(widths < -tol):
        raise TilingError("negative width on a harmonically oriented edge")
    widths = np.maximum(widths, 0.0)
    y0 = h[m.dart_tail[harm]]
    y1 = h[m.dart_head[harm]]
    # the face left of the upward dart carries the smaller w
    x0 = np.array([reduce_mod(c.w_lift[m.face_of[harm[k] ^ 1]], eta) for k in range(E)])

    flows = v.dart_flow(np.arange(m.num_darts))
    hseg_start = np.zeros(m.num_vertices)
    hseg_len = np.zeros(m.num_vertices)
    sheet = np.zeros(m.num_darts, dtype=np.int64)
    scale = max(1.0, eta)
    # machine-scale flow floor: it only needs to separate exactly-symmetric
    # dead clusters (roundoff-size flows) from genuine weak currents, and the
    # contiguity checks below absorb anything between the two scales
    zf = 1e-12 * max(1.0, float(np.abs(flows).max()))
    # each flow carries cancellation noise ~ eps * conductance, so the chain
    # checks around a vertex cannot resolve below the incident conductance sum;
    # w values inherit the integration error bound carried by the conjugate
    eps = float(np.finfo(np.float64).eps)
    vs = float(max(1.0, np.abs(h).max()))
    werr = c.w_err if c.w_err is not None else np.zeros(m.num_faces)

    for x in range(m.num_vertices):
        if m.is_marked(x):
            hseg_start[x] = 0.0
            hseg_len[x] = eta
            continue
        darts = m.vertex_darts[x]
        fl = flows[darts]
        noise = 8.0 * eps * vs * float(np.sum(m.conductance[np.asarray(darts) >> 1]))
        # classify with a flow tolerance: exact symmetries leave whole clusters
        # at one potential, where rounding noise must not masquerade as current;
        # a one-sided star cannot carry balanced current, so it is noise too
        cls = np.where(fl > zf, 1, np.where(fl < -zf, -1, 0))
        if not ((cls > 0).any() and (cls < 0).any()):
            # all incident flows vanish: degenerate point segment
            hseg_start[x] = reduce_mod(c.w_lift[m.face_of[darts[0]]], eta)
            hseg_len[x] = 0.0
            for g in darts:
                k = int(g) >> 1
                a = hseg_start[x]
                sheet[g] = round((a - x0[k]) / eta)
            continue
        start_i = None
        n = len(darts)
        downs = np.flatnonzero(cls < 0)
        for i in downs:
            if cls[(i - 1) % n] >= 0:
                start_i = int(i)
                break
        if start_i is None:
            raise TilingError(f"vertex {x}: no boundary between rising and falling edges")
        anchor = reduce_mod(c.w_lift[m.face_of[darts[start_i]]], eta)
        werr_a = float(werr[m.face_of[darts[start_i]]])
        # crossing a dart CCW moves from its right face to its left, where w
        # is smaller by the flow
        pos = 0.0
        lo = hi = 0.0
        up_lo, up_hi = math.inf, -math.inf
        dn_lo, dn_hi = math.inf, -math.inf
        for j in range(n):
            i = (start_i + j) % n
            g = int(darts[i])
            f = float(flows[g])
            nxt = pos - f
            rlo = min(pos, nxt)
            lo, hi = min(lo, nxt), max(hi, nxt)
            if cls[i] > 0:
                up_lo, up_hi = min(up_lo, rlo), max(up_hi, rlo + f)
            elif cls[i] < 0:
                dn_lo, dn_hi = min(dn_lo, rlo), max(dn_hi, rlo - f)
            k = g >> 1
            s = round((anchor + rlo - x0[k]) / eta)
            allow = tol * scale + noise + 8.0 * (werr_a + float(werr[m.face_of[harm[k] ^ 1]]))
            if abs(anchor + rlo - x0[k] - s * eta) > allow:
                raise TilingError(f"vertex {x}: rectangle of edge {k} misaligned "
                                  "with the segment chain")
            sheet[g] = s
            pos = nxt
        if abs(pos) > tol * scale + noise:
            raise TilingError(f"vertex {x}: flows do not balance around the rotation")
        if lo < -tol * scale - noise:
            raise TilingError(f"vertex {x}: segment union not contiguous modulo eta")
        if dn_lo < math.inf and (abs(up_lo - dn_lo) > tol * scale + noise
                                 or abs(up_hi - dn_hi) > tol * scale + noise):
            raise TilingError(f"vertex {x}: incoming and outgoing unions differ")
        hseg_start[x] = reduce_mod(anchor + up_lo, eta) if up_lo < math.inf else anchor
        hseg_len[x] = max(0.0, hi - lo)
        if hseg_len[x] > eta + tol * scale + noise:
            raise TilingError(f"vertex {x}: segment longer than the circumference")
        # sheets refer to the stored segment frame: the reduction above may
        # move the chain origin by whole periods, and lifted drifts compare
        # tail and head frames through the shared rectangle
        r = round((anchor + up_lo - hseg_start[x]) / eta) if up_lo < math.inf else 0
        if r:
            for g in darts:
                sheet[int(g)] -= r

    # vertical segments: union of edge voltage intervals on each side of a face
    F = m.num_faces
    vx = np.array([reduce_mod(c.w_lift[f], eta) for f in range(F)])
    vy0 = np.full(F, np.nan)
    vy1 = np.full(F, np.nan)
    east, west = [[] for _ in range(F)], [[] for _ in range(F)]
    for k in range(E):
        iv = (float(y0[k]), float(y1[k]))
        east[int(m.face_of[harm[k] ^ 1])].append(iv)   # rect east of its left face
        west[int(m.face_of[harm[k]])].append(iv)       # rect west of its right face
    for f in range(F):
        spans = []
        for ivs in (east[f], west[f]):
            if not ivs:
                continue
            ivs.sort()
            lo, hi = ivs[0]
            for a, b in ivs[1:]:
                if a > hi + tol:
                    raise TilingError(f"face {f}: vertical segment union not contiguous")
                hi = max(hi, b)
            spans.append((lo, hi))
        if not spans:
            raise TilingError(f"face {f}: no incident edges")
        if len(spans) == 2 and (abs(spans[0][0] - spans[1][0]) > tol
                                or abs(spans[0][1] - spans[1][1]) > tol):
            raise TilingError(f"face {f}: left and right unions differ")
        vy0[f], vy1[f] = spans[0]

    return SmithDiagram(m, dmap, v, c, eta, harm, x0, widths, y0, y1,
                        hseg_start, hseg_len, h.copy(), vx, vy0, vy1, sheet)


@dataclass
class SmithEmbedding:
    diagram: SmithDiagram
    points: np.ndarray          # (V, 2): (Re in [0, eta), Im in [0, 1])

    @property
    def eta(self):
        return self.diagram.eta


def smith_embedding(d: SmithDiagram) -> SmithEmbedding:
    """Midpoints of the horizontal segments; marked vertices sit at angle 0."""
    V = d.map.num_vertices
    pts = np.zeros((V, 2))
    for x in range(V):
        if d.map.is_marked(x):
            pts[x] = (0.0, 0.0 if x == d.map.v0 else 1.0)
        else:
            pts[x] = (reduce_mod(d.hseg_start[x] + d.hseg_len[x] / 2.0, d.eta),
                      d.hseg_level[x])
    return SmithEmbedding(d, pts)


def dart_drift(d: SmithDiagram, dart: int) -> float:
    """Lifted displacement of segment midpoints across one walk step.

    Sums of drifts telescope: around any closed dart cycle they add up to
    eta times the cycle's winding.
    """
    m = d.map
    x, y = int(m.dart_tail[dart]), int(m.dart_head[dart])
    mid_x = d.hseg_start[x] + d.hseg_len[x] / 2.0
    mid_y = d.hseg_start[y] + d.hseg_len[y] / 2.0
    shift = int(d.sheet[dart]) - int(d.sheet[dart ^ 1])
    return mid_y - mid_x + d.eta * shift


def _circle_pieces(x0: float, width: float, eta: float):
    """Split an arc starting at x0 in [0, eta) into linear pieces."""
    if width <= 0:
        return []
    if x0 + width <= eta:
        return [(x0, x0 + width)]
    return [(x0, eta), (0.0, x0 + width - eta)]


def validate(d: SmithDiagram, tol: float = 1e-9) -> TilingReport:
    """Exhaustive tiling checks; returns a report, never raises."""
    eta = d.eta
    heights = d.rect_y1 - d.rect_y0
    aspect = np.abs(d.rect_width - d.map.conductance * heights)
    max_aspect = float(aspect.max()) if len(aspect) else 0.0
    area_defect = abs(float(np.sum(d.rect_width * heights)) - eta)

    ys = np.unique(np.concatenate([d.rect_y0, d.rect_y1]))
    overlap_area = 0.0
    covered = 0.0
    for a, b in zip(ys[:-1], ys[1:]):
        if b <= a:
            continue
        act = np.flatnonzero((d.rect_y0 <= a) & (d.rect_y1 >= b) & (d.rect_width > 0))
        pieces = []
        for k in act:
            pieces.extend(_circle_pieces(float(d.rect_x0[k]), float(d.rect_width[k]), eta))
        pieces.sort()
        total = sum(q - p for p, q in pieces)
        union = 0.0
        cur_lo, cur_hi = None, None
        for p, q in pieces:
            if cur_hi is None or p > cur_hi:
                if cur_hi is not None:
                    union += cur_hi - cur_lo
                cur_lo, cur_hi = p, q
            else:
                cur_hi = max(cur_hi, q)
        if cur_hi is not None:
            union += cur_hi - cur_lo
        overlap_area += (total - union) * (b - a)
        covered += union * (b - a)
    coverage_defect = abs(eta * 1.0 - covered)

    max_level = 0.0
    for a in np.unique(d.hseg_level):
        seg = float(np.sum(d.hseg_len[d.hseg_level == a]))
        span = float(np.sum(d.rect_width[(d.rect_y0 < a) & (d.rect_y1 > a)]))
        max_level = max(max_level, abs(seg + span - eta))

    return TilingReport(eta, overlap_area, coverage_defect, area_defect,
                        max_aspect, max_level, float(d.hseg_len.max()))


def contact_violations(d: SmithDiagram, tol: float = 1e-9) -> int:
    """Count adjacency mismatches: rectangles meeting along a horizontal
    stretch must come from edges sharing a vertex; along a vertical stretch,
    from edges sharing a face.  tol gates which stretches are significant;
    the touch test itself is machine-scale, since genuine contacts are exact
    while weakly coupled clusters pack distinct boundaries closer than any
    geometric tolerance."""
    m, eta = d.map, d.eta
    bad = 0
    E = m.num_edges
    zw = 1e-12 * max(1.0, eta)

    def arc_overlap(i, j):
        pi = _circle_pieces(float(d.rect_x0[i]), float(d.rect_width[i]), eta)
        pj = _circle_pieces(float(d.rect_x0[j]), float(d.rect_width[j]), eta)
        return sum(max(0.0, min(q1, q2) - max(p1, p2))
                   for p1, q1 in pi for p2, q2 in pj)

    for i in range(E):
        for j in range(E):
            if i == j:
                continue
            if d.rect_y1[i] == d.rect_y0[j] and arc_overlap(i, j) > tol:
                if m.dart_head[d.harm[i]] != m.dart_tail[d.harm[j]]:
                    bad += 1
    for i in range(E):
        for j in range(i + 1, E):
            yy = min(d.rect_y1[i], d.rect_y1[j]) - max(d.rect_y0[i], d.rect_y0[j])
            if yy <= tol:
                continue
            li = reduce_mod(d.rect_x0[i] + d.rect_width[i], eta)
            lj = reduce_mod(d.rect_x0[j] + d.rect_width[j], eta)
            touch_ij = abs(reduce_mod(li - d.rect_x0[j] + eta / 2, eta) - eta / 2) <= zw
            touch_ji = abs(reduce_mod(lj - d.rect_x0[i] + eta / 2, eta) - eta / 2) <= zw
            if touch_ij and m.face_of[d.harm[i]] != m.face_of[d.harm[j] ^ 1]:
                bad += 1
            if touch_ji and m.face_of[d.harm[j]] != m.face_of[d.harm[i] ^ 1]:
                bad += 1
    return bad


def render_svg(d: SmithDiagram, color_by: str = "order", width_px: int = 800,
               segments: bool = True) -> str:
    """Deterministic SVG of the unrolled cylinder; seam rectangles drawn twice."""
    if color_by not in ("order", "size"):
        raise ValueError("color_by must be 'order' or 'size'")
    eta = d.eta
    scale = width_px / eta
    hpx = scale * 1.0
    E = d.map.num_edges
    areas = d.rect_width * (d.rect_y1 - d.rect_y0)
    amax = areas.max() if E else 1.0
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width_px}" '
           f'height="{hpx:.2f}" viewBox="0 0 {width_px} {hpx:.2f}">',
           f'<rect width="{width_px}" height="{hpx:.2f}" fill="white"/>']
    order = np.argsort(d.rect_x0, kind="stable")
    rank = np.empty(E, dtype=np.int64)
    rank[order] = np.arange(E)
    for k in range(E):
        hgt = d.rect_y1[k] - d.rect_y0[k]
        if d.rect_width[k] <= 0 or hgt <= 0:
            continue
        if color_by == "order":
            hue = (rank[k] / max(1, E)) % 1.0
        else:
            hue = 0.7 * (1.0 - areas[k] / amax)
        r, g, b = colorsys.hsv_to_rgb(hue, 0.65, 0.95)
        fill = f"#{int(r * 255):02x}{int(g * 255):02x}{int(b * 255):02x}"
        for p, q in _circle_pieces(float(d.rect_x0[k]), float(d.rect_width[k]), eta):
            x = p * scale
            w = (q - p) * scale
            y = (1.0 - d.rect_y1[k]) * hpx
            hh = hgt * hpx
            out.append(f'<rect x="{x:.3f}" y="{y:.3f}" width="{w:.3f}" '
                       f'height="{hh:.3f}" fill="{fill}" stroke="black" '
                       f'stroke-width="0.4"/>')
    if segments:
        for x in range(d.map.num_vertices):
            if d.hseg_len[x] <= 0:
                continue
            y = (1.0 - d.hseg_level[x]) * hpx
            for p, q in _circle_pieces(float(d.hseg_start[x]), float(d.hseg_len[x]), eta):
                out.append(f'<line x1="{p * scale:.3f}" y1="{y:.3f}" '
                           f'x2="{q * scale:.3f}" y2="{y:.3f}" '
                           f'stroke="#333333" stroke-width="1.0"/>')
    out.append("</svg>")
    return "\n".join(out)
