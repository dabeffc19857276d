"""Random walks on cylinder maps: exact hitting laws, windings, couplings.

The conductance-weighted walk steps along darts with probability proportional
to conductance (a self-loop is stepped from either of its two darts).  The
level machinery inserts vertices so that queried voltage levels are fully
vertexed; on the augmented map the conditional law of the walk given its
height sequence is computed exactly by forward-backward recursions over level
sets, and the expected winding of the re-randomized tiled-cylinder walk is a
drift-weighted sum over the same recursion.  Monte Carlo appears only in the
Wilson-tree sampler and the disconnection estimate, where no exact form is
available.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .map_core import CombMap, CylinderEmbedding, insert_vertices, dual
from .electrical import Voltage, Conjugate, conjugate
from .smith_tiling import SmithDiagram, build_diagram, dart_drift
from .rng import make_rng


class StepBudgetExceeded(RuntimeError):
    """A simulated walk ran past its step cap without stopping."""


class InadmissibleHeights(ValueError):
    """The height sequence has zero probability for the walk."""


class LevelNotVertexed(ValueError):
    """An edge crosses the queried level strictly between its endpoints."""


# -- stepping ----------------------------------------------------------------

def step_law(m: CombMap, x: int) -> dict:
    """One-step distribution over neighbours: P(y) = sum c_xy / pi(x)."""
    darts = m.vertex_darts[x]
    c = m.conductance[darts >> 1]
    tot = float(c.sum())
    law: dict = {}
    for h, w in zip(darts, c):
        y = int(m.dart_head[h])
        law[y] = law.get(y, 0.0) + float(w) / tot
    return law


@dataclass
class WalkTrace:
    vertices: np.ndarray
    darts: np.ndarray
    offsets: np.ndarray | None = None   # cumulative real lift on the 2*pi cylinder
    embedded: np.ndarray | None = None  # re-randomized points, real-lift abscissa

    def __len__(self):
        return len(self.vertices)


def _sample_dart(m: CombMap, tables, rng, v: int) -> int:
    cum = tables[v]
    at = m.vertex_darts[v]
    r = rng.random() * cum[-1]
    i = min(int(np.searchsorted(cum, r, side="right")), len(at) - 1)
    return int(at[i])


def simulate(m: CombMap, start: int, stop_set, seed: int,
             emb: CylinderEmbedding | None = None,
             max_steps: int = 10_000_000) -> WalkTrace:
    """Run the weighted walk from ``start`` until it first enters ``stop_set``.

    Bit-reproducible for a fixed seed.  Raises StepBudgetExceeded past the cap.
    """
    stop = set(int(s) for s in stop_set)
    if not stop:
        raise ValueError("stop set must be nonempty")
    rng = make_rng(seed)
    tables = m.walk_tables()
    verts = [int(start)]
    darts: list = []
    v = int(start)
    while v not in stop:
        if len(darts) >= max_steps:
            raise StepBudgetExceeded(f"no stop vertex within {max_steps} steps")
        h = _sample_dart(m, tables, rng, v)
        v = int(m.dart_head[h])
        darts.append(h)
        verts.append(v)
    offsets = None
    if emb is not None:
        offsets = np.zeros(len(verts))
        if darts:
            offsets[1:] = np.cumsum(emb.dart_dtheta(np.array(darts)))
    return WalkTrace(np.array(verts, dtype=np.int64),
                     np.array(darts, dtype=np.int64), offsets)


def winding(trace, circumference: float) -> float:
    """Net winding of a lifted trajectory: (final lift - initial lift) over the
    circumference (2*pi for a priori traces, eta for Smith-embedded ones)."""
    off = trace.offsets if isinstance(trace, WalkTrace) else np.asarray(trace)
    if off is None:
        raise ValueError("trace carries no lift offsets")
    return float((off[-1] - off[0]) / circumference)


def embed_trace(d: SmithDiagram, trace: WalkTrace, seed: int) -> np.ndarray:
    """Re-randomized image of a walk on the tiled cylinder.

    Each visit to x maps to an independent uniform point of x's horizontal
    segment; the abscissa is lifted to the real line consistently along the
    traversed darts (seam crossings shift by eta via the sheet indices)."""
    rng = make_rng(seed)
    n = len(trace.vertices)
    pts = np.zeros((n, 2))
    shift = 0
    for i, x in enumerate(trace.vertices):
        x = int(x)
        u = rng.random()
        pts[i, 0] = d.hseg_start[x] + u * d.hseg_len[x] + shift * d.eta
        pts[i, 1] = d.hseg_level[x]
        if i < n - 1:
            g = int(trace.darts[i])
            shift += int(d.sheet[g]) - int(d.sheet[g ^ 1])
    trace.embedded = pts
    return pts


# -- level structure ---------------------------------------------------------

def realized_levels(m: CombMap, v: Voltage, tol: float = 1e-12) -> np.ndarray:
    """Sorted distinct voltage values over non-marked vertices."""
    interior = [x for x in range(m.num_vertices) if not m.is_marked(x)]
    vals = np.sort(v.values[interior])
    out: list = []
    for a in vals:
        if not out or a - out[-1] > tol:
            out.append(float(a))
    return np.array(out)


def level_set(m: CombMap, v: Voltage, a: float, tol: float = 1e-12) -> np.ndarray:
    return np.array([x for x in range(m.num_vertices)
                     if not m.is_marked(x) and abs(v.values[x] - a) <= tol],
                    dtype=np.int64)


@dataclass
class Augmented:
    map: CombMap
    voltage: Voltage
    emb: CylinderEmbedding | None
    inserted: int
    notice: str | None = None


def _augment(m: CombMap, v: Voltage, levels, emb: CylinderEmbedding | None,
             tol: float) -> Augmented:
    """Insert a vertex wherever an edge strictly crosses one of the levels.

    Sub-edges get conductance c / dt (series law), so the returned voltage is
    exact on old vertices and assigns each inserted vertex its level."""
    levels = np.sort(np.asarray(levels, dtype=np.float64))
    # collapse levels closer than tol: they name the same line
    keep = []
    for a in levels:
        if not keep or a - keep[-1] > tol:
            keep.append(float(a))
    levels = np.array(keep)
    points, new_vals = [], []
    for k in range(m.num_edges):
        ht = float(v.values[m.edge_tail[k]])
        hh = float(v.values[m.edge_head[k]])
        lo, hi = min(ht, hh), max(ht, hh)
        if hi - lo <= 2 * tol:
            continue
        inside = levels[(levels > lo + tol) & (levels < hi - tol)]
        ts = sorted((float((a - ht) / (hh - ht)), float(a)) for a in inside)
        for t, a in ts:
            points.append((k, t))
            new_vals.append(a)
    if not points:
        return Augmented(m, v, emb, 0)
    m2, emb2, _origin = insert_vertices(m, emb, points)
    # insert_vertices numbers new vertices in (edge, fraction) order = points order
    vals2 = np.concatenate([v.values, np.array(new_vals)])
    v2 = Voltage(m2, vals2, v.residual, v.eta, v.eta_mismatch)
    return Augmented(m2, v2, emb2, len(points))


def level_augment(m: CombMap, v: Voltage, a: float,
                  emb: CylinderEmbedding | None = None,
                  tol: float = 1e-12) -> Augmented:
    """Fully vertex a single level a in (0, 1).

    When a coincides (within tol) with an existing vertex value the map is
    returned unchanged with a notice; realized levels are handled wholesale by
    augment_all_levels."""
    if not (0.0 < a < 1.0):
        raise ValueError("level must lie strictly between the marked values")
    gap = np.min(np.abs(v.values - a))
    if gap <= tol:
        return Augmented(m, v, emb, 0,
                         notice=f"level {a} already realized by a vertex")
    return _augment(m, v, [a], emb, tol)


def augment_all_levels(m: CombMap, v: Voltage, extra=(),
                       emb: CylinderEmbedding | None = None,
                       tol: float = 1e-12) -> Augmented:
    """Vertex every level realized by a vertex, plus the requested extras.

    Afterwards every edge joins two consecutive realized levels, the standing
    assumption behind the exact level-set recursions.  One pass suffices since
    inserted vertices sit at levels already in the set."""
    levels = list(realized_levels(m, v, tol)) + [float(a) for a in extra]
    return _augment(m, v, levels, emb, tol)


@dataclass
class LevelMeasure:
    level: float
    vertices: np.ndarray
    mass: np.ndarray

    def as_dict(self) -> dict:
        return {int(x): float(p) for x, p in zip(self.vertices, self.mass)}

    @property
    def total(self) -> float:
        return float(self.mass.sum())


def level_measure(m: CombMap, v: Voltage, a: float, tol: float = 1e-12,
                  balance_tol: float = 1e-9) -> LevelMeasure:
    """Harmonic measure of a fully vertexed level: mass(x) = in-flow / eta.

    In-flow and out-flow must agree at every level vertex (harmonicity); the
    defect is asserted against balance_tol."""
    for k in range(m.num_edges):
        ht = float(v.values[m.edge_tail[k]])
        hh = float(v.values[m.edge_head[k]])
        if min(ht, hh) + tol < a < max(ht, hh) - tol:
            raise LevelNotVertexed(f"edge {k} crosses level {a} away from a vertex")
    verts = level_set(m, v, a, tol)
    if len(verts) == 0:
        raise ValueError(f"level {a} is not realized by any vertex")
    mass = np.zeros(len(verts))
    for i, x in enumerate(verts):
        fl = v.dart_flow(m.vertex_darts[x])
        inflow = -float(fl[fl < 0].sum())
        outflow = float(fl[fl > 0].sum())
        # rounding in each dart flow scales with its conductance, which mid-edge
        # insertion at small fractions can make large
        csum = float(np.sum(m.conductance[np.asarray(m.vertex_darts[x]) >> 1]))
        if abs(inflow - outflow) > balance_tol * max(1.0, inflow, csum):
            raise ValueError(f"vertex {x}: flow imbalance {inflow - outflow}")
        mass[i] = inflow / v.eta
    return LevelMeasure(a, verts, mass)


# -- exact conditional laws --------------------------------------------------

@dataclass
class HittingLaw:
    """Forward-backward decomposition of the walk conditioned on its heights.

    conditional[i][j] = P(X_i = levels[i][j] | full height sequence); mu[i] is
    the level measure of heights[i] on the same vertex order.  forward and
    backward are the unnormalized recursions with norm their pairing."""
    map: CombMap
    voltage: Voltage
    emb: CylinderEmbedding | None
    heights: np.ndarray
    levels: list
    conditional: list
    mu: list
    forward: list = field(repr=False, default=None)
    backward: list = field(repr=False, default=None)
    norm: float = 0.0

    def max_deviation(self) -> float:
        return max(float(np.max(np.abs(c - u)))
                   for c, u in zip(self.conditional, self.mu))


def conditional_hitting(m: CombMap, v: Voltage, heights,
                        emb: CylinderEmbedding | None = None,
                        tol: float = 1e-12) -> HittingLaw:
    """Exact conditional law of the walk given its full voltage-level sequence.

    The map is first augmented so every edge joins consecutive realized
    levels; the walk starts from the level measure of heights[0].  Dense
    recursions over the (small) level sets; no sampling."""
    heights = np.atleast_1d(np.asarray(heights, dtype=np.float64))
    if not np.all(np.isfinite(heights)):
        raise ValueError("heights must be finite")
    if np.any((heights <= 0.0) | (heights >= 1.0)):
        raise ValueError("heights must lie strictly between 0 and 1")
    aug = augment_all_levels(m, v, extra=heights, emb=emb, tol=tol)
    m2, v2 = aug.map, aug.voltage
    pi = m2.pi_weight

    levels = [level_set(m2, v2, float(a), tol) for a in heights]
    for a, lv in zip(heights, levels):
        if len(lv) == 0:
            raise InadmissibleHeights(f"no vertex at level {a}")
    index = [{int(x): j for j, x in enumerate(lv)} for lv in levels]
    N = len(heights)

    mu0 = level_measure(m2, v2, float(heights[0]), tol).as_dict()
    fwd = [np.zeros(len(lv)) for lv in levels]
    fwd[0] = np.array([mu0.get(int(x), 0.0) for x in levels[0]])
    for i in range(N - 1):
        nxt = index[i + 1]
        for j, x in enumerate(levels[i]):
            fj = fwd[i][j]
            if fj == 0.0:
                continue
            for g in m2.vertex_darts[int(x)]:
                jj = nxt.get(int(m2.dart_head[g]))
                if jj is not None:
                    fwd[i + 1][jj] += fj * float(m2.conductance[g >> 1]) / pi[x]
        if fwd[i + 1].sum() <= 0.0:
            raise InadmissibleHeights(
                f"step {i + 1}: level {heights[i + 1]} unreachable from {heights[i]}")

    bwd = [np.ones(len(lv)) for lv in levels]
    for i in range(N - 2, -1, -1):
        nxt = index[i + 1]
        for j, x in enumerate(levels[i]):
            s = 0.0
            for g in m2.vertex_darts[int(x)]:
                jj = nxt.get(int(m2.dart_head[g]))
                if jj is not None:
                    s += float(m2.conductance[g >> 1]) / pi[x] * bwd[i + 1][jj]
            bwd[i][j] = s

    norm = float(np.sum(fwd[-1]))
    if norm <= 0.0:
        raise InadmissibleHeights("height sequence has zero probability")
    cond = [fwd[i] * bwd[i] / norm for i in range(N)]
    mus = []
    for a, lv in zip(heights, levels):
        lm = level_measure(m2, v2, float(a), tol).as_dict()
        mus.append(np.array([lm.get(int(x), 0.0) for x in lv]))
    return HittingLaw(m2, v2, aug.emb, heights, levels, cond, mus,
                      forward=fwd, backward=bwd, norm=norm)


def expected_conditional_winding(m: CombMap, v: Voltage, c: Conjugate, heights,
                                 emb: CylinderEmbedding | None = None,
                                 tol: float = 1e-12) -> float:
    """Exact E[winding of the re-randomized tiled walk | height sequence].

    The uniform re-randomization on each horizontal segment has mean at the
    segment midpoint, so the expectation is the joint-law-weighted sum of
    midpoint drifts along the steps, divided by eta.  Zero by the winding law."""
    law = conditional_hitting(m, v, heights, emb=emb, tol=tol)
    m2, v2 = law.map, law.voltage
    if m2 is m:
        diag = build_diagram(m, c.dual, v, c)
    else:
        dm2 = dual(m2, law.emb)
        c2 = conjugate(dm2, v2)
        diag = build_diagram(m2, dm2, v2, c2)
    pi = m2.pi_weight
    total = 0.0
    for i in range(len(law.heights) - 1):
        nxt = {int(x): j for j, x in enumerate(law.levels[i + 1])}
        for j, x in enumerate(law.levels[i]):
            fj = law.forward[i][j]
            if fj == 0.0:
                continue
            for g in m2.vertex_darts[int(x)]:
                jj = nxt.get(int(m2.dart_head[g]))
                if jj is None:
                    continue
                wgt = fj * float(m2.conductance[g >> 1]) / pi[x] * law.backward[i + 1][jj]
                if wgt != 0.0:
                    total += wgt * dart_drift(diag, int(g))
    return total / (diag.eta * law.norm)


# -- Wilson sampling and couplings -------------------------------------------

def wilson_tree(m: CombMap, wired_set, seed: int,
                max_steps: int = 10_000_000) -> np.ndarray:
    """Sample a weighted spanning tree with the wired boundary by Wilson's
    loop-erased walks.  Returns the sorted edge indices; the law is
    proportional to the product of tree conductances."""
    wired = sorted(set(int(x) for x in wired_set))
    if not wired:
        raise ValueError("wired set must be nonempty")
    rng = make_rng(seed)
    tables = m.walk_tables()
    in_tree = np.zeros(m.num_vertices, dtype=bool)
    in_tree[wired] = True
    exit_dart = np.full(m.num_vertices, -1, dtype=np.int64)
    edges: list = []
    budget = max_steps
    for v0 in range(m.num_vertices):
        if in_tree[v0]:
            continue
        v = v0
        while not in_tree[v]:
            budget -= 1
            if budget < 0:
                raise StepBudgetExceeded("Wilson walk budget exhausted")
            h = _sample_dart(m, tables, rng, v)
            exit_dart[v] = h          # overwriting erases the loop
            v = int(m.dart_head[h])
        v = v0
        while not in_tree[v]:
            h = int(exit_dart[v])
            edges.append(h >> 1)
            in_tree[v] = True
            v = int(m.dart_head[h])
    return np.array(sorted(edges), dtype=np.int64)


def absorption_probs(m: CombMap, absorbing) -> tuple:
    """Exact absorption distribution: rows P(X hits w first | start v).

    Dense solve of (I - P_free) X = P_free->absorbing; fine for the map sizes
    this is used at."""
    absorbing = sorted(set(int(x) for x in absorbing))
    if not absorbing:
        raise ValueError("absorbing set must be nonempty")
    V = m.num_vertices
    col = {w: j for j, w in enumerate(absorbing)}
    free = [x for x in range(V) if x not in col]
    fidx = {x: i for i, x in enumerate(free)}
    nf, na = len(free), len(absorbing)
    P = np.zeros((nf, nf))
    B = np.zeros((nf, na))
    pi = m.pi_weight
    for i, x in enumerate(free):
        for g in m.vertex_darts[x]:
            y = int(m.dart_head[g])
            p = float(m.conductance[g >> 1]) / pi[x]
            if y in col:
                B[i, col[y]] += p
            else:
                P[i, fidx[y]] += p
    out = np.zeros((V, na))
    for w, j in col.items():
        out[w, j] = 1.0
    if nf:
        out[free] = np.linalg.solve(np.eye(nf) - P, B)
    return out, np.array(absorbing, dtype=np.int64)


def projected_step_law(m: CombMap, originals, x: int) -> dict:
    """Law of the next original vertex distinct from x hit by the refined walk
    (the jump chain of the projection).  Matches step_law of the unrefined map
    at loop-free vertices by the series law."""
    originals = set(int(s) for s in originals)
    targets = sorted(originals - {int(x)})
    probs, order = absorption_probs(m, targets)
    return {int(w): float(probs[int(x), j]) for j, w in enumerate(order)}


@dataclass
class TVReport:
    tv: float
    tv_exact: bool
    p_disconnect: float
    p_not_disconnect: float
    stderr: float
    samples: int
    bound_ok: bool


EXACT_TV_LIMIT = 200


def _trace_disconnects(m: CombMap, visited: set, used_edges: set,
                       y: int, W: set) -> bool:
    """Planar test: does the traced curve separate y from every W vertex?

    The complement of the trace deformation-retracts onto the graph whose
    nodes are faces plus unvisited vertices, with face-face moves across
    untraversed edges and face-vertex incidences at unvisited vertices.
    Reaching any face incident to W counts as contact (slightly generous at
    the trace endpoint, which keeps the upper-bound direction safe)."""
    if y in visited:
        return True    # the walk hit y: coupling succeeds, count with disconnection
    target_faces = set()
    for w in W:
        for h in m.vertex_darts[int(w)]:
            target_faces.add(int(m.face_of[h]))
    seen_v = {int(y)}
    seen_f: set = set()
    queue: deque = deque()
    for h in m.vertex_darts[int(y)]:
        f = int(m.face_of[h])
        if f not in seen_f:
            seen_f.add(f)
            queue.append(f)
    while queue:
        f = queue.popleft()
        if f in target_faces:
            return False
        for h in m.face_darts[f]:
            k = int(h) >> 1
            if k not in used_edges:
                g = int(m.face_of[h ^ 1])
                if g not in seen_f:
                    seen_f.add(g)
                    queue.append(g)
            t = int(m.dart_tail[h])
            if t in visited or t in seen_v:
                continue
            if t in W:
                return False
            seen_v.add(t)
            for hh in m.vertex_darts[t]:
                g = int(m.face_of[hh])
                if g not in seen_f:
                    seen_f.add(g)
                    queue.append(g)
    return True


def tv_coupling_check(m: CombMap, W, x: int, y: int, samples: int, seed: int,
                      max_steps: int = 10_000_000) -> TVReport:
    """Compare dTV(exit laws from x and y) against the disconnection bound.

    The total variation is exact (absorption solves) below EXACT_TV_LIMIT
    vertices, Monte Carlo above; the probability that the walk from x fails
    to disconnect y from W is always Monte Carlo, with a planarity-based
    trace test.  bound_ok reports tv <= p_not_disconnect + 3 stderr."""
    W = set(int(s) for s in W)
    if int(x) in W or int(y) in W:
        raise ValueError("x and y must lie outside the wired set")
    rng = make_rng(seed)
    tables = m.walk_tables()

    if m.num_vertices <= EXACT_TV_LIMIT:
        probs, _order = absorption_probs(m, sorted(W))
        tv = 0.5 * float(np.abs(probs[int(x)] - probs[int(y)]).sum())
        tv_exact = True
    else:
        counts = np.zeros((2, len(W)))
        order = {w: j for j, w in enumerate(sorted(W))}
        for row, start in enumerate((int(x), int(y))):
            for _ in range(samples):
                v = start
                steps = 0
                while v not in W:
                    steps += 1
                    if steps > max_steps:
                        raise StepBudgetExceeded("absorption walk budget exhausted")
                    v = int(m.dart_head[_sample_dart(m, tables, rng, v)])
                counts[row, order[v]] += 1
        tv = 0.5 * float(np.abs(counts[0] - counts[1]).sum()) / samples
        tv_exact = False

    disc = 0
    for _ in range(samples):
        v = int(x)
        visited = {v}
        used: set = set()
        steps = 0
        while v not in W:
            steps += 1
            if steps > max_steps:
                raise StepBudgetExceeded("coupling walk budget exhausted")
            h = _sample_dart(m, tables, rng, v)
            used.add(h >> 1)
            v = int(m.dart_head[h])
            visited.add(v)
        if _trace_disconnects(m, visited, used, int(y), W):
            disc += 1
    p_disc = disc / samples
    p_not = 1.0 - p_disc
    stderr = float(np.sqrt(p_disc * p_not / samples))
    return TVReport(tv, tv_exact, p_disc, p_not, stderr, samples,
                    bound_ok=tv <= p_not + 3.0 * stderr + 1e-12)


# -- exact-law sweep (used by the verify command) -----------------------------

def admissible_sequences(m: CombMap, v: Voltage, count: int, length: int,
                         seed: int, tol: float = 1e-12) -> list:
    """Random height sequences stepping between adjacent realized levels.

    Consecutive heights always differ: the exact hitting and winding laws
    need every step to change level (a map with zero-gradient edges can make
    same-level steps, but those break the two-height dichotomy the laws rest
    on).  A map with a single interior level only admits one-point sequences,
    for which both laws are vacuous.  A map with no interior vertices at all
    has no realized levels; the laws still apply to any levels once those are
    vertexed, so quartile heights stand in as the ladder."""
    levels = realized_levels(m, v, tol)
    if len(levels) == 0:
        levels = np.array([0.25, 0.5, 0.75])
    rng = make_rng(seed)
    out = []
    for _ in range(count):
        i = int(rng.integers(len(levels)))
        seq = [float(levels[i])]
        while len(seq) < length and len(levels) > 1:
            if i == 0:
                i += 1
            elif i == len(levels) - 1:
                i -= 1
            else:
                i += 1 if rng.random() < 0.5 else -1
            seq.append(float(levels[i]))
        out.append(seq)
    return out


def exact_law_report(m: CombMap, v: Voltage,
                     emb: CylinderEmbedding | None = None,
                     num_sequences: int = 5, length: int = 4,
                     seed: int = 0) -> dict:
    """Max deviations of the exact walk laws on one map, for reporting.

    Runs the hitting law and winding law over random admissible sequences,
    checks level-measure totals on the fully augmented map, and the walk
    projection on a global half-edge refinement."""
    dmap = dual(m, emb)
    c = conjugate(dmap, v)

    aug = augment_all_levels(m, v, emb=emb)
    # realized levels can sit arbitrarily close together, and slicing an edge
    # at nearly equal fractions amplifies machine noise by the resulting
    # conductance; the floor tells the caller what the map can resolve
    noise = float(np.finfo(np.float64).eps) * float(max(1.0, aug.map.conductance.max()))
    mass_dev = 0.0
    for a in realized_levels(aug.map, aug.voltage):
        mass_dev = max(mass_dev, abs(level_measure(aug.map, aug.voltage, a).total - 1.0))

    hit_dev = 0.0
    wind_dev = 0.0
    sequences = admissible_sequences(m, v, num_sequences, length, seed)
    for seq in sequences:
        law = conditional_hitting(m, v, seq, emb=emb)
        hit_dev = max(hit_dev, law.max_deviation())
        wind_dev = max(wind_dev, abs(expected_conditional_winding(m, v, c, seq, emb=emb)))

    half = [(k, 0.5) for k in range(m.num_edges)]
    m2, _e2, _origin = insert_vertices(m, None, half)
    proj_dev = 0.0
    for x in range(m.num_vertices):
        want = step_law(m, x)
        got = projected_step_law(m2, range(m.num_vertices), x)
        keys = set(want) | set(got)
        keys.discard(x)    # jump chain: compare away from self-transitions
        proj_dev = max(proj_dev, max(abs(want.get(k, 0.0) - got.get(k, 0.0))
                                     for k in keys))

    return {
        "level_mass_max_dev": mass_dev,
        "hitting_max_dev": hit_dev,
        "winding_max_abs": wind_dev,
        "projection_max_dev": proj_dev,
        "noise_floor": noise,
        "sequences": sequences,
    }
