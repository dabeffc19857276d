"""Voltages, flows and the discrete harmonic conjugate on cylinder maps.

The voltage is the unique function with value 0 at the bottom marked vertex,
1 at the top one, and the conductance-weighted mean property everywhere else;
probabilistically it is the chance the random walk reaches the top mark
before the bottom one.  Its gradient is a divergence-free flow whose total
strength eta becomes the circumference of the tiled cylinder.  The conjugate
integrates that flow across edges, giving a function on dual vertices that is
well defined modulo eta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .map_core import CombMap, DualMap, MapError, dual_cycle_winding_cut, marked_cut_path

DENSE_LIMIT = 500


class SolveError(RuntimeError):
    """Linear solve failed to reach the required residual."""


@dataclass
class Voltage:
    map: CombMap
    values: np.ndarray          # per vertex, 0 at v0, 1 at v1
    residual: float             # max harmonic defect / pi_weight over interior
    eta: float                  # flow strength (out of v0 == into v1)
    eta_mismatch: float

    def dart_flow(self, h):
        """Signed flow c_e * (h(head) - h(tail)) along dart h."""
        h = np.asarray(h)
        return self.map.conductance[h >> 1] * (
            self.values[self.map.dart_head[h]] - self.values[self.map.dart_tail[h]])


def solve_voltage(m: CombMap, tol: float = 1e-10) -> Voltage:
    """Solve the Dirichlet problem; conjugate-gradient with Jacobi scaling on
    the reduced SPD system, dense elimination below DENSE_LIMIT unknowns."""
    if m.v0 is None or m.v1 is None:
        raise MapError("voltage needs both marked vertices")
    V = m.num_vertices
    interior = np.array([v for v in range(V) if not m.is_marked(v)], dtype=np.int64)
    idx = np.full(V, -1, dtype=np.int64)
    idx[interior] = np.arange(len(interior))

    rows, cols, vals = [], [], []
    b = np.zeros(len(interior))
    diag = np.zeros(len(interior))
    for k in range(m.num_edges):
        u, w = int(m.edge_tail[k]), int(m.edge_head[k])
        c = float(m.conductance[k])
        if u == w:
            continue
        for a, bb in ((u, w), (w, u)):
            if idx[a] >= 0:
                diag[idx[a]] += c
                if idx[bb] >= 0:
                    rows.append(idx[a])
                    cols.append(idx[bb])
                    vals.append(-c)
                elif bb == m.v1:
                    b[idx[a]] += c

    n = len(interior)
    h = np.zeros(V)
    h[m.v1] = 1.0
    if n > 0:
        A = sp.csr_matrix((vals + list(diag), (rows + list(range(n)),
                                               cols + list(range(n)))), shape=(n, n))
        if n < DENSE_LIMIT:
            x = np.linalg.solve(A.toarray(), b)
        else:
            M = sp.diags(1.0 / diag)
            x, info = spla.cg(A, b, rtol=1e-13, atol=0.0, M=M, maxiter=40 * n)
            if info != 0 or np.max(np.abs(A @ x - b)) > 1e-11 * max(1.0, np.max(diag)):
                x = spla.spsolve(A.tocsc(), b)
        res = np.max(np.abs(A @ x - b) / diag) if n else 0.0
        if res > tol:
            raise SolveError(f"harmonic residual {res} exceeds {tol}")
        h[interior] = np.clip(x, 0.0, 1.0)
    else:
        res = 0.0

    volt = Voltage(m, h, float(res), 0.0, 0.0)
    eta0 = float(np.sum(volt.dart_flow(m.vertex_darts[m.v0])))
    eta1 = float(-np.sum(volt.dart_flow(m.vertex_darts[m.v1])))
    mism = abs(eta0 - eta1)
    if mism > 1e-10 * max(1.0, abs(eta0)):
        raise SolveError(f"flow strength mismatch {mism}")
    if eta0 <= 0:
        raise SolveError("flow strength must be positive")
    volt.eta = eta0
    volt.eta_mismatch = mism
    return volt


def flow(v: Voltage, dart: int) -> float:
    return float(v.dart_flow(np.array([dart]))[0])


def flow_strength(v: Voltage) -> float:
    return v.eta


def harmonic_dart(v: Voltage, k: int) -> int:
    """The dart of edge k oriented from lower to higher voltage; zero-gradient
    edges (and self-loops) take the orientation with the lexicographically
    smaller (tail, head) pair."""
    m = v.map
    t, h = v.values[m.edge_tail[k]], v.values[m.edge_head[k]]
    if h > t:
        return 2 * k
    if h < t:
        return 2 * k + 1
    a, b = int(m.edge_tail[k]), int(m.edge_head[k])
    return 2 * k if (a, b) <= (b, a) else 2 * k + 1


def harmonic_darts(v: Voltage) -> np.ndarray:
    return np.array([harmonic_dart(v, k) for k in range(v.map.num_edges)], dtype=np.int64)


@dataclass
class Conjugate:
    dual: DualMap
    voltage: Voltage
    base: int
    w_lift: np.ndarray          # real lift per dual vertex, w = w_lift mod eta
    max_defect: float           # worst |defect - eta * winding| over non-tree duals
    tree_dart: np.ndarray       # dual dart used to reach each face (-1 at base)
    w_err: np.ndarray | None = None   # rounding bound on w_lift per dual vertex

    def w(self, f):
        return np.mod(self.w_lift[f], self.voltage.eta)

    def dart_increment(self, h):
        """Increment of w along dual dart h: minus the primal flow along h.

        Discrete Cauchy-Riemann with the orientation-preserving sign: w grows
        in the crossing direction that keeps the flow on the left, so on a
        lattice w increases with the a priori angle."""
        return -self.voltage.dart_flow(h)


def conjugate(dmap: DualMap, v: Voltage, base: int | None = None,
              tol: float = 1e-9) -> Conjugate:
    """Integrate the flow over a BFS spanning tree of the dual.

    Every non-tree dual edge closes a cycle whose integration defect must be
    eta times the cycle's winding around the cylinder; a defect away from the
    lattice eta*Z signals an inconsistent input embedding.
    """
    m = dmap.primal
    dm = dmap.map
    F = dm.num_vertices
    eta = v.eta
    if base is None:
        if dmap.rep_theta is not None:
            score = np.minimum(dmap.rep_theta, 2 * math.pi - dmap.rep_theta)
            base = int(np.lexsort((np.arange(F), np.abs(dmap.rep_height), score))[0])
        else:
            base = 0

    w = np.full(F, np.nan)
    w[base] = 0.0
    werr = np.zeros(F)
    tree_dart = np.full(F, -1, dtype=np.int64)
    in_tree = np.zeros(m.num_edges, dtype=bool)
    queue = [base]
    inc = -v.dart_flow(np.arange(dm.num_darts))
    # one increment carries cancellation noise ~ eps * conductance * |v|:
    # level augmentation can slice an edge at nearly equal fractions, and the
    # resulting sliver conductances amplify machine-level voltage noise far
    # above any fixed tolerance while staying far below genuine defects
    vs = float(max(1.0, np.abs(v.values).max()))
    errinc = np.finfo(np.float64).eps * vs \
        * m.conductance[np.arange(dm.num_darts) >> 1]
    while queue:
        f = queue.pop(0)
        for h in dm.vertex_darts[f]:
            g = int(dm.dart_head[h])
            if np.isnan(w[g]):
                w[g] = w[f] + inc[h]
                werr[g] = werr[f] + errinc[h]
                tree_dart[g] = int(h)
                in_tree[h >> 1] = True
                queue.append(g)
    if np.any(np.isnan(w)):
        raise MapError("dual graph is not connected")

    cut = marked_cut_path(m) if (m.v0 is not None and m.v1 is not None) else None
    max_defect = 0.0
    scale = max(1.0, eta)
    for k in np.flatnonzero(~in_tree):
        # integral of the increments around the fundamental cycle through 2k
        defect = inc[2 * k] + w[dm.dart_tail[2 * k]] - w[dm.dart_head[2 * k]]
        wind = round(defect / eta)
        err = abs(defect - eta * wind)
        allow = tol * scale + 8.0 * (errinc[2 * k] + werr[dm.dart_tail[2 * k]]
                                     + werr[dm.dart_head[2 * k]])
        if err > allow:
            raise MapError(f"dual edge {k}: closure defect {defect} not in eta*Z")
        if cut is not None:
            cyc = _fundamental_cycle(dm, tree_dart, int(2 * k))
            wind_cut = dual_cycle_winding_cut(dmap, cyc, cut=cut)
            if wind_cut != wind:
                raise MapError(
                    f"dual edge {k}: defect winding {wind} != cycle winding {wind_cut}")
        max_defect = max(max_defect, err)
    return Conjugate(dmap, v, base, w, max_defect, tree_dart, werr)


def _fundamental_cycle(dm: CombMap, tree_dart: np.ndarray, h: int) -> list:
    """Closed dual dart cycle: tree path to tail(h), then h, then back from head(h)."""

    def path_from_base(f):
        darts = []
        while tree_dart[f] != -1:
            d = int(tree_dart[f])
            darts.append(d)
            f = int(dm.dart_tail[d])
        return darts[::-1]

    up = path_from_base(int(dm.dart_tail[h]))
    down = [d ^ 1 for d in reversed(path_from_base(int(dm.dart_head[h])))]
    return up + [h] + down


def interpolate_h(v: Voltage, dart: int, t: float) -> float:
    """Voltage at the point a fraction t from tail(dart) toward head(dart)."""
    m = v.map
    a = v.values[m.dart_tail[dart]]
    b = v.values[m.dart_head[dart]]
    return float(a + t * (b - a))


def interpolate_w(c: Conjugate, dual_dart: int, t: float) -> float:
    """Conjugate value (mod eta) a fraction t along a dual dart."""
    dm = c.dual.map
    a = c.w_lift[dm.dart_tail[dual_dart]]
    inc = float(c.dart_increment(np.array([dual_dart]))[0])
    return float(np.mod(a + t * inc, c.voltage.eta))
