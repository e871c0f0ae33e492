"""Approximation modes and an independent grid oracle.

two_approx: the farthest point from any seed gives value <= diam <= 2*value.
grid_approx: max pairwise geodesic distance over a grid of candidate points
(cell = eps*D0/4) brackets the diameter within a (1+eps) factor.

The grid oracle shares no algorithmic path with the visibility-graph engine:
distances come from Dijkstra over a dense 8-neighbor grid graph, so agreement
between the two is evidence rather than tautology.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra as _dijkstra

from .errors import GridDisconnected, InvalidEps, PointOutsideDomain
from .geometry import (
    Point,
    PolygonalDomain,
    as_point,
    points_in_domain,
    segments_free_bulk,
    visibility_mask,
)
from .engine import DistanceTable
from .farthest import farthest_point

__all__ = [
    "ApproxResult",
    "GridOracle",
    "two_approx",
    "grid_approx",
    "oracle_distance",
    "oracle_diameter",
    "build_grid_oracle",
]

# worst-case 8-neighbor (octile) detour over the Euclidean length
_OCTILE = 1.0 / math.cos(math.pi / 8) - 1.0  # ~0.0824


@dataclass(frozen=True)
class ApproxResult:
    value: float
    pair: tuple[Point, Point]
    guarantee: str  # "factor2_lower" | "one_plus_eps"
    eps: float | None = None
    cell_size: float | None = None


def two_approx(domain: PolygonalDomain, table: DistanceTable,
               seed) -> ApproxResult:
    """Lower bound from one farthest-point sweep: value <= diam <= 2*value."""
    sp = as_point(seed)
    fr = farthest_point(domain, table, sp)
    return ApproxResult(value=fr.distance, pair=(sp, fr.point),
                        guarantee="factor2_lower")


def _boundary_samples(domain: PolygonalDomain, spacing: float) -> np.ndarray:
    out = []
    for e in domain.edges:
        a = np.array([e.a.x, e.a.y])
        b = np.array([e.b.x, e.b.y])
        ln = float(np.hypot(*(b - a)))
        k = max(1, int(math.ceil(ln / spacing)))
        for t in np.linspace(0, 1, k + 1)[1:-1]:
            out.append(a + t * (b - a))
    return np.array(out) if out else np.zeros((0, 2))


def grid_approx(domain: PolygonalDomain, eps: float,
                table: DistanceTable | None = None) -> ApproxResult:
    """(1+eps) bracket: value <= diam <= (1+eps)*value.

    Candidates are in-domain grid points at spacing eps*D0/4 plus all corners
    and boundary samples at the same spacing (narrow corridors may contain no
    cell center); the value is the max pairwise geodesic distance, evaluated
    through the exact engine.
    """
    if not (0 < eps < 1):
        raise InvalidEps(f"eps must be in (0,1), got {eps}")
    if table is None:
        from .engine import build_visibility_graph, corner_distances
        table = corner_distances(build_visibility_graph(domain))
    d0 = two_approx(domain, table, domain.corners[0]).value
    cell = eps * d0 / 4.0
    x0, y0, x1, y1 = domain.bbox
    nx = max(2, int(math.ceil((x1 - x0) / cell)) + 1)
    ny = max(2, int(math.ceil((y1 - y0) / cell)) + 1)
    gx, gy = np.meshgrid(np.linspace(x0, x1, nx), np.linspace(y0, y1, ny))
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    pts = pts[points_in_domain(domain, pts, -domain.tol.tol_geom)]
    cand = np.unique(np.round(np.concatenate(
        [pts, domain.corner_xy, _boundary_samples(domain, cell)]), 12), axis=0)

    n = domain.n
    pxy = domain.corner_xy
    es = np.hypot(cand[:, None, 0] - pxy[None, :, 0],
                  cand[:, None, 1] - pxy[None, :, 1])  # (C,n)
    vis = np.zeros((len(cand), n), dtype=bool)
    for i, p in enumerate(cand):
        vis[i] = visibility_mask(domain, p, pxy)
    w = np.where(vis, es, np.inf)
    # distance from candidate i to corner c, then back out to candidate j
    mid = np.empty((len(cand), n))
    for i in range(len(cand)):
        mid[i] = np.min(w[i][:, None] + table.d, axis=0)
    route = np.min(mid[:, None, :] + w[None, :, :], axis=2)
    euc = np.hypot(cand[:, None, 0] - cand[None, :, 0],
                   cand[:, None, 1] - cand[None, :, 1])
    dist = route.copy()
    # pairs where the straight segment would be shorter need a visibility test
    needs = np.argwhere(route - euc > domain.tol.tol_dist)
    checked: dict[int, np.ndarray] = {}
    for i, j in needs:
        i, j = int(i), int(j)
        if i >= j:
            continue
        if i not in checked:
            checked[i] = visibility_mask(domain, cand[i], cand)
        if checked[i][j]:
            dist[i, j] = dist[j, i] = euc[i, j]
    np.fill_diagonal(dist, 0.0)
    flat = int(np.argmax(np.where(np.isfinite(dist), dist, -np.inf)))
    i, j = np.unravel_index(flat, dist.shape)
    value = float(dist[i, j])
    return ApproxResult(value=value,
                        pair=(Point(*cand[i]), Point(*cand[j])),
                        guarantee="one_plus_eps", eps=eps, cell_size=cell)


# ---------------------------------------------------------------------------
# grid oracle


@dataclass
class GridOracle:
    """8-neighbor grid graph over free-space cell centers.

    Corners and boundary samples are nodes too, attached to nearby cells by
    short local edges and chained along each boundary edge, so corridors
    narrower than a cell stay traversable.  error_bound(v) certifies
    |v - true| <= error_bound for point queries; the diameter sweep adds its
    source-net radius on top.
    """

    domain: PolygonalDomain
    resolution: int
    nodes: np.ndarray  # (N,2)
    graph: object  # scipy CSR
    cell: float
    n_cells: int
    cell_ij: np.ndarray  # lattice coordinates of cell nodes

    def error_bound(self, value: float) -> float:
        snap = 4.0 * self.cell * math.sqrt(2.0)
        return _OCTILE * value + snap


def build_grid_oracle(domain: PolygonalDomain, resolution: int = 128) -> GridOracle:
    x0, y0, x1, y1 = domain.bbox
    span = max(x1 - x0, y1 - y0)
    cell = span / resolution
    xs = np.arange(x0 + cell / 2, x1, cell)
    ys = np.arange(y0 + cell / 2, y1, cell)
    gx, gy = np.meshgrid(xs, ys)
    centers = np.stack([gx.ravel(), gy.ravel()], axis=1)
    keep = points_in_domain(domain, centers, -domain.tol.tol_geom)
    cells = centers[keep]
    n_cells = len(cells)
    samples = _boundary_samples(domain, cell)
    nodes = np.concatenate([cells, domain.corner_xy, samples])
    cell_ij = np.stack([((cells[:, 0] - x0) / cell).astype(int),
                        ((cells[:, 1] - y0) / cell).astype(int)], axis=1)

    key = {(int(i), int(j)): idx for idx, (i, j) in enumerate(cell_ij)}
    cand_a: list[int] = []
    cand_b: list[int] = []
    for (ci, cj), i in key.items():
        for dx, dy in ((1, 0), (0, 1), (1, 1), (1, -1)):
            j = key.get((ci + dx, cj + dy))
            if j is not None:
                cand_a.append(i)
                cand_b.append(j)
    # attachments: corner/boundary nodes to nearby cells
    attach_r = 2.5 * cell
    for a_idx in range(n_cells, len(nodes)):
        p = nodes[a_idx]
        ci = int((p[0] - x0) / cell)
        cj = int((p[1] - y0) / cell)
        for dx in range(-3, 4):
            for dy in range(-3, 4):
                j = key.get((ci + dx, cj + dy))
                if j is None:
                    continue
                if np.hypot(*(cells[j] - p)) <= attach_r:
                    cand_a.append(a_idx)
                    cand_b.append(j)

    cand_a_arr = np.array(cand_a, dtype=int)
    cand_b_arr = np.array(cand_b, dtype=int)
    ok = np.zeros(len(cand_a_arr), dtype=bool)
    for lo in range(0, len(cand_a_arr), 200_000):
        sl = slice(lo, lo + 200_000)
        ok[sl] = segments_free_bulk(domain, nodes[cand_a_arr[sl]],
                                    nodes[cand_b_arr[sl]])
    rows = list(cand_a_arr[ok])
    cols = list(cand_b_arr[ok])
    data = [float(np.hypot(*(nodes[b] - nodes[a])))
            for a, b in zip(rows, cols)]

    # chain corners and boundary samples consecutively along each edge
    cursor = n_cells + domain.n
    for ei in range(len(domain.edges)):
        ia, ib = domain.edge_corner_ids[ei]
        a = domain.edge_a[ei]
        b = domain.edge_b[ei]
        ln = float(np.hypot(*(b - a)))
        k = max(1, int(math.ceil(ln / cell)))
        inner = max(0, k - 1)
        chain = [n_cells + int(ia)] + list(range(cursor, cursor + inner)) \
            + [n_cells + int(ib)]
        cursor += inner
        for u, v in zip(chain[:-1], chain[1:]):
            rows.append(u)
            cols.append(v)
            data.append(float(np.hypot(*(nodes[v] - nodes[u]))))

    n = len(nodes)
    mat = coo_matrix((data + data, (rows + cols, cols + rows)),
                     shape=(n, n)).tocsr()
    return GridOracle(domain=domain, resolution=resolution, nodes=nodes,
                      graph=mat, cell=cell, n_cells=n_cells, cell_ij=cell_ij)


def _attach_query(oracle: GridOracle, p) -> int:
    d = np.hypot(oracle.nodes[:, 0] - p[0], oracle.nodes[:, 1] - p[1])
    order = np.argsort(d)[:32]
    free = segments_free_bulk(oracle.domain,
                              np.broadcast_to(np.asarray(p, dtype=float),
                                              (len(order), 2)),
                              oracle.nodes[order])
    hit = np.nonzero(free)[0]
    if len(hit) == 0:
        raise GridDisconnected("no grid node attachable to query point")
    return int(order[hit[0]])


def oracle_distance(oracle: GridOracle, s, t) -> tuple[float, float]:
    """Grid-graph distance between s and t plus its certified error bound."""
    sp = as_point(s)
    tp = as_point(t)
    if not points_in_domain(oracle.domain,
                            np.array([[sp.x, sp.y], [tp.x, tp.y]])).all():
        raise PointOutsideDomain("oracle query outside domain")
    si = _attach_query(oracle, (sp.x, sp.y))
    ti = _attach_query(oracle, (tp.x, tp.y))
    dist = _dijkstra(oracle.graph, indices=[si])[0]
    if not math.isfinite(dist[ti]):
        raise GridDisconnected("grid disconnected between query points")
    hop_s = math.hypot(sp.x - oracle.nodes[si, 0], sp.y - oracle.nodes[si, 1])
    hop_t = math.hypot(tp.x - oracle.nodes[ti, 0], tp.y - oracle.nodes[ti, 1])
    value = float(dist[ti] + hop_s + hop_t)
    return value, oracle.error_bound(value)


def oracle_diameter(oracle: GridOracle, net_stride: int = 6) -> tuple[float, float]:
    """Max grid distance over a source net plus all corner/boundary nodes.

    Eccentricity is 1-Lipschitz in the graph metric, so sweeping a source net
    of radius r underestimates the grid diameter by at most 2r; the bound
    accounts for it.  Corners and boundary samples are always sources, which
    keeps corridor walls densely covered.
    """
    n = oracle.graph.shape[0]
    lattice = (oracle.cell_ij[:, 0] % net_stride == 0) \
        & (oracle.cell_ij[:, 1] % net_stride == 0)
    sources = sorted(set(np.nonzero(lattice)[0].tolist())
                     | set(range(oracle.n_cells, n)))
    if not sources:
        raise GridDisconnected("grid oracle graph is empty")
    dist = _dijkstra(oracle.graph, indices=sources)
    finite = np.isfinite(dist)
    if not finite.any():
        raise GridDisconnected("grid oracle graph is empty")
    value = float(dist[finite].max())
    net_r = 1.5 * net_stride * oracle.cell
    bound = oracle.error_bound(value) + 2 * net_r
    return value, bound
