"""Visibility graph, corner geodesic distances, two-point queries, and
exhaustive shortest-path enumeration.

Two-point queries connect the query points to all visible corners directly
(O(n) visibility tests each); no preprocessing structures are built.  The
DistanceTable can also be injected (bypassing geometry) so algebraic
instances are testable without realizing their corridors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as _dijkstra

from .errors import DisconnectedDomain, GeodiamError, PathExplosion, PointOutsideDomain
from .geometry import (
    PolygonalDomain,
    as_point,
    point_in_domain,
    visibility_mask,
)

__all__ = [
    "VisibilityGraph",
    "DistanceTable",
    "GeodesicResult",
    "PathSet",
    "build_visibility_graph",
    "corner_distances",
    "point_distance",
    "enumerate_shortest_paths",
    "point_corner_distances",
]

PATH_CAP_DEFAULT = 10 ** 6


@dataclass
class VisibilityGraph:
    """Corner-to-corner visibility with Euclidean edge weights.

    weights[i, j] is the straight-line distance when corners i and j see each
    other and +inf otherwise; the diagonal is 0.
    """

    domain: PolygonalDomain
    weights: np.ndarray

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def neighbors(self, i: int) -> np.ndarray:
        row = self.weights[i]
        return np.nonzero(np.isfinite(row) & (np.arange(self.n) != i))[0]


@dataclass
class DistanceTable:
    """All-pairs corner geodesic distances.

    provenance is "computed" for tables derived from a domain and "injected"
    for algebraic instances; injected tables may contain +inf for pairs whose
    distance is unspecified (treated as unusable routes).
    """

    d: np.ndarray
    provenance: str = "computed"
    points: np.ndarray | None = None  # corner coordinates (injected mode)
    pred: np.ndarray | None = None  # single-predecessor matrix from Dijkstra
    weights: np.ndarray | None = None  # visibility weights used to build d

    @classmethod
    def injected(cls, points, entries, default=math.inf) -> "DistanceTable":
        """Build a table from corner coordinates and a {(i, j): d} mapping."""
        pts = np.asarray(points, dtype=float)
        n = len(pts)
        d = np.full((n, n), default, dtype=float)
        np.fill_diagonal(d, 0.0)
        for (i, j), v in entries.items():
            d[i, j] = v
            d[j, i] = v
        return cls(d=d, provenance="injected", points=pts)

    @property
    def n(self) -> int:
        return self.d.shape[0]

    def corner_path(self, u: int, v: int) -> list[int]:
        """Corner sequence of one shortest u..v path (inclusive)."""
        if u == v:
            return [u]
        if self.pred is None:
            return [u, v]
        seq = [v]
        j = v
        while j != u:
            j = int(self.pred[u, j])
            if j < 0:
                raise DisconnectedDomain(f"no corner path {u} -> {v}")
            seq.append(j)
        seq.reverse()
        return seq

    def tight_predecessors(self, src: int, v: int, tol: float) -> list[int]:
        """All corners u with d[src,u] + w(u,v) = d[src,v] within tol."""
        if self.weights is None:
            return []
        cand = self.d[src] + self.weights[:, v]
        hit = np.nonzero(np.abs(cand - self.d[src, v]) <= tol)[0]
        return [int(u) for u in hit if u != v]

    def to_text(self) -> str:
        lines = []
        for row in self.d:
            lines.append(" ".join("inf" if not math.isfinite(x) else repr(float(x))
                                  for x in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, points=None) -> "DistanceTable":
        rows = []
        for line in text.strip().splitlines():
            rows.append([math.inf if tok == "inf" else float(tok)
                         for tok in line.split()])
        d = np.array(rows, dtype=float)
        pts = None if points is None else np.asarray(points, dtype=float)
        return cls(d=d, provenance="injected", points=pts)

    def check_invariants(self, corner_xy: np.ndarray | None = None,
                         tol: float = 1e-7) -> None:
        d = self.d
        if not np.allclose(np.diag(d), 0.0, atol=tol):
            raise GeodiamError("nonzero diagonal in distance table")
        if not np.array_equal(d, d.T) and not np.allclose(
                np.nan_to_num(d, posinf=1e300), np.nan_to_num(d.T, posinf=1e300),
                atol=tol):
            raise GeodiamError("distance table not symmetric")
        finite = np.isfinite(d)
        if corner_xy is not None:
            euc = np.hypot(corner_xy[:, None, 0] - corner_xy[None, :, 0],
                           corner_xy[:, None, 1] - corner_xy[None, :, 1])
            if np.any(d[finite] < euc[finite] - tol):
                raise GeodiamError("geodesic distance below Euclidean")


@dataclass(frozen=True)
class GeodesicResult:
    distance: float
    path: tuple[int, ...]  # interior corner ids; empty for direct visibility
    s: tuple[float, float]
    t: tuple[float, float]


@dataclass(frozen=True)
class PathSet:
    distance: float
    paths: tuple[tuple[int, ...], ...]
    count: int
    first_corners: frozenset[int]  # V_s
    last_corners: frozenset[int]  # V_t
    ties_detected: bool = False


def build_visibility_graph(domain: PolygonalDomain) -> VisibilityGraph:
    """O(n^2) pairwise visibility; boundary-edge adjacencies come out of the
    grazing rule (boundary segments lie in P)."""
    n = domain.n
    xy = domain.corner_xy
    w = np.full((n, n), np.inf)
    np.fill_diagonal(w, 0.0)
    for i in range(n - 1):
        targets = xy[i + 1:]
        vis = visibility_mask(domain, xy[i], targets)
        dist = np.hypot(targets[:, 0] - xy[i, 0], targets[:, 1] - xy[i, 1])
        idx = np.nonzero(vis)[0] + i + 1
        w[i, idx] = dist[vis]
        w[idx, i] = dist[vis]
    return VisibilityGraph(domain=domain, weights=w)


def corner_distances(graph: VisibilityGraph) -> DistanceTable:
    """Single-source shortest paths from every corner over the visibility
    graph; raises DisconnectedDomain if any corner is unreachable."""
    w = graph.weights
    n = w.shape[0]
    finite = np.isfinite(w) & (w > 0)
    rows, cols = np.nonzero(finite)
    sparse = csr_matrix((w[rows, cols], (rows, cols)), shape=(n, n))
    d, pred = _dijkstra(sparse, directed=False, return_predecessors=True)
    if not np.all(np.isfinite(d)):
        bad = np.argwhere(~np.isfinite(d))[0]
        raise DisconnectedDomain(f"corner {bad[1]} unreachable from {bad[0]}")
    d = np.minimum(d, d.T)  # symmetry exact by construction
    return DistanceTable(d=d, provenance="computed", pred=pred, weights=w,
                         points=graph.domain.corner_xy.copy())


def _corner_visibility(domain: PolygonalDomain | None, table: DistanceTable, p):
    if domain is not None:
        return visibility_mask(domain, p, domain.corner_xy)
    return np.ones(table.n, dtype=bool)


def point_corner_distances(domain: PolygonalDomain | None, table: DistanceTable,
                           p) -> tuple[np.ndarray, np.ndarray]:
    """Geodesic distances from p to every corner plus p's visibility mask.

    In injected mode (domain None) every corner is treated as visible.
    """
    pxy = np.asarray(tuple(as_point(p)), dtype=float)
    pts = table.points if domain is None else domain.corner_xy
    vis = _corner_visibility(domain, table, pxy)
    if not np.any(vis):
        raise PointOutsideDomain(f"point {tuple(pxy)} sees no corner")
    euc = np.hypot(pts[:, 0] - pxy[0], pts[:, 1] - pxy[1])
    w = np.min(euc[vis, None] + table.d[vis, :], axis=0)
    return w, vis


def point_distance(domain: PolygonalDomain | None, table: DistanceTable,
                   s, t) -> GeodesicResult:
    """Geodesic distance between two points of P.

    Direct visibility gives the Euclidean distance with an empty path;
    otherwise the minimum of ||s-u|| + d(u,v) + ||v-t|| over corners u visible
    from s and v visible from t.
    """
    sp = as_point(s)
    tp = as_point(t)
    sxy = np.array([sp.x, sp.y])
    txy = np.array([tp.x, tp.y])
    if domain is not None:
        if not point_in_domain(domain, sxy):
            raise PointOutsideDomain(f"source {tuple(sxy)} outside domain")
        if not point_in_domain(domain, txy):
            raise PointOutsideDomain(f"target {tuple(txy)} outside domain")
        if visibility_mask(domain, sxy, txy[None, :])[0]:
            return GeodesicResult(float(np.hypot(*(txy - sxy))), (),
                                  (sp.x, sp.y), (tp.x, tp.y))
    pts = table.points if domain is None else domain.corner_xy
    vis_s = _corner_visibility(domain, table, sxy)
    vis_t = _corner_visibility(domain, table, txy)
    if not np.any(vis_s) or not np.any(vis_t):
        raise PointOutsideDomain("query point sees no corner")
    es = np.hypot(pts[:, 0] - sxy[0], pts[:, 1] - sxy[1])
    et = np.hypot(pts[:, 0] - txy[0], pts[:, 1] - txy[1])
    total = es[vis_s, None] + table.d[np.ix_(vis_s, vis_t)] + et[None, vis_t]
    flat = int(np.argmin(total))
    si, ti = np.unravel_index(flat, total.shape)
    u = int(np.nonzero(vis_s)[0][si])
    v = int(np.nonzero(vis_t)[0][ti])
    best = float(total[si, ti])
    if not math.isfinite(best):
        raise DisconnectedDomain("no route between query points")
    mid = table.corner_path(u, v) if table.pred is not None else ([u] if u == v else [u, v])
    return GeodesicResult(best, tuple(mid), (sp.x, sp.y), (tp.x, tp.y))


def _canonical_path(xy_seq: list[np.ndarray], ids: list[int], tol: float) -> tuple[int, ...]:
    """Drop interior corners where the path does not bend (collinear pass)."""
    keep = []
    for k in range(1, len(xy_seq) - 1):
        a, b, c = xy_seq[k - 1], xy_seq[k], xy_seq[k + 1]
        cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        ablen = math.hypot(b[0] - a[0], b[1] - a[1])
        aclen = math.hypot(c[0] - a[0], c[1] - a[1])
        along = 0.0 if aclen == 0 else abs(cross) / aclen
        dot = (b[0] - a[0]) * (c[0] - b[0]) + (b[1] - a[1]) * (c[1] - b[1])
        forward = dot >= -tol * (ablen + 1.0)  # tolerate noise backtracks
        if along <= tol and forward:
            continue  # straight pass-through, not a real bend
        keep.append(ids[k])
    return tuple(keep)


def enumerate_shortest_paths(domain: PolygonalDomain | None, table: DistanceTable,
                             s, t, tol: float | None = None,
                             cap: int = PATH_CAP_DEFAULT) -> PathSet:
    """All distinct shortest paths from s to t within tol of the optimum.

    Builds the tight-edge DAG over {s} + corners + {t} and enumerates its
    paths.  Paths are deduplicated as curves: corners passed without bending
    are dropped before comparison, and collapsed duplicates set the tie flag.
    Raises PathExplosion beyond cap and enforces the h >= count-1 bound.
    """
    if tol is None:
        tol = (domain.tol.tol_dist if domain is not None else 1e-7)
    sp = as_point(s)
    tp = as_point(t)
    sxy = np.array([sp.x, sp.y])
    txy = np.array([tp.x, tp.y])
    pts = table.points if domain is None else domain.corner_xy
    n = table.n

    ws, vis_s = point_corner_distances(domain, table, sxy)
    wt, vis_t = point_corner_distances(domain, table, txy)
    es = np.hypot(pts[:, 0] - sxy[0], pts[:, 1] - sxy[1])
    et = np.hypot(pts[:, 0] - txy[0], pts[:, 1] - txy[1])

    direct = False
    if domain is not None:
        direct = bool(visibility_mask(domain, sxy, txy[None, :])[0])
    dist_direct = float(np.hypot(*(txy - sxy))) if direct else math.inf
    via = np.min(ws + np.where(vis_t, et, np.inf)) if n else math.inf
    total = min(dist_direct, float(via))
    if not math.isfinite(total):
        raise DisconnectedDomain("no route between query points")

    on_path = ws + wt <= total + tol
    nodes = np.nonzero(on_path)[0]
    # adjacency within the DAG, ordered by distance from s
    weights = table.weights
    succ: dict[int, list[int]] = {}
    start: list[int] = [int(u) for u in nodes
                        if vis_s[u] and abs(es[u] - ws[u]) <= tol]
    for u in nodes:
        lst = []
        if weights is not None:
            wrow = weights[u]
            for v in nodes:
                if v == u or not math.isfinite(wrow[v]):
                    continue
                if abs(ws[u] + wrow[v] - ws[v]) <= tol:
                    lst.append(int(v))
        else:
            # injected mode: a single abstract hop u -> v per finite entry
            for v in nodes:
                if v != u and math.isfinite(table.d[u, v]) \
                        and abs(ws[u] + table.d[u, v] - ws[v]) <= tol:
                    lst.append(int(v))
        succ[int(u)] = lst
    ends = {int(v) for v in nodes
            if vis_t[v] and abs(ws[v] + et[v] - total) <= tol}

    # count raw paths by DP before materializing
    order = sorted(succ, key=lambda u: ws[u], reverse=True)
    npaths: dict[int, int] = {}
    for u in order:
        c = 1 if u in ends else 0
        for v in succ[u]:
            c += npaths.get(v, 0)
        npaths[u] = c
    raw_total = sum(npaths.get(u, 0) for u in start) + (1 if direct and
                                                        abs(dist_direct - total) <= tol else 0)
    if raw_total > cap:
        raise PathExplosion(f"{raw_total} tight paths exceed cap {cap}")

    raw_paths: list[tuple[int, ...]] = []
    if direct and abs(dist_direct - total) <= tol:
        raw_paths.append(())

    def _walk(u: int, acc: list[int]):
        acc.append(u)
        if u in ends:
            raw_paths.append(tuple(acc))
        for v in succ[u]:
            _walk(v, acc)
        acc.pop()

    for u in start:
        _walk(u, [])

    geom_tol = domain.tol.tol_geom * 10 if domain is not None else 1e-9
    canon = {}
    for p in raw_paths:
        xy_seq = [sxy] + [pts[i] for i in p] + [txy]
        key = _canonical_path(xy_seq, [-1] + list(p) + [-2], geom_tol)
        canon.setdefault(key, p)
    paths = sorted(canon.keys())
    count = len(paths)
    ties = count != len(raw_paths)

    firsts = frozenset(p[0] for p in paths if p)
    lasts = frozenset(p[-1] for p in paths if p)
    if domain is not None and count > domain.h + 1 and not ties:
        raise GeodiamError(
            f"{count} shortest paths with h={domain.h} violates h >= count-1")
    return PathSet(distance=total, paths=tuple(paths), count=count,
                   first_corners=firsts, last_corners=lasts, ties_detected=ties)
