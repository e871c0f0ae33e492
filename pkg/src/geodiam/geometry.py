"""Planar primitives, the polygonal-domain model, and tolerance-based predicates.

The domain is an outer simple polygon minus the interiors of disjoint simple
holes.  All predicates are tolerance-based (see ToleranceConfig); inputs are
assumed non-adversarial at desk scale.  Grazing contact with the boundary
counts as inside: paths may run along the boundary.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateChain,
    HoleOutsideOuter,
    HolesOverlap,
    PointOutsideDomain,
    SelfIntersectingChain,
)

__all__ = [
    "Point",
    "ToleranceConfig",
    "PolygonChain",
    "Edge",
    "PolygonalDomain",
    "LocationKind",
    "Location",
    "validate_domain",
    "locate_point",
    "segment_visible",
    "points_in_domain",
    "visibility_mask",
    "load_domain",
    "dump_domain",
]


@dataclass(frozen=True)
class Point:
    """Immutable 2D point; coordinates must be finite."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinates ({self.x}, {self.y})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)

    def __iter__(self):
        yield self.x
        yield self.y


def as_point(p) -> Point:
    if isinstance(p, Point):
        return p
    x, y = p
    return Point(float(x), float(y))


@dataclass(frozen=True)
class ToleranceConfig:
    """Numeric tolerances; tol_residual must be below tol_dist."""

    tol_geom: float = 1e-9
    tol_dist: float = 1e-7
    tol_residual: float = 1e-12
    newton_max_iter: int = 50
    multistart_count: int = 16

    def __post_init__(self):
        if min(self.tol_geom, self.tol_dist, self.tol_residual) <= 0:
            raise ValueError("tolerances must be positive")
        if self.newton_max_iter <= 0 or self.multistart_count <= 0:
            raise ValueError("iteration counts must be positive")
        if self.tol_residual >= self.tol_dist:
            raise ValueError("tol_residual must be smaller than tol_dist")


DEFAULT_TOL = ToleranceConfig()


class PolygonChain:
    """Closed simple polygonal chain (implicit closing edge last -> first)."""

    def __init__(self, vertices: Sequence):
        pts = [as_point(v) for v in vertices]
        if len(pts) < 3:
            raise DegenerateChain(f"chain needs >= 3 vertices, got {len(pts)}")
        xy = np.array([[p.x, p.y] for p in pts], dtype=float)
        if np.min(np.hypot(*(np.roll(xy, -1, axis=0) - xy).T)) < 1e-12:
            raise DegenerateChain("repeated consecutive vertices")
        self.vertices: tuple[Point, ...] = tuple(pts)
        self.xy = xy

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def signed_area(self) -> float:
        x, y = self.xy[:, 0], self.xy[:, 1]
        xn, yn = np.roll(x, -1), np.roll(y, -1)
        return 0.5 * float(np.sum(x * yn - xn * y))

    def reversed(self) -> "PolygonChain":
        return PolygonChain(self.vertices[::-1])


@dataclass(frozen=True)
class Edge:
    """Open boundary segment between consecutive chain vertices."""

    index: int
    chain: int  # 0 = outer, 1.. = holes
    a: Point
    b: Point

    @property
    def length(self) -> float:
        return math.hypot(self.b.x - self.a.x, self.b.y - self.a.y)

    def point_at(self, t: float) -> Point:
        return Point(self.a.x + t * (self.b.x - self.a.x),
                     self.a.y + t * (self.b.y - self.a.y))


class LocationKind(enum.Enum):
    INTERIOR = "interior"
    BOUNDARY_EDGE = "boundary_edge"
    CORNER = "corner"
    EXTERIOR = "exterior"


@dataclass(frozen=True)
class Location:
    kind: LocationKind
    corner: int | None = None
    edge: int | None = None
    param: float | None = None

    @property
    def in_domain(self) -> bool:
        return self.kind is not LocationKind.EXTERIOR


class PolygonalDomain:
    """Outer chain plus hole chains; immutable after construction.

    Corners are listed outer chain first, then holes in order, preserving each
    chain's (normalized) vertex order.  The flattened corner list defines the
    corner indices used everywhere else in the package.
    """

    def __init__(self, outer: PolygonChain, holes: Sequence[PolygonChain],
                 tol: ToleranceConfig = DEFAULT_TOL):
        self.outer = outer
        self.holes = tuple(holes)
        self.tol = tol
        self.metadata: dict = {}

        corners: list[Point] = []
        corner_ref: list[tuple[int, int]] = []
        edges: list[Edge] = []
        for ci, chain in enumerate((outer, *self.holes)):
            m = len(chain)
            for vi, p in enumerate(chain.vertices):
                corner_ref.append((ci, vi))
                corners.append(p)
            base = len(edges)
            for vi in range(m):
                a = chain.vertices[vi]
                b = chain.vertices[(vi + 1) % m]
                edges.append(Edge(base + vi, ci, a, b))
        self.corners: tuple[Point, ...] = tuple(corners)
        self.corner_ref = tuple(corner_ref)
        self.edges: tuple[Edge, ...] = tuple(edges)

        edge_corner_ids = []
        offset = 0
        for ci, chain in enumerate((outer, *self.holes)):
            m = len(chain)
            for vi in range(m):
                edge_corner_ids.append((offset + vi, offset + (vi + 1) % m))
            offset += m
        self.edge_corner_ids = np.array(edge_corner_ids, dtype=int)

        self.corner_xy = np.array([[p.x, p.y] for p in corners], dtype=float)
        self.edge_a = np.array([[e.a.x, e.a.y] for e in edges], dtype=float)
        self.edge_b = np.array([[e.b.x, e.b.y] for e in edges], dtype=float)
        self._hole_xy = [h.xy for h in self.holes]
        lo = self.corner_xy.min(axis=0)
        hi = self.corner_xy.max(axis=0)
        self.bbox = (float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))

    @property
    def n(self) -> int:
        return len(self.corners)

    @property
    def h(self) -> int:
        return len(self.holes)

    @property
    def scale(self) -> float:
        x0, y0, x1, y1 = self.bbox
        return math.hypot(x1 - x0, y1 - y0)

    def __repr__(self) -> str:
        return f"PolygonalDomain(n={self.n}, h={self.h})"


# ---------------------------------------------------------------------------
# scalar predicates


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _seg_point_dist(a, b, p) -> float:
    ab = (b[0] - a[0], b[1] - a[1])
    ap = (p[0] - a[0], p[1] - a[1])
    denom = ab[0] * ab[0] + ab[1] * ab[1]
    t = 0.0 if denom == 0 else max(0.0, min(1.0, (ap[0] * ab[0] + ap[1] * ab[1]) / denom))
    dx = a[0] + t * ab[0] - p[0]
    dy = a[1] + t * ab[1] - p[1]
    return math.hypot(dx, dy)


def _segments_intersect_params(p, r, q, s, tol):
    """Intersection parameters of segment p+t*r with q+u*s, t,u in [0,1].

    Returns a list of t-params on the first segment: one for a transversal
    meeting, two (clamped overlap ends) for near-collinear overlap, else [].
    """
    rxs = r[0] * s[1] - r[1] * s[0]
    qpx, qpy = q[0] - p[0], q[1] - p[1]
    rlen = math.hypot(*r)
    slen = math.hypot(*s)
    if rlen == 0 or slen == 0:
        return []
    if abs(rxs) > tol * rlen * slen:
        t = (qpx * s[1] - qpy * s[0]) / rxs
        u = (qpx * r[1] - qpy * r[0]) / rxs
        pad_t = tol / rlen
        pad_u = tol / slen
        if -pad_t <= t <= 1 + pad_t and -pad_u <= u <= 1 + pad_u:
            return [min(1.0, max(0.0, t))]
        return []
    # near-parallel: report overlap interval of the supporting lines
    if abs(qpx * r[1] - qpy * r[0]) > tol * rlen * max(1.0, math.hypot(qpx, qpy)):
        return []
    t0 = (qpx * r[0] + qpy * r[1]) / (rlen * rlen)
    t1 = t0 + (s[0] * r[0] + s[1] * r[1]) / (rlen * rlen)
    lo, hi = min(t0, t1), max(t0, t1)
    lo = max(0.0, lo)
    hi = min(1.0, hi)
    if lo > hi:
        return []
    return [lo, hi]


def _point_in_chain(xy: np.ndarray, p) -> bool:
    """Even-odd test; boundary treatment is handled by callers via tolerance."""
    x, y = p
    vx, vy = xy[:, 0], xy[:, 1]
    nx, ny = np.roll(vx, -1), np.roll(vy, -1)
    cond = (vy > y) != (ny > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xs = vx + (y - vy) * (nx - vx) / (ny - vy)
    inside = np.count_nonzero(cond & (xs > x)) % 2 == 1
    return bool(inside)


def _boundary_distance(domain: PolygonalDomain, p) -> float:
    d = _points_segments_dist(np.asarray([p], dtype=float), domain.edge_a, domain.edge_b)
    return float(d.min())


def point_in_domain(domain: PolygonalDomain, p, tol: float | None = None) -> bool:
    """True iff p is in the closed set P, treating the tol-neighborhood of the
    boundary as inside (grazing allowed)."""
    tol = domain.tol.tol_geom if tol is None else tol
    if _boundary_distance(domain, p) <= tol:
        return True
    if not _point_in_chain(domain.outer.xy, p):
        return False
    return not any(_point_in_chain(hxy, p) for hxy in domain._hole_xy)


def locate_point(domain: PolygonalDomain, p) -> Location:
    """Classify p as Corner, BoundaryEdge, Interior, or Exterior.

    Corner beats edge beats interior for points within tol_geom of several
    features.  Points inside a hole are Exterior.
    """
    p = as_point(p)
    tol = domain.tol.tol_geom
    pv = (p.x, p.y)
    d2 = np.hypot(domain.corner_xy[:, 0] - p.x, domain.corner_xy[:, 1] - p.y)
    ci = int(np.argmin(d2))
    if d2[ci] <= tol:
        return Location(LocationKind.CORNER, corner=ci)
    dists = _points_segments_dist(np.asarray([pv]), domain.edge_a, domain.edge_b)[0]
    ei = int(np.argmin(dists))
    if dists[ei] <= tol:
        e = domain.edges[ei]
        ab = e.b.as_array() - e.a.as_array()
        t = float(np.dot(np.array(pv) - e.a.as_array(), ab) / np.dot(ab, ab))
        return Location(LocationKind.BOUNDARY_EDGE, edge=ei, param=min(1.0 - 1e-15, max(1e-15, t)))
    if _point_in_chain(domain.outer.xy, pv) and not any(
            _point_in_chain(hxy, pv) for hxy in domain._hole_xy):
        return Location(LocationKind.INTERIOR)
    return Location(LocationKind.EXTERIOR)


def segment_visible(domain: PolygonalDomain, a, b) -> bool:
    """True iff the closed segment ab lies in P.

    Grazing contact with the boundary or corners is allowed; the segment is
    blocked only where it enters hole interiors or the exterior by more than
    tol_geom.  Raises PointOutsideDomain if an endpoint is outside P.
    """
    a = as_point(a)
    b = as_point(b)
    tol = domain.tol.tol_geom
    if not point_in_domain(domain, (a.x, a.y), tol):
        raise PointOutsideDomain(f"segment endpoint {a} outside domain")
    if not point_in_domain(domain, (b.x, b.y), tol):
        raise PointOutsideDomain(f"segment endpoint {b} outside domain")
    return _segment_free(domain, (a.x, a.y), (b.x, b.y))


def _segment_free(domain: PolygonalDomain, pa, pb) -> bool:
    """Event-based containment test; endpooints assumed in P."""
    r = (pb[0] - pa[0], pb[1] - pa[1])
    seglen = math.hypot(*r)
    if seglen <= domain.tol.tol_geom:
        return True
    tol = domain.tol.tol_geom
    params = {0.0, 1.0}
    for e in domain.edges:
        q = (e.a.x, e.a.y)
        s = (e.b.x - e.a.x, e.b.y - e.a.y)
        for t in _segments_intersect_params(pa, r, q, s, tol):
            params.add(t)
    # corners grazing the segment interior are events too
    cx = domain.corner_xy
    ap = cx - np.array(pa)
    t = (ap[:, 0] * r[0] + ap[:, 1] * r[1]) / (seglen * seglen)
    t = np.clip(t, 0.0, 1.0)
    px = pa[0] + t * r[0] - cx[:, 0]
    py = pa[1] + t * r[1] - cx[:, 1]
    close = np.hypot(px, py) <= tol
    for ti in t[close]:
        params.add(float(ti))
    ts = sorted(params)
    for t0, t1 in zip(ts[:-1], ts[1:]):
        if (t1 - t0) * seglen <= 2 * tol:
            continue
        tm = 0.5 * (t0 + t1)
        mid = (pa[0] + tm * r[0], pa[1] + tm * r[1])
        if not point_in_domain(domain, mid):
            return False
    return True


# ---------------------------------------------------------------------------
# vectorized helpers


def _points_segments_dist(pts: np.ndarray, ea: np.ndarray, eb: np.ndarray) -> np.ndarray:
    """Distances from each point to each segment; shape (len(pts), len(ea))."""
    ab = eb - ea  # (E,2)
    ap = pts[:, None, :] - ea[None, :, :]  # (P,E,2)
    denom = np.einsum("ej,ej->e", ab, ab)
    denom = np.where(denom == 0, 1.0, denom)
    t = np.clip(np.einsum("pej,ej->pe", ap, ab) / denom[None, :], 0.0, 1.0)
    proj = ea[None, :, :] + t[:, :, None] * ab[None, :, :]
    return np.hypot(pts[:, None, 0] - proj[:, :, 0], pts[:, None, 1] - proj[:, :, 1])


def points_in_domain(domain: PolygonalDomain, pts: np.ndarray,
                     tol: float | None = None) -> np.ndarray:
    """Vectorized point_in_domain over an (m, 2) array."""
    pts = np.asarray(pts, dtype=float)
    if pts.size == 0:
        return np.zeros(0, dtype=bool)
    tol = domain.tol.tol_geom if tol is None else tol
    near = _points_segments_dist(pts, domain.edge_a, domain.edge_b).min(axis=1) <= tol
    inside = _chain_contains_many(domain.outer.xy, pts)
    for hxy in domain._hole_xy:
        inside &= ~_chain_contains_many(hxy, pts)
    return near | inside


def _chain_contains_many(xy: np.ndarray, pts: np.ndarray) -> np.ndarray:
    vx, vy = xy[:, 0], xy[:, 1]
    nx, ny = np.roll(vx, -1), np.roll(vy, -1)
    px = pts[:, 0][:, None]
    py = pts[:, 1][:, None]
    cond = (vy[None, :] > py) != (ny[None, :] > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xs = vx[None, :] + (py - vy[None, :]) * (nx - vx)[None, :] / (ny - vy)[None, :]
    crossings = np.count_nonzero(cond & (xs > px), axis=1)
    return crossings % 2 == 1


def segments_free_bulk(domain: PolygonalDomain, starts: np.ndarray,
                       ends: np.ndarray) -> np.ndarray:
    """Containment of many segments at once (endpoints assumed in P).

    Fast path: a segment with a strictly transversal boundary crossing is
    blocked; a segment nowhere near the boundary is free.  Grazing cases fall
    back to the exact scalar event test.
    """
    starts = np.asarray(starts, dtype=float)
    ends = np.asarray(ends, dtype=float)
    if starts.size == 0:
        return np.zeros(0, dtype=bool)
    tol = domain.tol.tol_geom
    ea, eb = domain.edge_a, domain.edge_b
    r = ends - starts  # (T,2)
    s = eb - ea  # (E,2)
    qp = ea[None, :, :] - starts[:, None, :]  # (T,E,2)
    rxs = r[:, None, 0] * s[None, :, 1] - r[:, None, 1] * s[None, :, 0]  # (T,E)
    qpxs = qp[:, :, 0] * s[None, :, 1] - qp[:, :, 1] * s[None, :, 0]
    qpxr = qp[:, :, 0] * r[:, None, 1] - qp[:, :, 1] * r[:, None, 0]
    rlen = np.hypot(r[:, 0], r[:, 1])
    slen = np.hypot(s[:, 0], s[:, 1])
    denom_ok = np.abs(rxs) > tol * np.maximum(rlen[:, None] * slen[None, :], 1e-300)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(denom_ok, qpxs / rxs, np.nan)
        u = np.where(denom_ok, qpxr / rxs, np.nan)
    margin_t = 1e4 * tol / np.maximum(rlen[:, None], 1e-300)
    margin_u = 1e4 * tol / np.maximum(slen[None, :], 1e-300)
    strict = (denom_ok & (t > margin_t) & (t < 1 - margin_t)
              & (u > margin_u) & (u < 1 - margin_u))
    blocked = strict.any(axis=1)
    # grazing suspects: intersections near the [0,1] bounds, or near-parallel
    # edges that are both close to the segment's line and overlapping its span
    touch = denom_ok & (t > -margin_t) & (t < 1 + margin_t) \
        & (u > -margin_u) & (u < 1 + margin_u) & ~strict
    rsafe = np.maximum(rlen, 1e-300)
    qp_b = eb[None, :, :] - starts[:, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        off_a = np.abs(qpxr) / rsafe[:, None]
        off_b = np.abs(qp_b[:, :, 0] * r[:, None, 1]
                       - qp_b[:, :, 1] * r[:, None, 0]) / rsafe[:, None]
        proj_a = (qp[:, :, 0] * r[:, None, 0] + qp[:, :, 1] * r[:, None, 1]) \
            / (rsafe ** 2)[:, None]
        proj_b = (qp_b[:, :, 0] * r[:, None, 0] + qp_b[:, :, 1] * r[:, None, 1]) \
            / (rsafe ** 2)[:, None]
    near_line = np.minimum(off_a, off_b) <= 1e4 * tol
    span_pad = margin_t
    overlap = (np.minimum(proj_a, proj_b) <= 1 + span_pad) \
        & (np.maximum(proj_a, proj_b) >= -span_pad)
    parallel_near = ~denom_ok & near_line & overlap
    unresolved = ~blocked & (touch.any(axis=1) | parallel_near.any(axis=1))
    out = ~blocked
    for i in np.nonzero(unresolved)[0]:
        out[i] = _segment_free(domain, (starts[i, 0], starts[i, 1]),
                               (ends[i, 0], ends[i, 1]))
    clean = ~blocked & ~unresolved
    if np.any(clean):
        mids = (starts[clean] + ends[clean]) / 2.0
        out[clean] = points_in_domain(domain, mids)
    return out


def visibility_mask(domain: PolygonalDomain, origin, targets: np.ndarray) -> np.ndarray:
    """Visibility of each target from one origin (all assumed in P)."""
    targets = np.asarray(targets, dtype=float)
    if targets.size == 0:
        return np.zeros(0, dtype=bool)
    o = np.broadcast_to(np.asarray(origin, dtype=float), targets.shape)
    return segments_free_bulk(domain, o, targets)


# ---------------------------------------------------------------------------
# validation and io


def _check_simple(chain: PolygonChain, what: str):
    xy = chain.xy
    m = len(xy)
    tol = 1e-12
    for i in range(m):
        a0 = xy[i]
        a1 = xy[(i + 1) % m]
        for j in range(i + 1, m):
            if j == i or (j + 1) % m == i or (i + 1) % m == j:
                continue
            b0 = xy[j]
            b1 = xy[(j + 1) % m]
            ts = _segments_intersect_params(
                (a0[0], a0[1]), (a1[0] - a0[0], a1[1] - a0[1]),
                (b0[0], b0[1]), (b1[0] - b0[0], b1[1] - b0[1]), tol)
            if ts:
                raise SelfIntersectingChain(
                    f"{what}: edges {i} and {j} intersect")


def _chain_inside_chain(inner: PolygonChain, outer: PolygonChain, tol: float) -> bool:
    """All inner vertices strictly inside outer and no edge crossings."""
    for p in inner.xy:
        if not _point_in_chain(outer.xy, p):
            return False
        if _points_segments_dist(np.asarray([p]),
                                 outer.xy, np.roll(outer.xy, -1, axis=0)).min() <= tol:
            return False
    mi, mo = len(inner.xy), len(outer.xy)
    for i in range(mi):
        a0, a1 = inner.xy[i], inner.xy[(i + 1) % mi]
        for j in range(mo):
            b0, b1 = outer.xy[j], outer.xy[(j + 1) % mo]
            if _segments_intersect_params((a0[0], a0[1]), (a1[0] - a0[0], a1[1] - a0[1]),
                                          (b0[0], b0[1]), (b1[0] - b0[0], b1[1] - b0[1]),
                                          tol):
                return False
    return True


def _chains_disjoint(c1: PolygonChain, c2: PolygonChain, tol: float) -> bool:
    m1, m2 = len(c1.xy), len(c2.xy)
    for i in range(m1):
        a0, a1 = c1.xy[i], c1.xy[(i + 1) % m1]
        for j in range(m2):
            b0, b1 = c2.xy[j], c2.xy[(j + 1) % m2]
            if _segments_intersect_params((a0[0], a0[1]), (a1[0] - a0[0], a1[1] - a0[1]),
                                          (b0[0], b0[1]), (b1[0] - b0[0], b1[1] - b0[1]),
                                          tol):
                return False
    if _point_in_chain(c2.xy, c1.xy[0]) or _point_in_chain(c1.xy, c2.xy[0]):
        return False
    d = _points_segments_dist(c1.xy, c2.xy, np.roll(c2.xy, -1, axis=0)).min()
    return d > tol


def validate_domain(raw, tol: ToleranceConfig = DEFAULT_TOL) -> PolygonalDomain:
    """Build a PolygonalDomain from raw chain data.

    Accepts a dict with keys "outer" and "holes" (the domain file format) or a
    pair (outer_vertices, hole_vertex_lists).  Orientations are normalized to
    outer CCW, holes CW.
    """
    if isinstance(raw, dict):
        outer_pts = raw.get("outer")
        hole_pts = raw.get("holes", [])
    else:
        outer_pts, hole_pts = raw
    if outer_pts is None:
        raise DegenerateChain("missing outer chain")

    outer = PolygonChain(outer_pts)
    if abs(outer.signed_area) <= tol.tol_geom ** 2:
        raise DegenerateChain("outer chain has zero area")
    _check_simple(outer, "outer chain")
    if outer.signed_area < 0:
        outer = outer.reversed()

    holes = []
    for k, pts in enumerate(hole_pts):
        hole = PolygonChain(pts)
        if abs(hole.signed_area) <= tol.tol_geom ** 2:
            raise DegenerateChain(f"hole {k} has zero area")
        _check_simple(hole, f"hole {k}")
        if hole.signed_area > 0:
            hole = hole.reversed()
        holes.append(hole)

    for k, hole in enumerate(holes):
        if not _chain_inside_chain(hole, outer, tol.tol_geom):
            raise HoleOutsideOuter(f"hole {k} is not strictly inside the outer chain")
    for i in range(len(holes)):
        for j in range(i + 1, len(holes)):
            if not _chains_disjoint(holes[i], holes[j], tol.tol_geom):
                raise HolesOverlap(f"holes {i} and {j} overlap")

    return PolygonalDomain(outer, holes, tol)


def dump_domain(domain: PolygonalDomain) -> dict:
    return {
        "outer": [[p.x, p.y] for p in domain.outer.vertices],
        "holes": [[[p.x, p.y] for p in h.vertices] for h in domain.holes],
    }


def load_domain(path_or_obj, tol: ToleranceConfig = DEFAULT_TOL) -> PolygonalDomain:
    if isinstance(path_or_obj, dict):
        return validate_domain(path_or_obj, tol)
    with open(path_or_obj) as f:
        return validate_domain(json.load(f), tol)
