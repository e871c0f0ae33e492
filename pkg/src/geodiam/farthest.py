"""Farthest-point computation from a fixed source.

The farthest point of the geodesic distance field d_s lies at a vertex of the
shortest path map, at a crossing of an SPM edge with the boundary, or at a
corner.  Instead of building the SPM subdivision we enumerate the candidate
classes directly: weighted tri-bisector vertices over corner triples, weighted
bisector crossings over corner pairs x boundary edges, and the corners
themselves.  The source participates as an extra weight-0 site so candidates
on its direct-visibility cell are covered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateConfiguration, PointOutsideDomain
from .geometry import Point, PolygonalDomain, as_point, points_in_domain, visibility_mask
from .engine import DistanceTable, point_corner_distances

__all__ = [
    "SpmCandidate",
    "FarthestResult",
    "solve_spm_vertex",
    "solve_spm_edge_boundary",
    "farthest_point",
]


@dataclass(frozen=True)
class SpmCandidate:
    location: Point
    kind: str  # "spm_vertex" | "edge_crossing" | "corner"
    value: float
    sites: tuple[int, ...] = ()  # site indices (n = source); corners for "corner"
    edge: int | None = None
    degenerate_collinear: bool = False


@dataclass(frozen=True)
class FarthestResult:
    point: Point
    distance: float
    kind: str
    candidates: tuple[SpmCandidate, ...] | None = None


def _polish_vertex(x: np.ndarray, u: np.ndarray, w: np.ndarray,
                   tol_res: float, max_iter: int) -> np.ndarray | None:
    """Newton-polish the unsquared equal-offset-distance system."""
    for _ in range(max_iter):
        diff = x[None, :] - u
        r = np.hypot(diff[:, 0], diff[:, 1])
        if np.any(r < 1e-14):
            return None
        f = np.array([w[0] + r[0] - w[1] - r[1], w[0] + r[0] - w[2] - r[2]])
        if np.max(np.abs(f)) < tol_res:
            return x
        g = diff / r[:, None]
        jac = np.array([g[0] - g[1], g[0] - g[2]])
        try:
            step = np.linalg.solve(jac, f)
        except np.linalg.LinAlgError:
            return None
        x = x - step
    diff = x[None, :] - u
    r = np.hypot(diff[:, 0], diff[:, 1])
    f = np.array([w[0] + r[0] - w[1] - r[1], w[0] + r[0] - w[2] - r[2]])
    return x if np.max(np.abs(f)) < tol_res else None


def solve_spm_vertex(u1, w1: float, u2, w2: float, u3, w3: float,
                     tol_residual: float = 1e-12,
                     max_iter: int = 50) -> list[tuple[Point, float]]:
    """All points x with w1+||x-u1|| = w2+||x-u2|| = w3+||x-u3||.

    Returns (point, common value) pairs.  Solved in closed form: the squared
    system is linear in (x, rho) up to one quadratic, so there are at most two
    solutions; each root is polished on the unsquared equations so spurious
    squaring roots are discarded.  Raises DegenerateConfiguration when the
    solution set is not 0-dimensional (collinear sites with matching weights).
    """
    u = np.array([tuple(as_point(u1)), tuple(as_point(u2)), tuple(as_point(u3))],
                 dtype=float)
    w = np.array([w1, w2, w3], dtype=float)
    if min(np.hypot(*(u[0] - u[1])), np.hypot(*(u[0] - u[2])),
           np.hypot(*(u[1] - u[2]))) < 1e-12:
        raise DegenerateConfiguration("coincident sites")

    # ||x-u_i||^2 = (rho-w_i)^2 ; subtracting pairs is linear in (x, rho)
    a_rows = []
    b_vals = []
    for i in (1, 2):
        a_rows.append([2 * (u[i, 0] - u[0, 0]), 2 * (u[i, 1] - u[0, 1]),
                       -2 * (w[i] - w[0])])
        b_vals.append(float(u[i] @ u[i] - u[0] @ u[0] - (w[i] ** 2 - w[0] ** 2)))
    amat = np.array(a_rows)
    bvec = np.array(b_vals)
    scale = max(1.0, float(np.abs(u).max()) + float(np.abs(w).max()))
    _, sv, vt = np.linalg.svd(amat)
    if sv[-1] <= 1e-12 * scale:
        raise DegenerateConfiguration("collinear sites with matching weights")
    z0, *_ = np.linalg.lstsq(amat, bvec, rcond=None)
    null = vt[-1]

    # quadratic in tau from the first squared equation
    def q(z):
        x = z[:2]
        return (x - u[0]) @ (x - u[0]) - (z[2] - w[0]) ** 2

    # q(z0 + tau*null) = A tau^2 + B tau + C
    nx, rho_n = null[:2], null[2]
    x0, rho0 = z0[:2], z0[2]
    A = nx @ nx - rho_n ** 2
    B = 2 * ((x0 - u[0]) @ nx - (rho0 - w[0]) * rho_n)
    C = q(z0)
    roots: list[float] = []
    if abs(A) < 1e-14 * scale ** 2:
        if abs(B) > 1e-14 * scale:
            roots = [-C / B]
    else:
        disc = B * B - 4 * A * C
        if disc >= -1e-10 * scale ** 4:
            sq = math.sqrt(max(disc, 0.0))
            roots = [(-B + sq) / (2 * A), (-B - sq) / (2 * A)]

    out: list[tuple[Point, float]] = []
    for tau in roots:
        z = z0 + tau * null
        x, rho = z[:2], z[2]
        if rho < np.max(w) - 1e-7 * scale:
            continue  # spurious branch from squaring
        polished = _polish_vertex(x.copy(), u, w, tol_residual, max_iter)
        if polished is None:
            continue
        val = float(w[0] + np.hypot(*(polished - u[0])))
        if not any(np.hypot(*(polished - np.array(tuple(p)))) < 1e-9
                   for p, _ in out):
            out.append((Point(float(polished[0]), float(polished[1])), val))
    return out


def solve_spm_edge_boundary(u1, w1: float, u2, w2: float,
                            edge: tuple) -> list[tuple[Point, float]]:
    """Points x on the closed segment edge with w1+||x-u1|| = w2+||x-u2||.

    At most two solutions (quadratic along the edge parameter); the empty set
    is a normal outcome.  A whole edge lying on an equal-weight bisector is
    returned empty: its endpoints are corners and already candidates.
    """
    a = np.asarray(tuple(as_point(edge[0])), dtype=float)
    b = np.asarray(tuple(as_point(edge[1])), dtype=float)
    p1 = np.asarray(tuple(as_point(u1)), dtype=float)
    p2 = np.asarray(tuple(as_point(u2)), dtype=float)
    if np.hypot(*(p1 - p2)) < 1e-12:
        raise DegenerateConfiguration("coincident sites")
    d = b - a
    c = w2 - w1  # ||x-u1|| - ||x-u2|| = c on solutions

    # ||x-u1||^2 - ||x-u2||^2 is linear in t: ell(t) = ell0 + ell1 * t
    ell0 = float((a - p1) @ (a - p1) - (a - p2) @ (a - p2))
    ell1 = float(2 * d @ (p2 - p1))
    sols: list[float] = []
    if abs(c) < 1e-14:
        if abs(ell1) > 1e-14:
            sols = [-ell0 / ell1]
    else:
        # p = ||x-u1|| = (ell/c + c)/2, p^2 = ||x(t)-u1||^2 -> quadratic in t
        aa = float(d @ d)
        bb = float(2 * d @ (a - p1))
        cc = float((a - p1) @ (a - p1))
        # ((ell0 + ell1 t)/c + c)/2)^2 = aa t^2 + bb t + cc
        k0 = (ell0 / c + c) / 2
        k1 = ell1 / (2 * c)
        A = k1 * k1 - aa
        B = 2 * k0 * k1 - bb
        C = k0 * k0 - cc
        if abs(A) < 1e-14:
            if abs(B) > 1e-14:
                sols = [-C / B]
        else:
            disc = B * B - 4 * A * C
            if disc >= 0:
                sq = math.sqrt(disc)
                sols = [(-B + sq) / (2 * A), (-B - sq) / (2 * A)]

    out: list[tuple[Point, float]] = []
    for t in sols:
        if t < -1e-12 or t > 1 + 1e-12:
            continue
        t = min(1.0, max(0.0, t))
        x = a + t * d
        r1 = w1 + np.hypot(*(x - p1))
        r2 = w2 + np.hypot(*(x - p2))
        if abs(r1 - r2) > 1e-7 * max(1.0, abs(r1)):
            continue  # spurious squaring root
        # one 1D Newton touch-up along the edge
        for _ in range(8):
            g1 = (x - p1) / max(np.hypot(*(x - p1)), 1e-14)
            g2 = (x - p2) / max(np.hypot(*(x - p2)), 1e-14)
            fp = float((g1 - g2) @ d)
            fv = float(w1 + np.hypot(*(x - p1)) - w2 - np.hypot(*(x - p2)))
            if abs(fv) < 1e-13 or abs(fp) < 1e-14:
                break
            t = min(1.0, max(0.0, t - fv / fp))
            x = a + t * d
        val = float(w1 + np.hypot(*(x - p1)))
        pt = Point(float(x[0]), float(x[1]))
        if not any(math.hypot(pt.x - q.x, pt.y - q.y) < 1e-9 for q, _ in out):
            out.append((pt, val))
    return out


# ---------------------------------------------------------------------------
# vectorized candidate sweeps (same algebra as the scalar solvers)


def _batched_vertex_solutions(sites: np.ndarray, w: np.ndarray,
                              triples: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form tri-bisector solutions for many site triples at once.

    Returns (points (m,2), values (m,)) with NaN rows for absent solutions;
    callers filter and polish.
    """
    u0 = sites[triples[:, 0]]
    u1 = sites[triples[:, 1]]
    u2 = sites[triples[:, 2]]
    w0 = w[triples[:, 0]]
    w1 = w[triples[:, 1]]
    w2 = w[triples[:, 2]]
    r1 = np.stack([2 * (u1[:, 0] - u0[:, 0]), 2 * (u1[:, 1] - u0[:, 1]),
                   -2 * (w1 - w0)], axis=1)
    r2 = np.stack([2 * (u2[:, 0] - u0[:, 0]), 2 * (u2[:, 1] - u0[:, 1]),
                   -2 * (w2 - w0)], axis=1)
    b1 = (np.einsum("ij,ij->i", u1, u1) - np.einsum("ij,ij->i", u0, u0)
          - (w1 ** 2 - w0 ** 2))
    b2 = (np.einsum("ij,ij->i", u2, u2) - np.einsum("ij,ij->i", u0, u0)
          - (w2 ** 2 - w0 ** 2))
    null = np.cross(r1, r2)  # (m,3)
    nn = np.einsum("ij,ij->i", null, null)
    # least-norm particular solution via 2x2 gram inverse
    g11 = np.einsum("ij,ij->i", r1, r1)
    g12 = np.einsum("ij,ij->i", r1, r2)
    g22 = np.einsum("ij,ij->i", r2, r2)
    det = g11 * g22 - g12 * g12
    ok = (np.abs(det) > 1e-20) & (nn > 1e-20)
    det = np.where(ok, det, 1.0)
    c1 = (b1 * g22 - b2 * g12) / det
    c2 = (b2 * g11 - b1 * g12) / det
    z0 = c1[:, None] * r1 + c2[:, None] * r2  # (m,3)

    dx = z0[:, :2] - u0
    A = (np.einsum("ij,ij->i", null[:, :2], null[:, :2]) - null[:, 2] ** 2)
    B = 2 * (np.einsum("ij,ij->i", dx, null[:, :2]) - (z0[:, 2] - w0) * null[:, 2])
    C = np.einsum("ij,ij->i", dx, dx) - (z0[:, 2] - w0) ** 2
    disc = B * B - 4 * A * C
    lin = np.abs(A) < 1e-18
    with np.errstate(divide="ignore", invalid="ignore"):
        sq = np.sqrt(np.maximum(disc, 0.0))
        tau1 = np.where(lin, -C / np.where(np.abs(B) > 1e-18, B, np.nan),
                        (-B + sq) / (2 * A))
        tau2 = np.where(lin, np.nan, (-B - sq) / (2 * A))
    bad = ~ok | ((disc < 0) & ~lin)
    tau1 = np.where(bad, np.nan, tau1)
    tau2 = np.where(bad, np.nan, tau2)

    pts = []
    vals = []
    wmax = np.maximum(np.maximum(w0, w1), w2)
    for tau in (tau1, tau2):
        z = z0 + tau[:, None] * null
        rho = z[:, 2]
        keep = np.isfinite(rho) & (rho >= wmax - 1e-7)
        x = np.where(keep[:, None], z[:, :2], np.nan)
        pts.append(x)
        vals.append(np.where(keep, rho, np.nan))
    return np.concatenate(pts), np.concatenate(vals)


def _batched_edge_solutions(sites: np.ndarray, w: np.ndarray,
                            pairs: np.ndarray, ea: np.ndarray, eb: np.ndarray
                            ) -> tuple[np.ndarray, np.ndarray]:
    """Bisector-edge crossings for aligned (site pair, edge) combos."""
    p1 = sites[pairs[:, 0]]
    p2 = sites[pairs[:, 1]]
    w1 = w[pairs[:, 0]]
    w2 = w[pairs[:, 1]]
    a = ea
    d = eb - ea
    c = w2 - w1
    am1 = a - p1
    am2 = a - p2
    ell0 = np.einsum("pj,pj->p", am1, am1) - np.einsum("pj,pj->p", am2, am2)
    ell1 = 2 * np.einsum("pj,pj->p", d, p2 - p1)
    aa = np.einsum("pj,pj->p", d, d)
    bb = 2 * np.einsum("pj,pj->p", d, am1)
    cc = np.einsum("pj,pj->p", am1, am1)
    bisector = np.abs(c) < 1e-14
    with np.errstate(divide="ignore", invalid="ignore"):
        t_bis = -ell0 / ell1
        k0 = (ell0 / c + c) / 2
        k1 = ell1 / (2 * c)
        A = k1 * k1 - aa
        B = 2 * k0 * k1 - bb
        C = k0 * k0 - cc
        disc = B * B - 4 * A * C
        sq = np.sqrt(np.maximum(disc, 0.0))
        lin = np.abs(A) < 1e-14
        t1 = np.where(lin, -C / np.where(np.abs(B) > 1e-14, B, np.nan),
                      (-B + sq) / (2 * A))
        t2 = np.where(lin, np.nan, (-B - sq) / (2 * A))
        t1 = np.where(disc < 0, np.nan, t1)
        t2 = np.where(disc < 0, np.nan, t2)
    t1 = np.where(bisector, t_bis, t1)
    t2 = np.where(bisector, np.nan, t2)

    pts = []
    vals = []
    for t in (t1, t2):
        keep = np.isfinite(t) & (t >= -1e-12) & (t <= 1 + 1e-12)
        tc = np.clip(t, 0.0, 1.0)
        x = a + tc[:, None] * d
        v1 = w1 + np.hypot(x[:, 0] - p1[:, 0], x[:, 1] - p1[:, 1])
        v2 = w2 + np.hypot(x[:, 0] - p2[:, 0], x[:, 1] - p2[:, 1])
        keep &= np.abs(v1 - v2) <= 1e-7 * np.maximum(1.0, np.abs(v1))
        pts.append(np.where(keep[:, None], x, np.nan))
        vals.append(np.where(keep, v1, np.nan))
    return np.concatenate(pts), np.concatenate(vals)


def farthest_point(domain: PolygonalDomain, table: DistanceTable, source,
                   collect_candidates: bool = False) -> FarthestResult:
    """Farthest point of the domain from source and its geodesic distance.

    Candidates are processed by decreasing claimed value; the first candidate
    whose claim survives validation (in P, defining sites visible, claim equal
    to the true geodesic distance) is the farthest point, so validation work
    stays proportional to how many false claims beat the best corner.  With
    collect_candidates=True every candidate is validated and returned.
    """
    src = as_point(source)
    sxy = np.array([src.x, src.y])
    tolc = domain.tol
    w, _ = point_corner_distances(domain, table, sxy)
    n = domain.n

    sites = np.vstack([domain.corner_xy, sxy[None, :]])
    sw = np.concatenate([w, [0.0]])

    # candidate store: points, claimed values, kind (0 corner, 1 spm vertex,
    # 2 edge crossing), defining site triples (-1 padded), edge id (-1 none)
    c_pts = [domain.corner_xy]
    c_val = [w]
    c_kind = [np.zeros(n, dtype=np.uint8)]
    c_sites = [np.stack([np.arange(n), np.full(n, -1), np.full(n, -1)], axis=1)]
    c_edge = [np.full(n, -1, dtype=np.int64)]

    m = n + 1
    cache = domain.metadata.setdefault("_farthest_cache", {})
    if cache.get("m") != m:
        idx = np.arange(m)
        ii, jj = np.meshgrid(idx, idx, indexing="ij")
        pmask = ii < jj
        cache["pairs"] = np.stack([ii[pmask], jj[pmask]], axis=1)
        trips = []
        for a in range(m - 2):
            jj2, kk2 = np.meshgrid(idx[a + 1:], idx[a + 1:], indexing="ij")
            tm = jj2 < kk2
            trips.append(np.stack([np.full(tm.sum(), a), jj2[tm], kk2[tm]],
                                  axis=1))
        cache["triples"] = np.concatenate(trips) if trips else np.zeros((0, 3), int)
        cache["m"] = m
    triples = cache["triples"]
    pairs = cache["pairs"]

    # reach-based pruning: a candidate anchored at site i claims at most
    # w_i + (how far i can reach); anything not above the best corner value
    # cannot be the farthest point
    x0, y0, x1, y1 = domain.bbox
    bbox_pts = np.array([[x0, y0], [x0, y1], [x1, y0], [x1, y1]])
    site_reach = np.max(np.hypot(sites[:, None, 0] - bbox_pts[None, :, 0],
                                 sites[:, None, 1] - bbox_pts[None, :, 1]),
                        axis=1)
    corner_best = float(np.max(w))
    threshold = corner_best - tolc.tol_dist
    site_cap = sw + site_reach

    for lo in range(0, len(triples), 200_000):
        tr = triples[lo: lo + 200_000]
        keep = np.minimum(np.minimum(site_cap[tr[:, 0]], site_cap[tr[:, 1]]),
                          site_cap[tr[:, 2]]) > threshold
        tr = tr[keep]
        if not len(tr):
            continue
        tp, tv = _batched_vertex_solutions(sites, sw, tr)
        good = np.isfinite(tv)
        if not good.any():
            continue
        tr2 = np.concatenate([tr, tr])[good]
        c_pts.append(tp[good])
        c_val.append(tv[good])
        c_kind.append(np.ones(len(tr2), dtype=np.uint8))
        c_sites.append(tr2)
        c_edge.append(np.full(len(tr2), -1, dtype=np.int64))

    ne = len(domain.edges)
    if cache.get("edge_reach_n") != n:
        cache["edge_reach"] = np.maximum(
            np.hypot(domain.corner_xy[:, None, 0] - domain.edge_a[None, :, 0],
                     domain.corner_xy[:, None, 1] - domain.edge_a[None, :, 1]),
            np.hypot(domain.corner_xy[:, None, 0] - domain.edge_b[None, :, 0],
                     domain.corner_xy[:, None, 1] - domain.edge_b[None, :, 1]))
        cache["edge_reach_n"] = n
    src_reach = np.maximum(np.hypot(*(domain.edge_a - sxy).T),
                           np.hypot(*(domain.edge_b - sxy).T))
    edge_cap = np.vstack([w[:, None] + cache["edge_reach"],
                          src_reach[None, :]])  # (m, E)
    pair_block = max(1, 2_000_000 // max(ne, 1))
    for lo in range(0, len(pairs), pair_block):
        pr = pairs[lo: lo + pair_block]
        pcap = np.minimum(edge_cap[pr[:, 0]], edge_cap[pr[:, 1]])  # (B, E)
        bi, ei = np.nonzero(pcap > threshold)
        if not len(bi):
            continue
        combos = pr[bi]
        eids = ei.astype(np.int64)
        for clo in range(0, len(combos), 400_000):
            sl = slice(clo, clo + 400_000)
            ep, ev = _batched_edge_solutions(sites, sw, combos[sl],
                                             domain.edge_a[eids[sl]],
                                             domain.edge_b[eids[sl]])
            good = np.isfinite(ev)
            if not good.any():
                continue
            pr2 = np.concatenate([combos[sl], combos[sl]])[good]
            ed2 = np.concatenate([eids[sl], eids[sl]])[good]
            c_pts.append(ep[good])
            c_val.append(ev[good])
            c_kind.append(np.full(len(pr2), 2, dtype=np.uint8))
            c_sites.append(np.concatenate(
                [pr2, np.full((len(pr2), 1), -1)], axis=1))
            c_edge.append(ed2)

    pts = np.concatenate(c_pts)
    vals = np.concatenate(c_val)
    kinds = np.concatenate(c_kind)
    site_ids = np.concatenate(c_sites).astype(np.int64)
    edge_ids = np.concatenate(c_edge)
    order = np.argsort(-np.nan_to_num(vals, nan=-np.inf))

    best_val = -math.inf
    best_pt: Point | None = None
    best_kind = "corner"
    validated: list[SpmCandidate] = []
    bx0, by0, bx1, by1 = domain.bbox
    pad = 10 * tolc.tol_geom
    kind_names = {0: "corner", 1: "spm_vertex", 2: "edge_crossing"}

    def _validate(idx: int) -> SpmCandidate | None:
        kind = int(kinds[idx])
        site_idx = tuple(int(q) for q in site_ids[idx] if q >= 0)
        edge = int(edge_ids[idx]) if edge_ids[idx] >= 0 else None
        x = pts[idx]
        claim = float(vals[idx])
        if kind == 0:
            return SpmCandidate(Point(float(x[0]), float(x[1])), "corner",
                                claim, site_idx, None)
        if not (bx0 - pad <= x[0] <= bx1 + pad and by0 - pad <= x[1] <= by1 + pad):
            return None
        if not points_in_domain(domain, x[None, :])[0]:
            return None
        site_pts = sites[list(site_idx)]
        if not np.all(visibility_mask(domain, x, site_pts)):
            return None
        vis = visibility_mask(domain, x, domain.corner_xy)
        if np.any(vis):
            euc = np.hypot(domain.corner_xy[:, 0] - x[0],
                           domain.corner_xy[:, 1] - x[1])
            true = float(np.min(np.where(vis, euc + w, np.inf)))
        else:
            true = math.inf
        if visibility_mask(domain, sxy, x[None, :])[0]:
            true = min(true, float(np.hypot(*(x - sxy))))
        if abs(true - claim) > tolc.tol_dist:
            return None
        degen = False
        if kind == 1:
            a, b, c = site_pts
            degen = abs((b[0] - a[0]) * (c[1] - a[1])
                        - (b[1] - a[1]) * (c[0] - a[0])) < tolc.tol_geom
        return SpmCandidate(Point(float(x[0]), float(x[1])), kind_names[kind],
                            claim, site_idx, edge, degenerate_collinear=degen)

    for idx in order:
        claim = float(vals[idx])
        if not math.isfinite(claim):
            break
        if best_pt is not None and claim < best_val - tolc.tol_dist \
                and not collect_candidates:
            break  # claims are descending; nothing below can win
        cand = _validate(int(idx))
        if cand is None:
            continue
        if collect_candidates:
            validated.append(cand)
        better = cand.value > best_val + tolc.tol_dist
        tied = (abs(cand.value - best_val) <= tolc.tol_dist and best_pt is not None
                and (cand.location.x, cand.location.y) < (best_pt.x, best_pt.y))
        if best_pt is None or better or tied:
            best_val = max(best_val, cand.value)
            best_pt = cand.location
            best_kind = cand.kind

    if best_pt is None:
        raise PointOutsideDomain("no valid farthest candidate found")
    return FarthestResult(point=best_pt, distance=float(best_val),
                          kind=best_kind,
                          candidates=tuple(validated) if collect_candidates else None)
