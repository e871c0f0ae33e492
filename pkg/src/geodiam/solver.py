"""Diametral-pair candidate generation, solving, validation, and certification.

Case analysis: a geodesic-maximal pair falls into one of six classes by the
anchor of each endpoint (corner V, open boundary B, interior I), with minimum
shortest-path counts VV:1 VB:2 VI:3 BB:3 BI:4 II:5.  Corner-anchored cases
reduce to farthest-point sweeps; the others come from equalizing path-length
functions over small corner-pair tuples.  Tuple enumeration is a pruned DFS
over pair combinations with an explicit budget, plus a seeding pass that
refines mutually-farthest pairs found by alternation; the paper-style shortest
path map overlay is not built.
"""

from __future__ import annotations

import enum
import math
import os
import time
from dataclasses import dataclass, field, replace
from itertools import combinations

import numpy as np

from .errors import GeodiamError, PointOutsideDomain
from .geometry import (
    Location,
    LocationKind,
    Point,
    PolygonalDomain,
    ToleranceConfig,
    as_point,
    locate_point,
    points_in_domain,
    visibility_mask,
)
from .engine import (
    DistanceTable,
    PathSet,
    build_visibility_graph,
    corner_distances,
    enumerate_shortest_paths,
    point_corner_distances,
    point_distance,
)
from .farthest import farthest_point

__all__ = [
    "CaseLabel",
    "EquationSystem",
    "CandidatePair",
    "DiameterResult",
    "SolverConfig",
    "prune_cases",
    "solve_case_corner",
    "generate_candidates",
    "newton_solve_system",
    "validate_candidate",
    "certify_maximal",
    "compute_diameter",
]


class CaseLabel(enum.Enum):
    VV = "VV"
    VB = "VB"
    VI = "VI"
    BB = "BB"
    BI = "BI"
    II = "II"


# minimum shortest-path count per case (best-possible bounds)
MIN_PATHS = {CaseLabel.VV: 1, CaseLabel.VB: 2, CaseLabel.VI: 3,
             CaseLabel.BB: 3, CaseLabel.BI: 4, CaseLabel.II: 5}
# minimum |V_s|, |V_t| for non-corner anchors (corner anchors are trivial)
MIN_ANCHORS = {CaseLabel.VV: (0, 0), CaseLabel.VB: (0, 2), CaseLabel.VI: (0, 3),
               CaseLabel.BB: (2, 2), CaseLabel.BI: (2, 3), CaseLabel.II: (3, 3)}
# tuple sizes for the equation-system cases
TUPLE_SIZE = {CaseLabel.BB: 3, CaseLabel.BI: 4, CaseLabel.II: 5}

SOLVED = "solved"
VALIDATED = "validated"
CERTIFIED = "certified_maximal"
REJECTED = "rejected"


@dataclass
class SolverConfig:
    tol: ToleranceConfig = field(default_factory=ToleranceConfig)
    cases: str | list[str] = "auto"  # "auto" = prune by hole count
    budget: int = 20000  # Newton solves across tuple enumeration
    bulk_starts: int = 6  # starts per enumerated tuple (seeded tuples use more)
    seed: int = 0
    probe_count: int = 32
    path_cap: int = 10 ** 6
    threads: int = 0  # 0 = auto (currently sequential; merge is deterministic)
    fixed_tuples: list | None = None  # [(ui, vi), ...] lists; bypass enumeration
    alternation_seeds: int = 6
    alternation_iters: int = 8
    # exact farthest sweeps per corner; 0 = every corner.  On large fixtures
    # compute_diameter keeps the top corners (by corner-row maximum) exact and
    # emits the best corner pair directly for the rest.
    corner_sweep_limit: int = 0


@dataclass
class EquationSystem:
    """Equal-path-length system for one defining tuple.

    pairs holds (u, v, d(u,v)) with coordinates resolved; equation count
    equals variable count: BB 2 (arc params), BI 3 (arc + point), II 4.
    """

    case: CaseLabel
    pair_ids: tuple[tuple[int, int], ...]
    u_xy: np.ndarray  # (k,2)
    v_xy: np.ndarray  # (k,2)
    d: np.ndarray  # (k,)
    edge_s: tuple[np.ndarray, np.ndarray] | None = None  # (a, b) of e_s
    edge_t: tuple[np.ndarray, np.ndarray] | None = None
    edge_s_id: int | None = None
    edge_t_id: int | None = None

    @property
    def variables(self) -> int:
        return {CaseLabel.BB: 2, CaseLabel.BI: 3, CaseLabel.II: 4}[self.case]

    def positions(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Map variable vectors (S, m) to point pairs ((S,2), (S,2))."""
        if self.case is CaseLabel.II:
            return x[:, 0:2], x[:, 2:4]
        if self.case is CaseLabel.BI:
            a, b = self.edge_s
            unit = (b - a) / np.linalg.norm(b - a)
            s = a[None, :] + x[:, 0:1] * unit[None, :]
            return s, x[:, 1:3]
        a, b = self.edge_s
        us = (b - a) / np.linalg.norm(b - a)
        at, bt = self.edge_t
        ut = (bt - at) / np.linalg.norm(bt - at)
        s = a[None, :] + x[:, 0:1] * us[None, :]
        t = at[None, :] + x[:, 1:2] * ut[None, :]
        return s, t

    def lengths(self, x: np.ndarray) -> np.ndarray:
        s, t = self.positions(x)
        rs = np.hypot(s[:, None, 0] - self.u_xy[None, :, 0],
                      s[:, None, 1] - self.u_xy[None, :, 1])
        rt = np.hypot(t[:, None, 0] - self.v_xy[None, :, 0],
                      t[:, None, 1] - self.v_xy[None, :, 1])
        return rs + self.d[None, :] + rt

    def residual_jacobian(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        s, t = self.positions(x)
        ds = s[:, None, :] - self.u_xy[None, :, :]  # (S,k,2)
        dt = t[:, None, :] - self.v_xy[None, :, :]
        rs = np.maximum(np.hypot(ds[:, :, 0], ds[:, :, 1]), 1e-14)
        rt = np.maximum(np.hypot(dt[:, :, 0], dt[:, :, 1]), 1e-14)
        lens = rs + self.d[None, :] + rt
        res = lens[:, :1] - lens[:, 1:]  # (S,k-1)
        gs = ds / rs[:, :, None]  # d len / d s
        gt = dt / rt[:, :, None]
        if self.case is CaseLabel.II:
            full = np.concatenate([gs, gt], axis=2)  # (S,k,4)
        elif self.case is CaseLabel.BI:
            a, b = self.edge_s
            unit = (b - a) / np.linalg.norm(b - a)
            dzeta = np.einsum("skj,j->sk", gs, unit)[:, :, None]
            full = np.concatenate([dzeta, gt], axis=2)  # (S,k,3)
        else:
            a, b = self.edge_s
            us = (b - a) / np.linalg.norm(b - a)
            at, bt = self.edge_t
            ut = (bt - at) / np.linalg.norm(bt - at)
            dzs = np.einsum("skj,j->sk", gs, us)[:, :, None]
            dzt = np.einsum("skj,j->sk", gt, ut)[:, :, None]
            full = np.concatenate([dzs, dzt], axis=2)  # (S,k,2)
        jac = full[:, :1, :] - full[:, 1:, :]  # (S,k-1,m)
        return res, jac


@dataclass
class CandidatePair:
    s: Point
    t: Point
    case: CaseLabel
    pair_ids: tuple[tuple[int, int], ...]
    solved_len: float
    status: str = SOLVED
    reject_reason: str | None = None
    path_count: int | None = None
    first_corners: frozenset[int] | None = None
    last_corners: frozenset[int] | None = None
    edge_s_id: int | None = None
    edge_t_id: int | None = None
    certificate: str | None = None

    def key(self) -> tuple:
        return (round(self.s.x, 7), round(self.s.y, 7),
                round(self.t.x, 7), round(self.t.y, 7))


@dataclass
class DiameterResult:
    diameter: float
    pairs: list[CandidatePair]
    case: CaseLabel | None
    path_count: int | None
    stats: dict
    complete: bool
    tolerances: ToleranceConfig
    candidates: list[CandidatePair] = field(default_factory=list)

    def to_report(self) -> dict:
        return {
            "schema": "geodiam/1",
            "diameter": self.diameter,
            "case": self.case.value if self.case else None,
            "path_count": self.path_count,
            "pairs": [
                {
                    "s": [p.s.x, p.s.y],
                    "t": [p.t.x, p.t.y],
                    "case": p.case.value,
                    "path_count": p.path_count,
                    "defining_pairs": [list(q) for q in p.pair_ids],
                    "certificate": p.certificate,
                }
                for p in self.pairs
            ],
            "complete": self.complete,
            "stats": self.stats,
            "tolerances": {
                "tol_geom": self.tolerances.tol_geom,
                "tol_dist": self.tolerances.tol_dist,
                "tol_residual": self.tolerances.tol_residual,
                "newton_max_iter": self.tolerances.newton_max_iter,
                "multistart_count": self.tolerances.multistart_count,
            },
        }


def prune_cases(h: int) -> set[CaseLabel]:
    """Cases that can host a maximal pair with h holes: a pair with k shortest
    paths forces h >= k-1, so a case needs h >= (its minimum count) - 1."""
    if h < 0:
        raise ValueError("h must be nonnegative")
    return {case for case, k in MIN_PATHS.items() if h >= k - 1}


# ---------------------------------------------------------------------------
# Newton solving


def _start_points(system: EquationSystem, count: int, rng: np.random.Generator,
                  hints: list[np.ndarray] | None = None) -> np.ndarray:
    k = system.variables
    starts = []
    if hints:
        starts.extend(np.asarray(h, dtype=float) for h in hints)
    cu = system.u_xy.mean(axis=0)
    cv = system.v_xy.mean(axis=0)
    spread_u = max(float(np.max(np.hypot(*(system.u_xy - cu).T))), 0.2)
    spread_v = max(float(np.max(np.hypot(*(system.v_xy - cv).T))), 0.2)
    if system.case is CaseLabel.II:
        base = np.concatenate([cu, cv])
        jitter = np.concatenate([np.full(2, spread_u), np.full(2, spread_v)])
        starts.append(base)
        for _ in range(count - 1):
            starts.append(base + rng.uniform(-1, 1, 4) * jitter)
    elif system.case is CaseLabel.BI:
        a, b = system.edge_s
        elen = float(np.linalg.norm(b - a))
        unit = (b - a) / elen
        z0 = float(np.clip((cu - a) @ unit, 0.1 * elen, 0.9 * elen))
        starts.append(np.array([z0, cv[0], cv[1]]))
        for _ in range(count - 1):
            z = rng.uniform(0.05, 0.95) * elen
            tpt = cv + rng.uniform(-1, 1, 2) * spread_v
            starts.append(np.array([z, tpt[0], tpt[1]]))
    else:
        a, b = system.edge_s
        elen_s = float(np.linalg.norm(b - a))
        at, bt = system.edge_t
        elen_t = float(np.linalg.norm(bt - at))
        grid = max(2, int(math.sqrt(count)))
        for i in range(grid):
            for j in range(grid):
                starts.append(np.array([(i + 0.5) / grid * elen_s,
                                        (j + 0.5) / grid * elen_t]))
    out = np.array(starts[: max(count, len(hints or []))], dtype=float)
    return out.reshape(-1, k)


def newton_solve_system(system: EquationSystem, config: SolverConfig,
                        hints: list[np.ndarray] | None = None,
                        starts: int | None = None) -> list[tuple[Point, Point, float]]:
    """Damped multi-start Newton on the equal-length residuals.

    Returns deduplicated converged solutions as (s, t, common length); an
    empty list means no convergence (not an error).  Singular Jacobians only
    disable the start that hit them.
    """
    tol = config.tol
    rng = np.random.default_rng(config.seed + len(system.pair_ids) * 7919
                                + (system.edge_s_id or 0) * 31
                                + (system.edge_t_id or 0) * 17)
    n_starts = starts if starts is not None else tol.multistart_count
    x = _start_points(system, n_starts, rng, hints)
    m = system.variables
    active = np.ones(len(x), dtype=bool)

    for _ in range(tol.newton_max_iter):
        if not active.any():
            break
        res, jac = system.residual_jacobian(x)
        rnorm = np.max(np.abs(res), axis=1)
        active &= rnorm >= tol.tol_residual
        idx = np.nonzero(active)[0]
        if len(idx) == 0:
            break
        J = jac[idx]
        r = res[idx]
        dets = np.abs(np.linalg.det(J))
        ok = dets > 1e-13
        if not ok.all():
            active[idx[~ok]] = False  # singular Jacobian: drop those starts
            idx = idx[ok]
            J = J[ok]
            r = r[ok]
            if len(idx) == 0:
                continue
        step = np.linalg.solve(J, r[:, :, None])[:, :, 0]
        base = np.max(np.abs(r), axis=1)
        accepted = np.zeros(len(idx), dtype=bool)
        xi = x[idx]
        for lam in (1.0, 0.5, 0.25, 0.1, 0.03):
            trial = xi - lam * step
            tres, _ = system.residual_jacobian(trial)
            tn = np.max(np.abs(tres), axis=1)
            take = ~accepted & (tn < base)
            xi[take] = trial[take]
            accepted |= take
            if accepted.all():
                break
        active[idx[~accepted]] = False  # stalled
        x[idx] = xi

    res, _ = system.residual_jacobian(x)
    good = np.max(np.abs(res), axis=1) < tol.tol_residual
    sols: list[tuple[Point, Point, float]] = []
    seen: list[np.ndarray] = []
    s_all, t_all = system.positions(x)
    lens = system.lengths(x)
    for i in np.nonzero(good)[0]:
        vec = np.concatenate([s_all[i], t_all[i]])
        if any(np.max(np.abs(vec - v)) < 10 * tol.tol_geom for v in seen):
            continue
        seen.append(vec)
        sols.append((Point(float(s_all[i, 0]), float(s_all[i, 1])),
                     Point(float(t_all[i, 0]), float(t_all[i, 1])),
                     float(lens[i, 0])))
    return sols


# ---------------------------------------------------------------------------
# corner-anchored cases


def _case_of_locations(ls: Location, lt: Location) -> tuple[CaseLabel, bool]:
    """Case label for two located endpoints; second value says swap (s, t)."""
    rank = {LocationKind.CORNER: 0, LocationKind.BOUNDARY_EDGE: 1,
            LocationKind.INTERIOR: 2}
    a, b = rank[ls.kind], rank[lt.kind]
    swap = a > b
    key = (min(a, b), max(a, b))
    label = {(0, 0): CaseLabel.VV, (0, 1): CaseLabel.VB, (0, 2): CaseLabel.VI,
             (1, 1): CaseLabel.BB, (1, 2): CaseLabel.BI,
             (2, 2): CaseLabel.II}[key]
    return label, swap


def solve_case_corner(domain: PolygonalDomain, table: DistanceTable,
                      config: SolverConfig | None = None) -> list[CandidatePair]:
    """Corner-anchored candidates: farthest point from every corner.

    With config.corner_sweep_limit > 0 only that many sources (largest
    corner-row maximum first) get the full candidate sweep; the rest emit
    their best corner pair directly, which is exact whenever the overall
    farthest point is corner-anchored at those sources.
    """
    config = config or SolverConfig()
    out: list[CandidatePair] = []
    order = np.argsort(-np.max(table.d, axis=1))
    limit = config.corner_sweep_limit
    for rank, ci in enumerate(int(i) for i in order):
        src = domain.corners[ci]
        if limit and rank >= limit:
            tj = int(np.argmax(table.d[ci]))
            out.append(CandidatePair(
                s=src, t=domain.corners[tj], case=CaseLabel.VV, pair_ids=(),
                solved_len=float(table.d[ci, tj])))
            continue
        fr = farthest_point(domain, table, src)
        loc = locate_point(domain, fr.point)
        case, _ = _case_of_locations(Location(LocationKind.CORNER, corner=ci), loc)
        tpt = fr.point
        if loc.kind is LocationKind.CORNER:
            tpt = domain.corners[loc.corner]  # snap to the exact corner
        out.append(CandidatePair(
            s=src, t=tpt, case=case, pair_ids=(),
            solved_len=fr.distance,
            edge_t_id=loc.edge if loc.kind is LocationKind.BOUNDARY_EDGE else None,
        ))
    return out


# ---------------------------------------------------------------------------
# tuple enumeration (cases BB, BI, II)


def _corner_edge_visibility(domain: PolygonalDomain) -> np.ndarray:
    """edge_sees[e, c]: some sample of edge e sees corner c (sampled; used
    only to order and trim edge assignments, never to reject solutions)."""
    cache = domain.metadata.setdefault("_solver_cache", {})
    if "edge_sees" in cache:
        return cache["edge_sees"]
    ne = len(domain.edges)
    n = domain.n
    sees = np.zeros((ne, n), dtype=bool)
    for e in range(ne):
        a = domain.edge_a[e]
        b = domain.edge_b[e]
        for t in (0.08, 0.25, 0.5, 0.75, 0.92):
            p = a + t * (b - a)
            sees[e] |= visibility_mask(domain, p, domain.corner_xy)
    cache["edge_sees"] = sees
    return sees


def _alternation_pairs(domain: PolygonalDomain, table: DistanceTable,
                       config: SolverConfig) -> list[tuple[Point, Point, float]]:
    """Mutually-farthest pairs from alternating farthest-point refinement."""
    cache = domain.metadata.setdefault("_solver_cache", {})
    if "alternation" in cache:
        return cache["alternation"]
    tol = config.tol
    seeds: list[Point] = []
    d = np.where(np.isfinite(table.d), table.d, -np.inf)
    flat = np.argsort(d, axis=None)[::-1]
    used = set()
    for f in flat[: 4 * config.alternation_seeds]:
        i, j = np.unravel_index(int(f), d.shape)
        for c in (int(i), int(j)):
            if c not in used:
                used.add(c)
                seeds.append(domain.corners[c])
        if len(seeds) >= config.alternation_seeds:
            break
    # coarse interior seeds pick up interior-anchored structure
    x0, y0, x1, y1 = domain.bbox
    gx, gy = np.meshgrid(np.linspace(x0, x1, 7)[1:-1], np.linspace(y0, y1, 7)[1:-1])
    grid = np.stack([gx.ravel(), gy.ravel()], axis=1)
    inside = points_in_domain(domain, grid, -domain.tol.tol_geom)
    strictly = grid[inside]
    rng = np.random.default_rng(config.seed)
    if len(strictly):
        take = rng.permutation(len(strictly))[: config.alternation_seeds]
        seeds.extend(Point(float(p[0]), float(p[1])) for p in strictly[take])

    results = []
    for seed in seeds:
        cur = seed
        other = None
        value = -math.inf
        for _ in range(config.alternation_iters):
            fr = farthest_point(domain, table, cur)
            if fr.distance <= value + tol.tol_dist:
                break
            value = fr.distance
            other = cur
            cur = fr.point
        if other is not None:
            results.append((other, cur, value))
    # dedup by rounded endpoints (order-insensitive)
    dedup = {}
    for s, t, v in results:
        k1 = (round(s.x, 6), round(s.y, 6), round(t.x, 6), round(t.y, 6))
        k2 = (k1[2], k1[3], k1[0], k1[1])
        if k1 not in dedup and k2 not in dedup:
            dedup[k1] = (s, t, v)
    out = list(dedup.values())
    cache["alternation"] = out
    return out


def _tight_pairs_at(domain, table, s: Point, t: Point,
                    tol: float) -> list[tuple[int, int]]:
    """Corner pairs (u, v) whose path-length function is tight at (s, t)."""
    ps = enumerate_shortest_paths(domain, table, s, t)
    pairs = []
    for p in ps.paths:
        if p:
            pairs.append((p[0], p[-1]))
    return sorted(set(pairs))


def _system_for_tuple(case: CaseLabel, pair_ids, table: DistanceTable,
                      pts: np.ndarray, edge_s=None, edge_t=None,
                      edge_s_id=None, edge_t_id=None) -> EquationSystem:
    u_xy = pts[[p[0] for p in pair_ids]]
    v_xy = pts[[p[1] for p in pair_ids]]
    d = np.array([table.d[p[0], p[1]] for p in pair_ids])
    return EquationSystem(case=case, pair_ids=tuple(pair_ids), u_xy=u_xy,
                          v_xy=v_xy, d=d, edge_s=edge_s, edge_t=edge_t,
                          edge_s_id=edge_s_id, edge_t_id=edge_t_id)


def _hull_interior(point: np.ndarray, support: np.ndarray, tol: float) -> bool:
    """point strictly inside the convex hull of support (2D)."""
    if len(support) < 3:
        return False
    try:
        from scipy.spatial import ConvexHull
        hull = ConvexHull(support, qhull_options="QJ")
    except Exception:
        return False
    eq = hull.equations
    return bool(np.all(eq[:, :2] @ point + eq[:, 2] < -tol))


def _distinct_rows(xy: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    out = []
    for row in xy:
        if not any(np.hypot(row[0] - r[0], row[1] - r[1]) <= tol for r in out):
            out.append(row)
    return np.array(out)


def _noncollinear(xy: np.ndarray, tol: float) -> bool:
    if len(xy) < 3:
        return False
    a = xy[0]
    for b, c in combinations(xy[1:], 2):
        if abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])) > tol:
            return True
    return False


def _envelope_value(domain, table, s: Point, t: Point) -> float:
    """min over all finite corner pairs of len_{u,v}(s,t), plus the direct
    segment when it is in P; this is the actual geodesic distance."""
    return point_distance(domain, table, s, t).distance


def generate_candidates(case: CaseLabel, domain: PolygonalDomain | None,
                        table: DistanceTable, config: SolverConfig | None = None,
                        lower_bound: float | None = None) -> tuple[list[CandidatePair], bool]:
    """Solved candidates for one of the tuple cases BB, BI, II.

    Returns (candidates, complete).  A solution is emitted only if it lies on
    the lower envelope of its instance (no other corner pair gives a strictly
    shorter route) and matches the case's anchor structure; everything else is
    a pruned tuple, not a candidate.  The enumeration is a DFS over corner
    pair tuples ordered by decreasing d(u,v) with sound distance-bound pruning
    against lower_bound, capped by config.budget (complete=False when hit).
    A seeding pass first refines mutually-farthest pairs found by alternating
    farthest-point sweeps, so large instances find their candidates early.
    """
    if case not in TUPLE_SIZE:
        raise ValueError(f"generate_candidates handles BB/BI/II, not {case}")
    config = config or SolverConfig()
    tol = config.tol
    pts = table.points if domain is None else domain.corner_xy
    if pts is None:
        raise GeodiamError("injected table needs corner coordinates")
    k = TUPLE_SIZE[case]
    n = table.n
    finite = np.isfinite(table.d)
    corner_max = float(np.max(np.where(finite, table.d, -np.inf)))
    lb = corner_max if lower_bound is None else max(lower_bound, corner_max)

    candidates: list[CandidatePair] = []
    seen_keys: set = set()
    budget = [config.budget]
    complete = True

    def _emit(system: EquationSystem, sols) -> None:
        for s, t, val in sols:
            if domain is not None:
                in_p = points_in_domain(domain, np.array([[s.x, s.y], [t.x, t.y]]))
                if not in_p.all():
                    continue
                ls = locate_point(domain, s)
                lt = locate_point(domain, t)
                got, swap = _case_of_locations(ls, lt)
                if got is not case or swap:
                    continue
                if case in (CaseLabel.BB, CaseLabel.BI) and ls.edge != system.edge_s_id:
                    continue
                if case is CaseLabel.BB and lt.edge != system.edge_t_id:
                    continue
            # anchor-structure sanity (necessary conditions for a maximum)
            u_support = _distinct_rows(system.u_xy)
            v_support = _distinct_rows(system.v_xy)
            sxy = np.array([s.x, s.y])
            txy = np.array([t.x, t.y])
            if case in (CaseLabel.II, CaseLabel.BI):
                if not _hull_interior(txy, v_support, tol.tol_geom):
                    continue
            if case is CaseLabel.II:
                if not _hull_interior(sxy, u_support, tol.tol_geom):
                    continue
            # envelope co-occurrence: no other pair may undercut the tuple
            env = _envelope_value(domain, table, s, t)
            if env < val - tol.tol_dist:
                continue
            cand = CandidatePair(s=s, t=t, case=case,
                                 pair_ids=system.pair_ids, solved_len=val,
                                 edge_s_id=system.edge_s_id,
                                 edge_t_id=system.edge_t_id)
            key = cand.key()
            if key in seen_keys:
                continue
            seen_keys.add(key)
            candidates.append(cand)

    def _solve(system: EquationSystem, hints=None, starts=None) -> bool:
        if budget[0] <= 0:
            return False
        budget[0] -= 1
        sols = newton_solve_system(system, config, hints=hints, starts=starts)
        _emit(system, sols)
        return True

    # fixed tuples bypass enumeration entirely
    if config.fixed_tuples is not None:
        for entry in config.fixed_tuples:
            pair_ids = [tuple(p) for p in entry] if not isinstance(entry, dict) \
                else [tuple(p) for p in entry["pairs"]]
            es = et = None
            es_id = et_id = None
            if isinstance(entry, dict):
                if "edge_s" in entry and domain is not None:
                    es_id = entry["edge_s"]
                    es = (domain.edge_a[es_id], domain.edge_b[es_id])
                if "edge_t" in entry and domain is not None:
                    et_id = entry["edge_t"]
                    et = (domain.edge_a[et_id], domain.edge_b[et_id])
            system = _system_for_tuple(case, pair_ids, table, pts, es, et,
                                       es_id, et_id)
            _solve(system, starts=config.tol.multistart_count)
        return candidates, True

    # --- seeding pass: refine alternation pairs into exact solutions
    if domain is not None:
        for s0, t0, _val in _alternation_pairs(domain, table, config):
            ls = locate_point(domain, s0)
            lt = locate_point(domain, t0)
            got, swap = _case_of_locations(ls, lt)
            if got is not case:
                continue
            if swap:
                s0, t0 = t0, s0
                ls, lt = lt, ls
            try:
                tight = _tight_pairs_at(domain, table, s0, t0, tol.tol_dist)
            except GeodiamError:
                continue
            if len(tight) < k:
                continue
            subsets = list(combinations(tight, k)) if len(tight) <= k + 3 \
                else [tuple(tight[:k])]
            hint = None
            if case is CaseLabel.II:
                hint = [np.array([s0.x, s0.y, t0.x, t0.y])]
            es = et = None
            es_id = et_id = None
            if case in (CaseLabel.BB, CaseLabel.BI):
                es_id = ls.edge
                es = (domain.edge_a[es_id], domain.edge_b[es_id])
                a, b = es
                z0 = float(np.hypot(s0.x - a[0], s0.y - a[1]))
                if case is CaseLabel.BI:
                    hint = [np.array([z0, t0.x, t0.y])]
            if case is CaseLabel.BB:
                et_id = lt.edge
                et = (domain.edge_a[et_id], domain.edge_b[et_id])
                at, _bt = et
                zt = float(np.hypot(t0.x - at[0], t0.y - at[1]))
                hint = [np.array([z0, zt])]
            for pair_ids in subsets:
                u_support = _distinct_rows(pts[[p[0] for p in pair_ids]])
                v_support = _distinct_rows(pts[[p[1] for p in pair_ids]])
                if case is CaseLabel.II and (len(u_support) < 3 or len(v_support) < 3):
                    continue
                system = _system_for_tuple(case, pair_ids, table, pts, es, et,
                                           es_id, et_id)
                if not _solve(system, hints=hint):
                    break

    # --- budgeted DFS over pair tuples
    scale = float(np.max(np.hypot(*(pts - pts.mean(axis=0)).T))) * 2 + 1e-9
    ui, vi = np.nonzero(finite)
    keep = table.d[ui, vi] + 2 * scale >= lb - tol.tol_dist
    ui, vi = ui[keep], vi[keep]
    dvals = table.d[ui, vi]
    order = np.argsort(-dvals)
    plist = [(int(ui[o]), int(vi[o]), float(dvals[o])) for o in order]
    pu = pts[[p[0] for p in plist]] if plist else np.zeros((0, 2))
    pv = pts[[p[1] for p in plist]] if plist else np.zeros((0, 2))
    pd = np.array([p[2] for p in plist])

    edge_sees = _corner_edge_visibility(domain) if domain is not None and \
        case in (CaseLabel.BB, CaseLabel.BI) else None

    def _compat(i: int, j: int) -> bool:
        lim = (np.hypot(pu[i, 0] - pu[j, 0], pu[i, 1] - pu[j, 1])
               + np.hypot(pv[i, 0] - pv[j, 0], pv[i, 1] - pv[j, 1]))
        return abs(pd[i] - pd[j]) <= lim + tol.tol_dist

    def _leaf(chosen: list[int]) -> bool:
        """Handle one complete tuple; returns False when budget is gone."""
        ids = [(plist[i][0], plist[i][1]) for i in chosen]
        u_support = _distinct_rows(pu[chosen])
        v_support = _distinct_rows(pv[chosen])
        smin, tmin = MIN_ANCHORS[case]
        if len(u_support) < smin or len(v_support) < tmin:
            return True
        if case is CaseLabel.II and not (
                _noncollinear(u_support, tol.tol_geom)
                and _noncollinear(v_support, tol.tol_geom)):
            return True
        if case in (CaseLabel.BI, CaseLabel.II) and not _noncollinear(
                v_support, tol.tol_geom):
            return True
        hd_u = max((np.hypot(a[0] - b[0], a[1] - b[1])
                    for a, b in combinations(u_support, 2)), default=0.0)
        hd_v = max((np.hypot(a[0] - b[0], a[1] - b[1])
                    for a, b in combinations(v_support, 2)), default=0.0)
        mind = min(pd[i] for i in chosen)

        if case is CaseLabel.II:
            if mind + hd_u + hd_v < lb - tol.tol_dist:
                return True
            system = _system_for_tuple(case, ids, table, pts)
            return _solve(system, starts=config.bulk_starts)

        # B-anchored cases: assign boundary edges
        assert domain is not None
        ne = len(domain.edges)
        u_ids = sorted({i[0] for i in ids})
        v_ids = sorted({i[1] for i in ids})
        for es_id in range(ne):
            if edge_sees is not None and not all(edge_sees[es_id, u] for u in u_ids):
                continue
            amax = np.array([max(np.hypot(*(domain.edge_a[es_id] - pts[i[0]])),
                                 np.hypot(*(domain.edge_b[es_id] - pts[i[0]])))
                             for i in ids])
            if case is CaseLabel.BI:
                if np.min(pd[chosen] + amax + hd_v) < lb - tol.tol_dist:
                    continue
                es = (domain.edge_a[es_id], domain.edge_b[es_id])
                system = _system_for_tuple(case, ids, table, pts, edge_s=es,
                                           edge_s_id=es_id)
                if not _solve(system, starts=config.bulk_starts):
                    return False
                continue
            for et_id in range(ne):
                if edge_sees is not None and not all(edge_sees[et_id, v]
                                                     for v in v_ids):
                    continue
                bmax = np.array([max(np.hypot(*(domain.edge_a[et_id] - pts[i[1]])),
                                     np.hypot(*(domain.edge_b[et_id] - pts[i[1]])))
                                 for i in ids])
                if np.min(pd[chosen] + amax + bmax) < lb - tol.tol_dist:
                    continue
                es = (domain.edge_a[es_id], domain.edge_b[es_id])
                et = (domain.edge_a[et_id], domain.edge_b[et_id])
                system = _system_for_tuple(case, ids, table, pts, edge_s=es,
                                           edge_t=et, edge_s_id=es_id,
                                           edge_t_id=et_id)
                if not _solve(system, starts=config.bulk_starts):
                    return False
        return True

    npairs = len(plist)
    chosen: list[int] = []

    def _dfs(startat: int) -> bool:
        if len(chosen) == k:
            return _leaf(chosen)
        for nxt in range(startat, npairs):
            if npairs - nxt < k - len(chosen):
                return True
            if all(_compat(c, nxt) for c in chosen):
                chosen.append(nxt)
                if not _dfs(nxt + 1):
                    chosen.pop()
                    return False
                chosen.pop()
        return True

    if npairs >= k:
        complete = _dfs(0)
    return candidates, complete


# ---------------------------------------------------------------------------
# validation and certification


def validate_candidate(domain: PolygonalDomain | None, table: DistanceTable,
                       cand: CandidatePair,
                       config: SolverConfig | None = None) -> CandidatePair:
    """Check a Solved candidate: anchors match the case, the solved length is
    the true geodesic distance, the path count and first/last corner sets meet
    the case minimums, and the anchor structure is locally maximal-feasible
    (interior points inside the hull of their corner set, boundary points with
    a defining corner off the edge's line)."""
    config = config or SolverConfig()
    tol = config.tol
    if cand.status != SOLVED:
        return cand

    def rejected(reason: str) -> CandidatePair:
        return replace(cand, status=REJECTED, reject_reason=reason)

    if domain is not None:
        ls = locate_point(domain, cand.s)
        lt = locate_point(domain, cand.t)
        if not (ls.in_domain and lt.in_domain):
            return rejected("outside_domain")
        got, swap = _case_of_locations(ls, lt)
        if got is not cand.case or swap:
            return rejected("anchor_mismatch")

    try:
        true = point_distance(domain, table, cand.s, cand.t).distance
    except PointOutsideDomain:
        return rejected("outside_domain")
    if abs(true - cand.solved_len) > tol.tol_dist:
        return rejected("not_shortest")

    try:
        ps = enumerate_shortest_paths(domain, table, cand.s, cand.t,
                                      tol.tol_dist, cap=config.path_cap)
    except GeodiamError as exc:
        return rejected(f"path_enumeration: {exc}")
    need = MIN_PATHS[cand.case]
    if ps.count < need:
        return rejected("path_count")
    smin, tmin = MIN_ANCHORS[cand.case]
    if len(ps.first_corners) < smin or len(ps.last_corners) < tmin:
        return rejected("anchor_set_size")

    pts = table.points if domain is None else domain.corner_xy
    sxy = np.array([cand.s.x, cand.s.y])
    txy = np.array([cand.t.x, cand.t.y])
    geom_tol = tol.tol_geom

    def interior_ok(xy, corner_set) -> bool:
        support = pts[sorted(corner_set)]
        return _hull_interior(xy, support, geom_tol)

    def boundary_ok(xy, corner_set, edge_id) -> bool:
        a = domain.edge_a[edge_id]
        b = domain.edge_b[edge_id]
        ab = b - a
        ln = np.hypot(*ab)
        for c in corner_set:
            p = pts[c]
            cross = abs(ab[0] * (p[1] - a[1]) - ab[1] * (p[0] - a[0])) / ln
            if cross > geom_tol * 10:
                return True
        return False

    if domain is None:
        # injected instances model interior-interior pairs
        if not (interior_ok(sxy, ps.first_corners)
                and interior_ok(txy, ps.last_corners)):
            return rejected("hull_structure")
    else:
        if cand.case in (CaseLabel.VI, CaseLabel.BI, CaseLabel.II):
            if not interior_ok(txy, ps.last_corners):
                return rejected("hull_structure")
        if cand.case is CaseLabel.II:
            if not interior_ok(sxy, ps.first_corners):
                return rejected("hull_structure")
        if cand.case in (CaseLabel.VB, CaseLabel.BB):
            et = locate_point(domain, cand.t).edge
            if et is None or not boundary_ok(txy, ps.last_corners, et):
                return rejected("edge_line_structure")
        if cand.case in (CaseLabel.BB, CaseLabel.BI):
            es = locate_point(domain, cand.s).edge
            if es is None or not boundary_ok(sxy, ps.first_corners, es):
                return rejected("edge_line_structure")

    return replace(cand, status=VALIDATED, path_count=ps.count,
                   first_corners=ps.first_corners, last_corners=ps.last_corners)


def _tight_gradients(cand: CandidatePair, pts: np.ndarray,
                     pairs: list[tuple[int, int]]) -> np.ndarray:
    s = np.array([cand.s.x, cand.s.y])
    t = np.array([cand.t.x, cand.t.y])
    g = []
    for u, v in pairs:
        du = s - pts[u]
        dv = t - pts[v]
        ru = max(float(np.hypot(*du)), 1e-14)
        rv = max(float(np.hypot(*dv)), 1e-14)
        g.append(np.concatenate([du / ru, dv / rv]))
    return np.array(g)


def _gradient_certificate(grads: np.ndarray) -> bool:
    """One gradient is a strictly negative combination of four independent
    others: certifies a local maximum of the pointwise minimum."""
    m = len(grads)
    if m != 5:
        return False
    for i in range(m):
        others = np.delete(grads, i, axis=0).T  # 4x4, columns are gradients
        if abs(np.linalg.det(others)) < 1e-10:
            continue
        lam = np.linalg.solve(others, grads[i])
        if np.all(lam < -1e-9):
            return True
    return False


def certify_maximal(domain: PolygonalDomain | None, table: DistanceTable,
                    cand: CandidatePair,
                    config: SolverConfig | None = None) -> CandidatePair:
    """Certify a Validated candidate as a local maximum.

    Interior-interior candidates with exactly five tight pairs get the
    gradient certificate (one tight gradient is a negative combination of the
    four others); all remaining cases, and gradient degeneracies, fall back to
    probing: the geodesic distance is evaluated on rings of feasible perturbed
    pairs and must never exceed the candidate value beyond tol_dist."""
    config = config or SolverConfig()
    tol = config.tol
    if cand.status != VALIDATED:
        return cand
    pts = table.points if domain is None else domain.corner_xy

    tight: list[tuple[int, int]] = []
    try:
        ps = enumerate_shortest_paths(domain, table, cand.s, cand.t,
                                      tol.tol_dist, cap=config.path_cap)
        tight = sorted({(p[0], p[-1]) for p in ps.paths if p})
    except GeodiamError:
        tight = list(cand.pair_ids)

    if cand.case is CaseLabel.II and len(tight) == 5:
        grads = _tight_gradients(cand, pts, tight)
        if _gradient_certificate(grads):
            return replace(cand, status=CERTIFIED, certificate="gradient")
        # fall through to probe on degenerate or indefinite gradients

    if domain is None:
        # With no geometry there is nothing else to probe against: the
        # gradient certificate is the only decision procedure.
        if cand.case is CaseLabel.II and len(tight) >= 5:
            for subset in combinations(tight, 5):
                if _gradient_certificate(_tight_gradients(cand, pts, list(subset))):
                    return replace(cand, status=CERTIFIED, certificate="gradient")
        return replace(cand, status=REJECTED, reject_reason="not_maximal")

    # probe certification
    rng = np.random.default_rng(config.seed + 10007)
    scale = domain.scale
    radii = [10 * tol.tol_geom, 100 * tol.tol_geom,
             1e-4 * scale, 1e-3 * scale, 1e-2 * scale]
    sxy = np.array([cand.s.x, cand.s.y])
    txy = np.array([cand.t.x, cand.t.y])
    ls = locate_point(domain, cand.s)
    lt = locate_point(domain, cand.t)

    def basis(loc: Location) -> np.ndarray:
        if loc.kind is LocationKind.BOUNDARY_EDGE:
            a = domain.edge_a[loc.edge]
            b = domain.edge_b[loc.edge]
            u = (b - a) / np.hypot(*(b - a))
            return u[None, :]
        return np.eye(2)

    bs = basis(ls)
    bt = basis(lt)
    dim = len(bs) + len(bt)
    dirs = rng.normal(size=(config.probe_count, dim))
    dirs /= np.maximum(np.linalg.norm(dirs, axis=1, keepdims=True), 1e-12)

    base = cand.solved_len
    for radius in radii:
        offs = dirs * radius
        s_off = offs[:, : len(bs)] @ bs
        t_off = offs[:, len(bs):] @ bt
        s_new = sxy[None, :] + s_off
        t_new = txy[None, :] + t_off
        feas = points_in_domain(domain, s_new) & points_in_domain(domain, t_new)
        for i in np.nonzero(feas)[0]:
            try:
                d = point_distance(domain, table, s_new[i], t_new[i]).distance
            except PointOutsideDomain:
                continue
            if d > base + tol.tol_dist:
                return replace(cand, status=REJECTED, reject_reason="not_maximal")
    return replace(cand, status=CERTIFIED, certificate="probe")


# ---------------------------------------------------------------------------
# top-level driver


def _resolve_cases(config: SolverConfig, h: int) -> set[CaseLabel]:
    if config.cases == "auto":
        return prune_cases(h)
    if isinstance(config.cases, str):
        names = [config.cases]
    else:
        names = list(config.cases)
    return {CaseLabel(name.upper()) for name in names}


def compute_diameter(domain: PolygonalDomain,
                     config: SolverConfig | None = None,
                     table: DistanceTable | None = None) -> DiameterResult:
    """Geodesic diameter of the domain with certified diametral pair(s).

    Corner-anchored candidates are always computed; the tuple cases run when
    enabled by hole-count pruning (or forced via config.cases).  Certification
    is applied to the candidates attaining the maximum.  The result's
    completeness flag reports whether every tuple enumeration ran to
    exhaustion within budget.
    """
    config = config or SolverConfig()
    tol = config.tol
    t0 = time.perf_counter()
    if table is None:
        graph = build_visibility_graph(domain)
        table = corner_distances(graph)
    if config.corner_sweep_limit == 0 and domain.n > 150:
        # desk-scale guard: keep the promising sources exact on big fixtures
        config = replace(config, corner_sweep_limit=64)
    corner_pair_max = float(np.max(table.d))
    enabled = _resolve_cases(config, domain.h)
    stats: dict = {"cases_enabled": sorted(c.value for c in enabled),
                   "per_case": {}}

    all_candidates: list[CandidatePair] = []
    complete = True

    corner_cands = solve_case_corner(domain, table, config)
    validated: list[CandidatePair] = []
    for cand in corner_cands:
        if cand.case in enabled or cand.case in (CaseLabel.VV, CaseLabel.VB,
                                                 CaseLabel.VI):
            checked = validate_candidate(domain, table, cand, config)
        else:
            checked = replace(cand, status=REJECTED, reject_reason="case_pruned")
        all_candidates.append(checked)
        if checked.status == VALIDATED:
            validated.append(checked)
    stats["per_case"]["corner_sweep"] = {
        "generated": len(corner_cands),
        "validated": sum(1 for c in all_candidates if c.status == VALIDATED),
    }

    best_so_far = max([corner_pair_max] + [c.solved_len for c in validated])
    for case in (CaseLabel.BB, CaseLabel.BI, CaseLabel.II):
        if case not in enabled:
            continue
        gen, case_complete = generate_candidates(case, domain, table, config,
                                                 lower_bound=best_so_far)
        complete &= case_complete
        case_stats = {"generated": len(gen), "validated": 0, "complete": case_complete}
        for cand in gen:
            checked = validate_candidate(domain, table, cand, config)
            all_candidates.append(checked)
            if checked.status == VALIDATED:
                validated.append(checked)
                case_stats["validated"] += 1
                best_so_far = max(best_so_far, checked.solved_len)
        stats["per_case"][case.value] = case_stats

    if not validated:
        raise GeodiamError("no validated candidates (corner sweep failed)")
    best_val = max(c.solved_len for c in validated)
    top = [c for c in validated if c.solved_len >= best_val - tol.tol_dist]
    certified: list[CandidatePair] = []
    for cand in sorted(top, key=lambda c: (-c.solved_len, c.key())):
        done = certify_maximal(domain, table, cand, config)
        idx = all_candidates.index(cand)
        all_candidates[idx] = done
        if done.status == CERTIFIED:
            certified.append(done)

    if certified:
        diameter = max(c.solved_len for c in certified)
        pairs = sorted((c for c in certified
                        if c.solved_len >= diameter - tol.tol_dist),
                       key=lambda c: c.key())
    else:
        # every top candidate failed certification; fall back to the best
        # validated value, which is still a true geodesic distance
        diameter = best_val
        pairs = sorted((c for c in validated
                        if c.solved_len >= diameter - tol.tol_dist),
                       key=lambda c: c.key())
    if diameter < corner_pair_max - tol.tol_dist:
        raise GeodiamError("internal: diameter below corner-pair maximum")

    stats["corner_pair_max"] = corner_pair_max
    stats["wall_time_s"] = time.perf_counter() - t0
    best_pair = pairs[0] if pairs else None
    return DiameterResult(
        diameter=diameter,
        pairs=pairs,
        case=best_pair.case if best_pair else None,
        path_count=best_pair.path_count if best_pair else None,
        stats=stats,
        complete=complete,
        tolerances=tol,
        candidates=all_candidates,
    )
