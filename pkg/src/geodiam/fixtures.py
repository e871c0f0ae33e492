"""Deterministic test domains.

The jigsaw fixture realizes two empty unit-circumradius equilateral triangles
whose corners are joined by six narrow calibrated tubes forming the cyclic
pattern d(u1,v1), d(u1,v2), d(u2,v2), d(u2,v3), d(u3,v3), d(u3,v1); the five
regions pinched between the tubes become the holes.  Tube serpentines are
calibrated per corridor (bisection on the measured corner-to-corner geodesic)
so the six lengths agree to machine-level tolerance; the realized value is
reported in domain.metadata["corridor_len"].
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import InfeasibleParams, UnknownFixture
from .geometry import PolygonalDomain, ToleranceConfig, validate_domain

__all__ = ["make_fixture", "injected_case_ii_instance"]


def _unit(angle_deg: float) -> np.ndarray:
    a = math.radians(angle_deg)
    return np.array([math.cos(a), math.sin(a)])


def _rot90(v: np.ndarray, sign: float) -> np.ndarray:
    return np.array([-sign * v[1], sign * v[0]])


# ---------------------------------------------------------------------------
# jigsaw construction


# Tube layout constants: triangle centers at (0,0) and (D,0), unit
# circumradius; tubes routed as a non-crossing planar arc system.
_JIG = {
    "D": 2.9,
    "w": 0.06,  # tube width
    # stem rotation off the radial direction: the hinge bend at each corner;
    # must stay clear of the +-30 degree side extensions of the triangle
    "alpha": 18.0,
    "stem": 0.30,
}


def _jigsaw_geometry(D: float):
    u1 = _unit(90.0)
    u2 = _unit(-30.0)
    u3 = _unit(210.0)
    B = np.array([D, 0.0])
    v2 = B + _unit(90.0)
    v1 = B + _unit(-30.0)
    v3 = B + _unit(210.0)
    return {"u1": u1, "u2": u2, "u3": u3, "v1": v1, "v2": v2, "v3": v3,
            "A": np.zeros(2), "B": B}


_STRIP_LEN = 0.36
_STRIP_BACK = 0.001
_WIN_A = 0.14
_WIN_B = 0.30
_STUB = 0.16

_STRIP_SIDE = {
    "u1": +1.0,  # strip body west of the radial; windows east
    "u2": +1.0,  # body toward the gap; windows south-west
    "u3": -1.0,  # windows south-east
    "v2": -1.0,  # windows west
    "v1": +1.0,  # windows south-west
    "v3": -1.0,  # windows north... body north-west of the radial; windows south-east
}

_RADIAL = {"u1": 90.0, "u2": -30.0, "u3": 210.0,
           "v2": 90.0, "v1": -30.0, "v3": 210.0}


def _corner_frame(g: dict, corner: str, w: float):
    """Aperture strip for one corner: a short dead-end tube leaving the
    corner exactly along the radial from the triangle center, wall through
    the corner on the window side.  Geodesics from the center graze the
    corner and the wall collinearly and wrap the window edges, which makes
    corridor distances decompose exactly as (distance to the corner) +
    (corner-to-corner corridor length)."""
    c = g[corner]
    r = _unit(_RADIAL[corner])
    n = _rot90(r, _STRIP_SIDE[corner])
    strip = [c + n * (w / 2) - r * _STRIP_BACK,
             c + n * (w / 2) + r * _STRIP_LEN]
    return {"strip": strip, "wa": c + r * _WIN_A, "wb": c + r * _WIN_B,
            "n": n, "out": -n, "r": r}


def _comb(x0: float, x1: float, base_y: float, tip_y: float,
          teeth: int, amp: float) -> list[np.ndarray]:
    """Comb serpentine from (x0, base_y) to (x1, base_y): `teeth` prongs
    reaching toward tip_y, depth scaled by amp in [0, 1]."""
    pts = [np.array([x0, base_y])]
    xs = np.linspace(x0, x1, 2 * teeth + 1)
    tip = base_y + (tip_y - base_y) * max(amp, 1e-3)
    for k in range(teeth):
        xa, xb = xs[2 * k], xs[2 * k + 1]
        xc = xs[2 * k + 2]
        pts.append(np.array([xa, tip]))
        pts.append(np.array([xb, tip]))
        pts.append(np.array([xb, base_y]))
        pts.append(np.array([xc, base_y]))
    return pts


def _jigsaw_arcs(D: float, w: float, amps: dict[str, float]):
    """Polylines for the six tubes plus the corner strips; amps scale the
    serpentine depths (calibration parameters).

    Each tube attaches through a window in a corner strip wall (see
    _corner_frame): a1 loops over the north and down the far east; a2 combs
    in the north yard; a3 climbs the gap with westward teeth; a4 combs in
    the inner south yard; a5 combs in the south-west yard and comes back
    under; a6 is the outer south loop up the far east.  The set realizes a
    non-crossing planar arc system, which the builder verifies via the hole
    count.
    """
    g = _jigsaw_geometry(D)
    frames = {c: _corner_frame(g, c, w) for c in _RADIAL}

    def attach(corner, window):
        # flush stub: its flat end face lies on the strip wall (plus a float
        # safety overlap), so geodesics cross between corridor and strip
        # exactly on the corner-collinear wall line
        f = frames[corner]
        wpt = f[window]
        return [wpt + f["n"] * 1e-6, wpt + f["out"] * _STUB]

    arcs: dict[str, list[np.ndarray]] = {}

    # arc1 (u1 -> v1): windows u1/far, v1/far
    a = amps.get("a1", 0.5)
    pts = attach("u1", "wb") + [np.array([0.26, 1.44]), np.array([0.26, 2.60])]
    pts += _comb(0.56, 4.10, 2.60, 2.60 + 0.34, 9, a)
    arcs["a1"] = pts + [np.array([4.35, 2.52]), np.array([4.35, -0.90]),
                        np.array([4.05, -0.90])] + attach("v1", "wb")[::-1]

    # arc2 (u1 -> v2): windows u1/near, v2/far (loops over the v2 strip cap)
    a = amps.get("a2", 0.5)
    pts = attach("u1", "wa") + [np.array([0.55, 1.30]), np.array([0.66, 1.40])]
    pts += _comb(0.70, 2.30, 1.42, 1.42 + 0.98, 5, a)
    arcs["a2"] = pts + [np.array([2.45, 1.40])] + attach("v2", "wb")[::-1]

    # arc3 (u2 -> v2): windows u2/far, v2/near; spine up the gap with
    # westward teeth shaped to the converging triangle sides
    a = amps.get("a3", 0.5)
    spine = 1.70
    bands = [(-0.30, -0.12, 0.85), (0.02, 0.20, 0.62),
             (0.34, 0.52, 0.43), (0.66, 0.84, 0.26)]
    pts = attach("u2", "wb") + [np.array([1.20, -0.86]), np.array([1.44, -0.86]),
                                np.array([1.44, -0.42]),
                                np.array([spine, -0.42])]
    for y_lo, y_hi, tip in bands:
        tip_eff = spine - (spine - tip) * max(a, 1e-3)
        pts += [np.array([spine, y_lo]), np.array([tip_eff, y_lo]),
                np.array([tip_eff, y_hi]), np.array([spine, y_hi])]
    arcs["a3"] = pts + [np.array([spine, 0.92]), np.array([2.30, 1.02]),
                        np.array([2.56, 1.08])] + attach("v2", "wa")[::-1]

    # arc4 (u2 -> v3): windows u2/near, v3/far; the entry loops west of the
    # comb so the tooth mouths stay open
    a = amps.get("a4", 0.5)
    pts = attach("u2", "wa") + [np.array([0.28, -0.74]),
                                np.array([0.28, -0.97]),
                                np.array([0.36, -1.02])]
    pts += _comb(0.36, 1.70, -1.02, -1.02 - 0.90, 5, a)
    arcs["a4"] = pts + attach("v3", "wb")[::-1]

    # arc5 (u3 -> v3): windows u3/near, v3/near
    a = amps.get("a5", 0.5)
    pts = attach("u3", "wa") + [np.array([-0.80, -0.98]),
                                np.array([-0.75, -1.02])]
    pts += _comb(-0.75, 0.10, -1.02, -1.02 - 0.80, 3, a)
    arcs["a5"] = pts + [np.array([0.22, -1.08]), np.array([0.22, -2.07]),
                        np.array([2.55, -2.07]), np.array([2.55, -0.85]),
                        np.array([2.42, -0.80])] + attach("v3", "wa")[::-1]

    # arc6 (u3 -> v1): windows u3/far, v1/near
    a = amps.get("a6", 0.5)
    pts = attach("u3", "wb") + [np.array([-1.05, -0.95]),
                                np.array([-1.05, -2.12]),
                                np.array([-0.94, -2.20])]
    pts += _comb(-0.90, 1.40, -2.20, -2.20 - 0.45, 3, a)
    arcs["a6"] = pts + [np.array([4.55, -2.20]), np.array([4.55, -1.02]),
                        np.array([3.85, -1.02])] + attach("v1", "wa")[::-1]

    strips = [frames[c]["strip"] for c in frames]
    return arcs, strips, g


_ARC_CORNERS = {"a1": ("u1", "v1"), "a2": ("u1", "v2"), "a3": ("u2", "v2"),
                "a4": ("u2", "v3"), "a5": ("u3", "v3"), "a6": ("u3", "v1")}


def _build_jigsaw_domain(D: float, w: float, amps: dict[str, float],
                         only_arcs=None, tol: ToleranceConfig | None = None):
    from shapely.geometry import LineString, Polygon as ShPolygon
    from shapely.ops import unary_union

    arcs, strips, g = _jigsaw_arcs(D, w, amps)
    tri_u = ShPolygon([tuple(g["u1"]), tuple(g["u2"]), tuple(g["u3"])])
    tri_v = ShPolygon([tuple(g["v1"]), tuple(g["v2"]), tuple(g["v3"])])
    parts = [tri_u, tri_v]
    for pts in strips:
        parts.append(LineString([tuple(p) for p in pts]).buffer(
            w / 2, cap_style=2, join_style=2, quad_segs=2))
    names = only_arcs if only_arcs is not None else list(arcs)
    for name in names:
        parts.append(LineString([tuple(p) for p in arcs[name]]).buffer(
            w / 2, cap_style=2, join_style=2, quad_segs=2))
    # window geometry must match the assembly: absent arcs contribute their
    # dead-end window stubs at both corners
    for name in arcs:
        if name in names:
            continue
        pts = arcs[name]
        for stub in (pts[:2], pts[-2:][::-1]):
            parts.append(LineString([tuple(p) for p in stub]).buffer(
                w / 2, cap_style=2, join_style=2, quad_segs=2))
    free = unary_union(parts)
    if free.geom_type != "Polygon":
        raise InfeasibleParams(f"jigsaw tubes disconnect the free space "
                               f"({free.geom_type})")
    free = free.simplify(1e-12)
    outer = [list(xy) for xy in free.exterior.coords[:-1]]
    holes = [[list(xy) for xy in ring.coords[:-1]] for ring in free.interiors]

    # snap the six triangle corners exactly onto boundary vertices
    targets = {k: g[k] for k in ("u1", "u2", "u3", "v1", "v2", "v3")}
    for ring in [outer] + holes:
        for i, (x, y) in enumerate(ring):
            for tgt in targets.values():
                if abs(x - tgt[0]) < 1e-7 and abs(y - tgt[1]) < 1e-7:
                    ring[i] = [float(tgt[0]), float(tgt[1])]
    dom = validate_domain({"outer": outer, "holes": holes},
                          tol or ToleranceConfig())
    return dom, g


def _corner_index(dom: PolygonalDomain, pt: np.ndarray) -> int:
    d = np.hypot(dom.corner_xy[:, 0] - pt[0], dom.corner_xy[:, 1] - pt[1])
    i = int(np.argmin(d))
    if d[i] > 1e-7:
        raise InfeasibleParams(f"triangle corner {pt} missing from boundary "
                               f"(nearest {d[i]:.2e})")
    return i


def _measure_corridor(dom: PolygonalDomain, g, arc_name: str) -> float:
    from .engine import build_visibility_graph, corner_distances
    cu, cv = _ARC_CORNERS[arc_name]
    iu = _corner_index(dom, g[cu])
    iv = _corner_index(dom, g[cv])
    table = corner_distances(build_visibility_graph(dom))
    return float(table.d[iu, iv])


def _calibrate_jigsaw(length: float, tol_cal: float = 1e-9):
    from scipy.optimize import brentq

    D, w = _JIG["D"], _JIG["w"]
    amps: dict[str, float] = {}
    for arc in _ARC_CORNERS:
        def measured(a: float) -> float:
            trial = dict(amps)
            trial[arc] = a
            dom, g = _build_jigsaw_domain(D, w, trial, only_arcs=[arc])
            return _measure_corridor(dom, g, arc) - length

        lo, hi = 0.02, 1.0
        flo = measured(lo)
        fhi = measured(hi)
        if flo > 0:
            raise InfeasibleParams(
                f"jigsaw corridor {arc} base length exceeds target "
                f"{length} by {flo:.3f}")
        if fhi < 0:
            raise InfeasibleParams(
                f"jigsaw corridor {arc} cannot reach target {length} "
                f"(max shortfall {-fhi:.3f})")
        amps[arc] = float(brentq(measured, lo, hi, xtol=tol_cal / 4))
    return amps


@lru_cache(maxsize=4)
def _jigsaw_cached(length: float) -> PolygonalDomain:
    amps = _calibrate_jigsaw(length)
    dom, g = _build_jigsaw_domain(_JIG["D"], _JIG["w"], amps)
    if not 5 <= dom.h <= 7:
        raise InfeasibleParams(f"jigsaw produced {dom.h} holes, expected about 5")
    from .engine import build_visibility_graph, corner_distances
    table = corner_distances(build_visibility_graph(dom))
    lengths = []
    for arc, (cu, cv) in _ARC_CORNERS.items():
        iu = _corner_index(dom, g[cu])
        iv = _corner_index(dom, g[cv])
        lengths.append(float(table.d[iu, iv]))
    spread = max(lengths) - min(lengths)
    if spread > 1e-7:
        raise InfeasibleParams(f"jigsaw corridor lengths unequal: {lengths}")
    dom.metadata["corridor_len"] = float(np.mean(lengths))
    dom.metadata["corridor_lengths"] = lengths
    dom.metadata["centers"] = ([0.0, 0.0], [float(_JIG['D']), 0.0])
    dom.metadata["triangle_corners"] = {
        k: [float(g[k][0]), float(g[k][1])]
        for k in ("u1", "u2", "u3", "v1", "v2", "v3")}
    return dom


# ---------------------------------------------------------------------------
# random domains


def _random_domain(seed: int, n: int, h: int,
                   tol: ToleranceConfig | None = None) -> PolygonalDomain:
    """Star-shaped outer polygon with small star-shaped holes."""
    if n < 3 or h < 0:
        raise InfeasibleParams(f"random fixture needs n >= 3, h >= 0")
    rng = np.random.default_rng(seed)
    for _ in range(64):
        angles = np.sort(rng.uniform(0, 2 * math.pi, n))
        if np.min(np.diff(angles, append=angles[0] + 2 * math.pi)) < 0.02:
            continue
        radii = rng.uniform(1.2, 3.0, n)
        outer = np.stack([radii * np.cos(angles), radii * np.sin(angles)],
                         axis=1)
        try:
            dom = validate_domain({"outer": outer.tolist(), "holes": []},
                                  tol or ToleranceConfig())
        except Exception:
            continue
        holes = []
        placed = 0
        attempts = 0
        while placed < h and attempts < 400:
            attempts += 1
            m = int(rng.integers(4, 8))
            c = rng.uniform(-1.8, 1.8, 2)
            r = rng.uniform(0.12, 0.3)
            ha = np.sort(rng.uniform(0, 2 * math.pi, m))
            if np.min(np.diff(ha, append=ha[0] + 2 * math.pi)) < 0.05:
                continue
            hr = rng.uniform(0.5 * r, r, m)
            hole = np.stack([c[0] + hr * np.cos(ha), c[1] + hr * np.sin(ha)],
                            axis=1)
            try:
                cand = validate_domain({"outer": outer.tolist(),
                                        "holes": [hh.tolist() for hh in
                                                  holes + [hole]]},
                                       tol or ToleranceConfig())
            except Exception:
                continue
            # keep holes clear of the outer boundary and of each other
            from .geometry import _points_segments_dist
            dmin = _points_segments_dist(hole, np.asarray(outer),
                                         np.roll(np.asarray(outer), -1,
                                                 axis=0)).min()
            if dmin < 0.1:
                continue
            holes.append(hole)
            placed += 1
            dom = cand
        if placed == h:
            return dom
    raise InfeasibleParams(f"could not realize random domain "
                           f"(seed={seed}, n={n}, h={h})")


# ---------------------------------------------------------------------------
# public API


def make_fixture(name: str, params: dict | None = None,
                 tol: ToleranceConfig | None = None) -> PolygonalDomain:
    """Deterministic fixture factory.

    Names: square, l_shape, square_with_hole, jigsaw(corridor_len),
    random(seed, n, h).
    """
    params = dict(params or {})
    tol = tol or ToleranceConfig()
    if name == "square":
        return validate_domain({"outer": [[0, 0], [1, 0], [1, 1], [0, 1]],
                                "holes": []}, tol)
    if name == "l_shape":
        return validate_domain({"outer": [[0, 0], [2, 0], [2, 1], [1, 1],
                                          [1, 2], [0, 2]], "holes": []}, tol)
    if name == "square_with_hole":
        return validate_domain({
            "outer": [[0, 0], [4, 0], [4, 4], [0, 4]],
            "holes": [[[1.5, 1.5], [2.5, 1.5], [2.5, 2.5], [1.5, 2.5]]]}, tol)
    if name == "jigsaw":
        length = float(params.pop("corridor_len", 10.0))
        if params:
            raise InfeasibleParams(f"unknown jigsaw params {sorted(params)}")
        if length < 1.0:
            raise InfeasibleParams("jigsaw corridor_len must be >= 1")
        return _jigsaw_cached(length)
    if name == "random":
        seed = int(params.pop("seed", 0))
        n = int(params.pop("n", 12))
        h = int(params.pop("h", 0))
        if params:
            raise InfeasibleParams(f"unknown random params {sorted(params)}")
        return _random_domain(seed, n, h, tol)
    raise UnknownFixture(f"unknown fixture {name!r}")


def injected_case_ii_instance(length: float = 10.0):
    """The interior-interior algebraic instance with exactly five tight pairs.

    Two isosceles triangles inscribed in unit circles (apex angles 18 and 112
    degrees, horizontal bases, apexes up), with injected corner distances
    d(apex_u, base_v1) = d(apex_u, base_v2) = L, d(apex_u, apex_v) = L + 0.5,
    d(base_u1, base_v2) = d(base_u2, base_v1) = L + 0.2 (a crossed pairing).
    Returns (table, pair index tuples, u-center, v-center).
    """
    from .engine import DistanceTable

    cu = np.array([0.0, 0.0])
    cv = np.array([40.0, 0.0])
    su = math.sin(math.radians(18.0))
    cu18 = math.cos(math.radians(18.0))
    sv = math.sin(math.radians(112.0))
    cv112 = math.cos(math.radians(112.0))
    pts = np.array([
        cu + np.array([0.0, 1.0]),        # 0 u apex
        cu + np.array([+su, -cu18]),      # 1 u base +x
        cu + np.array([-su, -cu18]),      # 2 u base -x
        cv + np.array([0.0, 1.0]),        # 3 v apex
        cv + np.array([+sv, -cv112]),     # 4 v base +x
        cv + np.array([-sv, -cv112]),     # 5 v base -x
    ])
    pairs = [(0, 4), (0, 3), (0, 5), (1, 5), (2, 4)]
    entries = {
        (0, 4): length,
        (0, 3): length + 0.5,
        (0, 5): length,
        (1, 5): length + 0.2,
        (2, 4): length + 0.2,
    }
    table = DistanceTable.injected(pts, entries)
    return table, pairs, cu, cv
