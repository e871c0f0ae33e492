"""Geodesic diameter of polygonal domains with holes.

Exact solver built on the six-case analysis of geodesic-maximal pairs
(corner / boundary / interior anchors), plus farthest-point computation,
shortest-path enumeration, approximation modes, and an independent grid
oracle for verification.
"""

from .errors import (
    BudgetExceeded,
    DegenerateChain,
    DegenerateConfiguration,
    DisconnectedDomain,
    GeodiamError,
    GridDisconnected,
    HoleOutsideOuter,
    HolesOverlap,
    InfeasibleParams,
    InvalidEps,
    PathExplosion,
    PointOutsideDomain,
    SelfIntersectingChain,
    UnknownFixture,
)
from .geometry import (
    Edge,
    Location,
    LocationKind,
    Point,
    PolygonChain,
    PolygonalDomain,
    ToleranceConfig,
    dump_domain,
    load_domain,
    locate_point,
    segment_visible,
    validate_domain,
)
from .engine import (
    DistanceTable,
    GeodesicResult,
    PathSet,
    VisibilityGraph,
    build_visibility_graph,
    corner_distances,
    enumerate_shortest_paths,
    point_distance,
)
from .farthest import (
    FarthestResult,
    SpmCandidate,
    farthest_point,
    solve_spm_edge_boundary,
    solve_spm_vertex,
)
from .solver import (
    CandidatePair,
    CaseLabel,
    DiameterResult,
    EquationSystem,
    SolverConfig,
    certify_maximal,
    compute_diameter,
    generate_candidates,
    newton_solve_system,
    prune_cases,
    solve_case_corner,
    validate_candidate,
)
from .approx import (
    ApproxResult,
    GridOracle,
    grid_approx,
    oracle_diameter,
    oracle_distance,
    two_approx,
)
from .fixtures import make_fixture

__version__ = "0.1.0"
