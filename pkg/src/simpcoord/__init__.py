"""Deformed simplicial coordinates of decorated ideal triangulations."""

from .coordinates import (
    PolytopeReport,
    PsiVector,
    boundary_probe,
    corner_table,
    edge_bound,
    penner_psi,
    phi,
    polytope_membership,
    psi,
    psi_signs,
)
from .corpus import CORPUS, corpus, load_surface
from .delaunay import DelaunayVerdict, FlipRecord, delaunay_check, flip_to_delaunay, ptolemy_flip
from .errors import (
    DomainError,
    EnumerationCapError,
    FlipError,
    LinearSolveError,
    MetricFormatError,
    NotInPolytopeError,
    OutOfRangeError,
    SimpCoordError,
    SurfaceFormatError,
)
from .inversion import SolveOptions, SolveResult, assemble_hessian, invert_psi
from .surface import (
    EdgePath,
    EdgeSide,
    Triangle,
    Triangulation,
    enumerate_fundamental_loops,
    enumerate_fundamental_paths,
    flip_combinatorial,
    parse_surface,
    surface_document,
)
from .triangle import (
    corner_angles,
    l_of_u,
    mu,
    mu_infinity,
    mu_inverse,
    triangle_gradient,
    triangle_hessian,
    u_of_l,
    x_invariants,
)

__version__ = "0.1.0"
