"""holodisc: singular integral operators on the unit disc, fixed-point
solvers for pseudoholomorphic discs, disc families glued to totally real
edges, and boundary-limit experiments on wedge domains."""

from .accal import (
    ComplexMatrixField,
    CotangentDecomposition,
    PolyCZ,
    ScalarField,
    StructureTensorField,
    complex_matrix_from_structure,
    complex_to_real,
    dbar_scalar,
    normalize_at_point,
    real_to_complex,
    standard_structure,
    structure_from_complex_matrix,
    transform_complex_matrix,
)
from .diskops import (
    BoundaryFunction,
    DiscGrid,
    GridFunction,
    cauchy_green,
    dbar_fd,
    disc_grid,
    lower_arc_cutoff,
    schwarz,
)
from .discsolve import DiscMap, HolomorphicSeed, disc_through, holomorphy_residual, solve_disc
from .fatou import (
    AdmissibleCurve,
    RayFamily,
    TestFunction,
    bounded_perturbed,
    branch_power,
    chirka_lindelof_compare,
    holder_bound_check,
    radial_limit_probe,
    ray_family_limits,
    restrict_to_disc,
    scaling_montel,
)
from .wedgefam import (
    Cone,
    DiscFamily,
    EdgeGraph,
    WedgeDomain,
    build_cone,
    cone_membership,
    flat_family,
    glued_family,
)

__version__ = "0.1.0"
