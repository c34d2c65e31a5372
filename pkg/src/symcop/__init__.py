"""Inner and outer approximation hierarchies for copositivity over symmetric cones.

The cone is ``K = R_+^{n1} x L^{n2}`` (nonnegative orthant times a
second-order cone).  The package builds five hierarchies (dP-type and
Yildirim-type from Jordan frames, ZVP-type and NN-type from sums of squares,
Lasserre-type from moments), assembles them into conic programs, solves them
with a built-in homogeneous self-dual interior-point method, and
cross-checks results with solver-independent oracles.
"""

from .combinatorics import enumerate_eq, enumerate_le, multinomial, zvp_count
from .copp import HIERARCHIES, assemble_copp, random_pd_matrix, slater_point, solve_copp
from .frame_hierarchies import (
    ConstraintKind,
    build_M,
    build_N,
    dp_constraints,
    yildirim_constraints,
    yildirim_points,
    yildirim_reject,
)
from .jordan import ConeShape, cone_membership, frame_at, jordan_product, spectral_decompose
from .lasserre import MomentTable, lasserre_matrix, moment, moment_exact
from .model import ConicProblem, Solution
from .oracle import dual_moment_check, grid_cone_min, sample_cone_min
from .polynomial_hierarchies import (
    nn_membership_constraints,
    nn_substituted_poly,
    semialgebraic_generators,
    zvp_membership_constraints,
)
from .polynomials import SparsePoly, poly_mul, sos_to_psd
from .sdpa import export_sdpa, import_sdpa, solve_external
from .solver import SolverConfig, check_kkt, solve

__all__ = [
    "HIERARCHIES",
    "ConeShape",
    "ConicProblem",
    "ConstraintKind",
    "MomentTable",
    "Solution",
    "SolverConfig",
    "SparsePoly",
    "assemble_copp",
    "build_M",
    "build_N",
    "check_kkt",
    "cone_membership",
    "dp_constraints",
    "dual_moment_check",
    "enumerate_eq",
    "enumerate_le",
    "export_sdpa",
    "frame_at",
    "grid_cone_min",
    "import_sdpa",
    "jordan_product",
    "lasserre_matrix",
    "moment",
    "moment_exact",
    "multinomial",
    "nn_membership_constraints",
    "nn_substituted_poly",
    "poly_mul",
    "random_pd_matrix",
    "sample_cone_min",
    "semialgebraic_generators",
    "slater_point",
    "solve",
    "solve_copp",
    "solve_external",
    "sos_to_psd",
    "spectral_decompose",
    "yildirim_constraints",
    "yildirim_points",
    "yildirim_reject",
    "zvp_count",
    "zvp_membership_constraints",
]
