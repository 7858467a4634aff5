"""Exact computations in transportation cost spaces of finite metric spaces."""

import sys

from .errors import (
    DimensionMismatch,
    DisconnectedGraph,
    EmptyRadialNeighbourhood,
    InvalidBasis,
    NotConnected,
    NotMolecular,
    OrderMismatch,
    OrderViolation,
    ParameterOutOfRange,
    SamePoint,
    TCSError,
    TooLarge,
    UnknownPoint,
)
from .metric import (
    FiniteMetricSpace,
    VertexOrder,
    WeightedGraph,
    geodesic_metric,
    rational,
    validate_metric,
)
from .transport import (
    TransportPlan,
    TransportProblem,
    norm_molecule_combination,
    optimal_cost,
    optimal_plan,
)
from .basis import (
    DualCoefficients,
    StochasticBasis,
    basis_distortion,
    basis_norms,
    delta_basis,
    dual_coefficients,
    molecular_tree,
    pair_distortion,
    reconstruct,
    search_basis,
    series_dual_coefficients,
    tree_basis,
)
from .trees import CompatibleTree, enumerate_trees, meeting_point, tree_distance
from .tree_prob import (
    PathDistribution,
    TreeDistribution,
    check_compatible,
    check_independent,
    effective_charge,
    expected_distortion,
    min_expected_distortion_report,
    product_probability,
)
from .laakso import LaaksoGraph, build_laakso, laakso_basis, laakso_order, verify_laakso_bound
from .hyperbolic import (
    HomogeneityReport,
    HyperbolicApprox,
    build_hyperbolic,
    epsilon_net,
    homogeneity_constant,
    radial_basis,
    verify_hyperbolic_bound,
)

__version__ = "0.1.0"

__all__ = [n for n, v in dict(globals()).items() if not n.startswith("_") and not isinstance(v, type(sys))]
