"""Exact higher-dimensional Kirchhoff theorems on finite CW complexes."""

from .complex import (
    CellComplex,
    ChainVector,
    InvalidComplexError,
    SubcomplexSpec,
    ValidationReport,
    betti,
    betti_numbers,
    euler_characteristic,
    restrict_top,
    skeleton,
    torsion_order,
    validate,
)
from .linalg import (
    LatticeBasis,
    Matrix,
    gram_determinant,
    image_lattice_basis,
    inclusion_index,
    kernel_lattice_basis,
    snf,
    torsion_order_cokernel,
)
from .matrix_tree import (
    IdentityReport,
    SubgroupSpec,
    WeightAssignment,
    gamma_A,
    gamma_X,
    hypothesis_check,
    laplacian,
    laplacian_A,
    low_temperature_check,
    verify_generalized,
    verify_matrix_tree,
    verify_sum_decomposition,
)
from .network import (
    NetworkProblem,
    NetworkSolution,
    branch_current,
    projection_direct,
    projection_tree_formula,
    solve_direct,
    verify_solution,
)
from .torsion import (
    CombinatorialBasis,
    TorsionReport,
    TruncationData,
    default_combinatorial_basis,
    find_truncation,
    milnor_torsion_squared,
    torsion_report,
    torsion_squared_laplacian,
    torsion_squared_tree,
    torsion_squared_truncation,
)
from .trees import (
    SpanningTree,
    count_spanning_trees,
    enumerate_spanning_trees,
    find_spanning_tree,
    is_essential,
    tree_theta,
    tree_weight,
)

__version__ = "0.1.0"
