"""Exact dyadic computations for entangled multilinear singular integral forms.

Step functions, perfect dyadic kernels and every derived quantity are held as
exact rationals; hot integer loops run through numba when available.
"""

from ._backend import get_backend, set_backend, set_threads
from .dyadic import DyadicCube, DyadicInterval, DyadicRational, pow2, square
from .errors import (
    DegenerateGraph,
    DimensionMismatch,
    DuplicateCell,
    EdgeNotInGraph,
    EntangledT1Error,
    Infeasible,
    InvalidFamily,
    IrrationalResult,
    MixedBases,
    ParseError,
    ZeroDenominator,
)
from .form import check_duality, evaluate_adjoint, evaluate_form
from .graph import (
    BipartiteGraph,
    ParaproductClass,
    Signature,
    all_signatures,
    box_graph,
    classify_signature,
    cup_graph,
    exponent_thresholds,
    feasibility_witness,
    figure2_graph,
    matching_graph,
    star_graph,
)
from .kernel import PerfectKernel, counterexample_kernel, size_constant, validate_diagonal_constancy
from .paraproduct import (
    ConvexTree,
    HaarCoefficientField,
    coeff_norms,
    evaluate_paraproduct,
    haar_coefficients,
    haar_decomposition,
    reconstruct_check,
)
from .radical import RadicalValue, radical_product
from .step import StepFunction, tensor

__version__ = "0.1.0"

__all__ = [
    "get_backend",
    "set_backend",
    "set_threads",
    "DyadicCube",
    "DyadicInterval",
    "DyadicRational",
    "pow2",
    "square",
    "DegenerateGraph",
    "DimensionMismatch",
    "DuplicateCell",
    "EdgeNotInGraph",
    "EntangledT1Error",
    "Infeasible",
    "InvalidFamily",
    "IrrationalResult",
    "MixedBases",
    "ParseError",
    "ZeroDenominator",
    "check_duality",
    "evaluate_adjoint",
    "evaluate_form",
    "BipartiteGraph",
    "ParaproductClass",
    "Signature",
    "all_signatures",
    "box_graph",
    "classify_signature",
    "cup_graph",
    "exponent_thresholds",
    "feasibility_witness",
    "figure2_graph",
    "matching_graph",
    "star_graph",
    "PerfectKernel",
    "counterexample_kernel",
    "size_constant",
    "validate_diagonal_constancy",
    "ConvexTree",
    "HaarCoefficientField",
    "coeff_norms",
    "evaluate_paraproduct",
    "haar_coefficients",
    "haar_decomposition",
    "reconstruct_check",
    "RadicalValue",
    "radical_product",
    "StepFunction",
    "tensor",
]
