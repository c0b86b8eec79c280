"""Spectral factorization of Laurent polynomial matrices.

The package factors a nonnegative definite, possibly rank-deficient
trigonometric polynomial matrix S(z) into S = F F~ with F analytic,
of the same order as S, and of full column rank inside the open unit
disk, and it extends a unit-norm analytic row to a square paraunitary
matrix whose determinant is a monomial.

Layers, lowest first:

    laurent      Laurent polynomial and matrix arithmetic
    roots        root finding, clustering, and column reflections
    fullrank     positive definite (full-rank) factorization
    rankdef      rank-deficient factorization driver and verification
    paraunitary  unit-norm rows, completion, paraunitarity checks
    instances    seeded generators with known secret factors
    fileio       canonical matrix and report files
    cli          command-line front end over the file formats
"""

from .errors import (
    DegenerateInputError,
    IndeterminateError,
    InvalidComparisonError,
    NotFactorableError,
    NotParaunitaryError,
    NumericalFailureError,
    ParafactError,
)
from .fileio import (
    matrix_from_text,
    matrix_to_text,
    read_matrix,
    read_report,
    report_from_text,
    report_to_text,
    write_matrix,
    write_report,
)
from .fullrank import (
    CanonicalForm,
    FactorOptions,
    canonicalize,
    factor_positive_definite,
    scalar_factor,
)
from .instances import (
    Instance,
    LosslessInstance,
    elementary_factor,
    gen_lossless,
    gen_spectrum,
)
from .laurent import (
    AnalyticPolyMatrix,
    LaurentMatrix,
    LaurentPoly,
    laurent_from_unit_samples,
)
from .paraunitary import (
    LosslessRow,
    ParaunitaryReport,
    check_unit_norm_row,
    compare_completions,
    complete_to_paraunitary,
    deficiency_matrix,
    paraunitary_degree,
    verify_paraunitary,
)
from .rankdef import (
    BlaschkeOp,
    Check,
    FactorReport,
    RankDefOptions,
    RationalMatrix,
    check_rank_identity,
    compare_factors,
    estimate_rank,
    find_rank_drop_points,
    finalize_polynomial,
    fix_rank_drop,
    remove_inner_poles,
    select_pivot,
    spectral_factor,
    stack_rational_factor,
    tail_quotient,
    verify_factorization,
)
from .roots import (
    cluster_points,
    divide_linear,
    divide_out,
    laurent_roots,
    match_point_sets,
    poly_roots,
    reflect_column_zero,
    unitary_with_first_column,
)

__version__ = "0.1.0"

__all__ = [
    "AnalyticPolyMatrix",
    "BlaschkeOp",
    "CanonicalForm",
    "Check",
    "DegenerateInputError",
    "FactorOptions",
    "FactorReport",
    "IndeterminateError",
    "Instance",
    "InvalidComparisonError",
    "LaurentMatrix",
    "LaurentPoly",
    "LosslessInstance",
    "LosslessRow",
    "NotFactorableError",
    "NotParaunitaryError",
    "NumericalFailureError",
    "ParafactError",
    "ParaunitaryReport",
    "RankDefOptions",
    "RationalMatrix",
    "canonicalize",
    "check_rank_identity",
    "check_unit_norm_row",
    "cluster_points",
    "compare_completions",
    "compare_factors",
    "complete_to_paraunitary",
    "deficiency_matrix",
    "divide_linear",
    "divide_out",
    "elementary_factor",
    "estimate_rank",
    "factor_positive_definite",
    "finalize_polynomial",
    "find_rank_drop_points",
    "fix_rank_drop",
    "gen_lossless",
    "gen_spectrum",
    "laurent_from_unit_samples",
    "laurent_roots",
    "match_point_sets",
    "matrix_from_text",
    "matrix_to_text",
    "paraunitary_degree",
    "poly_roots",
    "read_matrix",
    "read_report",
    "reflect_column_zero",
    "remove_inner_poles",
    "report_from_text",
    "report_to_text",
    "scalar_factor",
    "select_pivot",
    "spectral_factor",
    "stack_rational_factor",
    "tail_quotient",
    "unitary_with_first_column",
    "verify_factorization",
    "verify_paraunitary",
    "write_matrix",
    "write_report",
    "__version__",
]
