"""Two-material conductivity reconstruction from interior temperature data.

Cell fields are numpy arrays of shape (ny, nx) on the unit square, row 0 at
the bottom edge. Vectors of cell values (K, masks) use the same order
flattened, x fastest.
"""

from ._heatk import (
    EvaluationError,
    NoCornerError,
    ParseError,
    PhantomSpec,
    SolverError,
    assemble,
    build_mask,
    classify,
    condition_number,
    default_alphas,
    enumerate_family,
    forward_samples,
    lcurve_sweep,
    make_case,
    min_norm_least_squares,
    misclassification_rate,
    phantom_from_json,
    rasterize,
    relative_l2,
    run_pipeline,
    select_corner,
    solve_w1,
    solve_w2,
    test_function,
    w1_value_grad,
    w2_value_grad,
)

__all__ = [
    "EvaluationError",
    "NoCornerError",
    "ParseError",
    "PhantomSpec",
    "SolverError",
    "assemble",
    "build_mask",
    "classify",
    "condition_number",
    "default_alphas",
    "enumerate_family",
    "forward_samples",
    "lcurve_sweep",
    "make_case",
    "min_norm_least_squares",
    "misclassification_rate",
    "phantom_from_json",
    "rasterize",
    "relative_l2",
    "run_pipeline",
    "select_corner",
    "solve_w1",
    "solve_w2",
    "test_function",
    "w1_value_grad",
    "w2_value_grad",
]
