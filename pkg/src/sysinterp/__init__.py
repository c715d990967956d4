"""Polynomial interpolation between continuous- and discrete-time LTI systems.

A continuous system ``dx/dt = A_c x + B_c u`` interpolates a discrete model
``x+ = A_d x + B_d u`` with degree ``N`` and sampling time ``tau`` when every
discrete trajectory can be reproduced at the samples by a continuous trajectory
whose input and state are degree-``N`` polynomials on each sampling interval.
"""

from ._config import Tolerances, get_tolerances
from .bounds import (
    Box,
    HalfSpace,
    Point,
    hausdorff_distance,
    point_region_distance,
    segment_violation_bound,
    stl_score_bound,
)
from .discretization import DiscretizationResult, discretize
from .estimator import InterpolatingDiscretizer
from .exceptions import (
    InconsistentSystemError,
    InvalidArgumentError,
    NoInterpolatingModelError,
    NumericalFailureError,
    SysInterpError,
    UnsupportedRegionError,
)
from .interpolation import (
    InclusionReport,
    SegmentSolution,
    Synthesis,
    build_interpolating_input,
    check_interpolator,
    solve_segment,
    verify_input_membership,
)
from .legendre import (
    OperatorSet,
    QuadratureScheme,
    build_operator_set,
    build_quadrature,
    legendre_shifted,
    phi_deriv,
    phi_eval,
)
from .planner import StlAtom, StlSpec, dt_stl_satisfied, linear_feasibility, plan
from .systems import (
    CtLti,
    DiscreteSignal,
    DtLti,
    PiecewisePolySignal,
    Trajectory,
    ct_simulate,
    dt_simulate,
    is_interpolation,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
