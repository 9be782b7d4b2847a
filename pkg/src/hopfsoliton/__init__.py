"""Pluriclosed solitons and flow on diagonal Hopf surfaces."""

from ._backend import BACKEND
from .errors import (
    AnsatzError,
    ChartDomainError,
    DegenerateMetricError,
    DomainError,
    HopfError,
    InitialDataError,
    NewtonDivergenceError,
    ParameterError,
    RootFindingError,
    WindowExitError,
)
from .geometry import (
    MetricProfile,
    SurfaceParams,
    constant_profile,
    diagonal_profile,
    invariant_x,
    is_pluriclosed,
    metric_u,
    metric_w,
    metric_z,
    params_from_ab,
    surface_params,
    volume_V,
)
from .soliton import (
    SolitonProfile,
    check_asymptotics,
    default_gauge,
    extension_r2,
    implicit_x,
    kappa_inverse,
    logistic_profile,
    solve_profile,
)
from .curvature import bismut_ricci, bismut_ricci_oracle, chern_ricci, lie_derivative_Y, soliton_residual
from .flow import FlowControls, FlowState, run_flow, shift_distance, comparison_envelope, torsion_potential_norm

__version__ = "0.1.0"
