"""Logarithmic energy on the sphere: bounds for the linear term and numerical checks."""

__version__ = "0.1.0"

from .bounds import (
    C1,
    C2,
    C_TRI,
    EPS_MAX,
    BoundReport,
    bound_report,
    c_bhs,
    c_lauritsen,
    c_tilde,
    constants,
    fejes_toth_rhs,
    maximize_linear_coefficient,
    plot_grid,
    toth_triangle_integral,
    u,
    v,
)
from .energy import (
    I_SIGMA,
    KAPPA,
    EnergyBreakdown,
    SmearedMeasure,
    cap_cross_energy_disjoint,
    cap_self_energy,
    continuous_energy,
    decomposition_lower_bound,
    pair_energy,
    riemannian_gradient,
    smeared_energy,
)
from .geometry import (
    SphericalCap,
    SphericalTriangle,
    as_configuration,
    cap_measure,
    chordal_distance,
    distance_to_caps,
    distance_to_set,
    geodesic_distance,
    triangle_for,
    voronoi_boundary_h,
)
from .minimizer import FitResult, MinimizeOptions, energy_curve, fit_clog, init_spiral, minimize
from .quadrature import IntegralEstimate
from .wasserstein import TransportCheck, gz_inequality_check, kantorovich_lower_bound, witness_integral
