"""Curvature of planar point configurations, kernel permutations and the
singular integrals they control, on finite weighted point sets."""

from .errors import *  # noqa: F401,F403
from .geometry import (
    Line,
    Triple,
    circumradius,
    delta_conditions,
    in_comparable_class,
    line_through,
    menger_curvature,
    theta_v,
)
from .kernels import Cauchy, Combo, Kappa, eval_cauchy, eval_real, format_kernel, k_t, parse_kernel
from .measures import (
    DiscreteMeasure,
    gen_four_corner_cantor,
    gen_lipschitz_graph,
    gen_segment,
    load_measure,
    read_csv,
    regularity,
    write_csv,
)
from .multiscale import (
    DyadicCube,
    beta_ball,
    beta_cube,
    build_lattice,
    classify_cubes,
    packing_ratio,
)
from .operators import mv_residual, norm_chain, t1_norm_sq, truncated_permutation_sum, truncated_transform
from .permutations import (
    cauchy_permutation,
    constrained_ratio,
    endpoint_ts,
    g_poly,
    gamma_family_ratio,
    gamma_family_value,
    h_term,
    omega_big_region,
    omega_region,
    permutation,
    representation_value,
    sharp_lower_gap,
    sharp_upper_gap,
)
from .scan import (
    ScanConfig,
    ScanReport,
    constrained_inf_search,
    ratio_sup_search,
    region_boundary_scan,
    sign_change_search,
)

__version__ = "0.1.0"
