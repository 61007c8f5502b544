"""Rate regions and outer bounds for three-user cognitive interference
channels with noncausal message sharing."""

from .model import (
    ChannelConfig,
    ChannelGains,
    ConfigError,
    GpParams,
    RatePoint,
    Scheme,
    db_to_linear,
    linear_to_db,
    project_split_rates,
    validate_config,
)
from .gaussinfo import (
    CovarianceTable,
    assemble_covariance,
    conditional_mi,
    differential_entropy,
    scheme_labels,
)
from .constraints import ConstraintSystem, NumericSystem, build_system, evaluate_system
from .polytope import (
    HalfspaceSystem,
    VertexSet,
    convex_hull_2d,
    enumerate_vertices,
    project,
    slice_min_rate,
)
from .achievable import RegionCloud, SamplingSpec, compute_region, region_slice, sample_params
from .outerbound import (
    OuterRegion,
    bc_outer_cloud,
    individual_caps,
    mac_rate_vector,
    mimo_p2p_capacity,
    outer_region,
    waterfill,
)
from .corollaries import CorollaryPoint, corollary_points, time_share_hull
from .discrete import (
    JointPmf,
    check_factorization,
    evaluate_scheme_discrete,
    gaussian_mi_mc,
    mi_discrete,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
