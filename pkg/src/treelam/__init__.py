"""Random trees, circle laminations, map pseudo-metrics, and planar-map experiments."""

from .excursion import (
    DiscreteExcursion,
    RmqIndex,
    sample_dyck_excursion,
    build_rmq,
    arc_min,
    max_arc_min,
    tree_pseudo_distance,
    local_minima_report,
)
from .circle_tree import (
    CircleTree,
    build_circle_tree,
    plane_tree_oracle,
    class_histogram,
    verify_pseudometric,
    circle_class_partition,
)
from .snake import (
    LabelFunction,
    sample_labels,
    covariance_estimate,
    reroot,
    hypothesis_check_HZ,
    hypothesis_check_Hprime,
)
from .lamination import (
    Lamination,
    build_lamination,
    check_noncrossing,
    face_census,
    maximality_probe,
    render_svg,
)
from .estimators import (
    DimensionEstimate,
    box_count_segments,
    box_count_points,
    endpoint_set,
    dim_lower_bound_check,
)
from .brownian_map import (
    MapMetricSample,
    build_map_metric_sample,
    d_circ,
    d_star_from,
    zero_class_check,
    reroot_isometry_check,
)
from .planar_maps import (
    PlanarMap,
    sample_quadrangulation,
    sample_2k_angulation,
    bfs_distances,
    cvs_distance_audit,
    ball_growth_profile,
    bottleneck_scan,
    build_tube_map,
)

__version__ = "0.1.0"
