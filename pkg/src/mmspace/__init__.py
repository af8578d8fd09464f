"""Finite metric measure spaces with learned metrics and Frechet k-means.

The package builds finite metric measure spaces from point clouds (Fermat,
Isomap, diffusion, Wasserstein-over-learned-ground, first-passage percolation,
epsilon-net discretizations), solves the Frechet k-means problem on them, and
measures the stability quantities that make sampled spaces comparable to their
limits: one-sided center and cluster deviations, metric defects, covering
radii.
"""
from .cloud import PointCloud, euclidean_matrix
from .diffusion import (
    SpectralDecomposition,
    diffusion_distance_matrix,
    embedding_from_decomposition,
    normalized_laplacian,
    similarity_matrix,
    spectral_decomposition,
    spectral_embedding,
)
from .errors import (
    BudgetExceededError,
    DisconnectedGraphError,
    InvalidArgumentError,
    MmError,
    SolverError,
    UnsupportedReferenceError,
)
from .experiment import ExperimentConfig, ExperimentResult, load_config, run_experiment
from .io import (
    dump_json,
    read_cloud_csv,
    read_matrix,
    read_matrix_bin,
    read_matrix_csv,
    read_space,
    solution_to_dict,
    write_cloud_csv,
    write_matrix_bin,
    write_matrix_csv,
    write_space,
)
from .fpp import (
    EdgeWeightLaw,
    FppInstance,
    TrackPoint,
    fpp_barycenter_track,
    passage_time_ball,
    scaled_space,
    shape_defect,
)
from .geodesic import (
    CurvatureReport,
    FermatParams,
    curvature_condition_check,
    fermat_distance_matrix,
    fermat_scaled,
    gaussian_fermat_distance_1d,
    gaussian_fermat_moment_estimate,
    isomap_distance_matrix,
)
from .quantize import (
    NetGraphResult,
    QuantizeResult,
    circle_arc_metric,
    density_compensation,
    epsilon_net_graph,
    equispaced_circle_net,
    grid_measure_1d,
    quantize,
    quantize_density_1d,
)
from .samplers import (
    covering_radius,
    derived_seed,
    isometry_defect,
    sample,
    stream,
    true_distance_matrix,
)
from .space import (
    CenterSet,
    FiniteMetricMeasureSpace,
    KMeansSolution,
    MetricReport,
    clustering_cost,
    hausdorff_distance,
    k_means_exact,
    k_means_pam,
    metric_validate,
    one_sided_center_deviation,
)
from .voronoi import (
    VoronoiPartition,
    cluster_deviation,
    enlarged_cell,
    enlargement_threshold,
    voronoi_cells,
)
from .wasserstein import (
    DiscreteMeasure,
    build_ground_metric,
    isometry_defect_bound,
    learned_wasserstein_kmeans,
    learned_wasserstein_space,
    wasserstein_distance,
    wasserstein_space,
    worker_count,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetExceededError",
    "build_ground_metric",
    "CenterSet",
    "circle_arc_metric",
    "cluster_deviation",
    "clustering_cost",
    "covering_radius",
    "curvature_condition_check",
    "CurvatureReport",
    "density_compensation",
    "derived_seed",
    "diffusion_distance_matrix",
    "DisconnectedGraphError",
    "DiscreteMeasure",
    "dump_json",
    "EdgeWeightLaw",
    "embedding_from_decomposition",
    "enlarged_cell",
    "enlargement_threshold",
    "epsilon_net_graph",
    "equispaced_circle_net",
    "euclidean_matrix",
    "ExperimentConfig",
    "ExperimentResult",
    "fermat_distance_matrix",
    "fermat_scaled",
    "FermatParams",
    "FiniteMetricMeasureSpace",
    "fpp_barycenter_track",
    "FppInstance",
    "gaussian_fermat_distance_1d",
    "gaussian_fermat_moment_estimate",
    "grid_measure_1d",
    "hausdorff_distance",
    "InvalidArgumentError",
    "isomap_distance_matrix",
    "isometry_defect",
    "isometry_defect_bound",
    "k_means_exact",
    "k_means_pam",
    "KMeansSolution",
    "learned_wasserstein_kmeans",
    "learned_wasserstein_space",
    "load_config",
    "metric_validate",
    "MetricReport",
    "MmError",
    "NetGraphResult",
    "normalized_laplacian",
    "one_sided_center_deviation",
    "passage_time_ball",
    "PointCloud",
    "quantize",
    "quantize_density_1d",
    "QuantizeResult",
    "read_cloud_csv",
    "read_matrix",
    "read_matrix_bin",
    "read_matrix_csv",
    "read_space",
    "run_experiment",
    "sample",
    "scaled_space",
    "shape_defect",
    "similarity_matrix",
    "solution_to_dict",
    "SolverError",
    "spectral_decomposition",
    "spectral_embedding",
    "SpectralDecomposition",
    "stream",
    "TrackPoint",
    "true_distance_matrix",
    "UnsupportedReferenceError",
    "voronoi_cells",
    "VoronoiPartition",
    "wasserstein_distance",
    "wasserstein_space",
    "worker_count",
    "write_cloud_csv",
    "write_matrix_bin",
    "write_matrix_csv",
    "write_space",
]
