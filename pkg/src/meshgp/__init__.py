"""meshgp: spatiotemporal Gaussian-process modeling and adaptive sensor
placement on 3D triangle meshes.

The spatial covariance is built from the eigenbasis of the mesh's
cotangent Laplace operator, the temporal covariance is a Matern-3/2
kernel, and their Kronecker product structures every likelihood and
posterior computation.  An active-learning engine places sensors by
blending posterior uncertainty with geodesic space-filling coverage.
"""

from .active import (
    ALConfig,
    ALState,
    RoundRecord,
    adaptive_weights,
    fixed_weights,
    loo_cv_error,
    run_active_learning,
    select_next,
    space_filling_score,
    uncertainty_score,
    write_history_csv,
    write_history_json,
)
from .benchmark import (
    al_comparison,
    desk_scale_problem,
    eigenpair_sweep,
    fit_predict_re,
    size_noise_grid,
    truncate_basis,
)
from .errors import (
    ConfigError,
    DegenerateFaceError,
    DisconnectedMeshError,
    MeshError,
    NonTriangleFaceError,
    NumericalError,
    OFFParseError,
    StabilityError,
)
from .gp import (
    FitConfig,
    FittedModel,
    Prediction,
    TrainingSet,
    fit,
    load_model,
    nll,
    posterior_mean,
    posterior_std,
    predict,
    read_signals,
    save_model,
    write_signals,
)
from .kernels import (
    KIND_EUCLIDEAN,
    KIND_LAPLACIAN,
    HyperParams,
    euclidean_spatial_kernel,
    matern32,
    matern_spectral_density,
    spatial_kernel,
    spatial_kernel_diag,
    temporal_kernel,
)
from .mesh import (
    GeodesicField,
    LaplaceOperator,
    SpectralBasis,
    TriMesh,
    cotan_laplacian,
    geodesic_distance_matrix,
    geodesic_distances,
    load_mesh,
    save_mesh,
    spectral_basis,
    write_geodesic_csv,
)
from .metrics import relative_error
from .simulate import (
    APParams,
    SimulationResult,
    StimulusProtocol,
    add_noise,
    simulate_aliev_panfilov,
    two_source_pacing,
)
from .synthetic import icosphere, tetrahedron, unit_square_grid

__version__ = "0.1.0"
