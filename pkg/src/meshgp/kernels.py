"""Covariance kernels: a spectral (eigenbasis) spatial kernel on the mesh,
a Matern-3/2 temporal kernel, and a Euclidean-distance spatial baseline.

The spatial kernel expands over the Laplacian eigenbasis, weighting each
eigenpair by the Matern spectral density evaluated at the square root of
its eigenvalue.  Smoothness is fixed at 3/2 and the spectral dimension at
2 (a surface embedded in 3D); neither is an optimized parameter.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

SMOOTHNESS = 1.5
SPECTRAL_DIM = 2

KIND_LAPLACIAN = "laplacian"
KIND_EUCLIDEAN = "euclidean"
KERNEL_KINDS = (KIND_LAPLACIAN, KIND_EUCLIDEAN)

_SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class HyperParams:
    """The six covariance hyperparameters.

    ``sigma_eps_s`` and ``sigma_eps_t`` are the nugget variances added to
    the spatial and temporal kernel diagonals; the remaining four are the
    length scales and signal scales of the two kernels.
    """

    l_s: float
    sigma_m: float
    sigma_eps_s: float
    l_t: float
    sigma_a: float
    sigma_eps_t: float

    def __post_init__(self):
        for name in ("l_s", "sigma_m", "l_t", "sigma_a"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("sigma_eps_s", "sigma_eps_t"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    def to_dict(self):
        return {
            "l_s": self.l_s,
            "sigma_m": self.sigma_m,
            "sigma_eps_s": self.sigma_eps_s,
            "l_t": self.l_t,
            "sigma_a": self.sigma_a,
            "sigma_eps_t": self.sigma_eps_t,
        }


def matern_spectral_density(lam, length_scale, smoothness=SMOOTHNESS, dim=SPECTRAL_DIM):
    """Matern spectral density evaluated at frequency ``sqrt(lam)``.

    Computes ``c * (2 nu / l^2 + 4 pi^2 lam)^-(nu + d/2)`` with the
    normalization ``c = 2^d pi^(d/2) Gamma(nu + d/2) (2 nu)^nu /
    (Gamma(nu) l^(2 nu))``.  Vectorized over ``lam``.
    """
    lam = np.asarray(lam, dtype=float)
    if not np.all(np.isfinite(lam)) or np.any(lam < 0):
        raise ValueError("eigenvalues must be finite and nonnegative")
    if not (np.isfinite(length_scale) and length_scale > 0):
        raise ValueError("length_scale must be positive and finite")
    nu, d = smoothness, dim
    const = (
        2.0**d
        * math.pi ** (d / 2.0)
        * math.gamma(nu + d / 2.0)
        * (2.0 * nu) ** nu
        / (math.gamma(nu) * length_scale ** (2.0 * nu))
    )
    return const * (2.0 * nu / length_scale**2 + 4.0 * math.pi**2 * lam) ** (
        -(nu + d / 2.0)
    )


def spatial_kernel(basis, theta, rows=None, cols=None):
    """Eigenbasis spatial kernel ``sum_j sigma_m S(sqrt(lam_j)) phi_j phi_j'``.

    ``rows`` and ``cols`` are vertex-id arrays (defaulting to all vertices);
    the result is the dense ``len(rows) x len(cols)`` covariance block.
    """
    weights = theta.sigma_m * matern_spectral_density(basis.eigenvalues, theta.l_s)
    phi_r = basis.eigenvectors if rows is None else basis.eigenvectors[rows]
    phi_c = basis.eigenvectors if cols is None else basis.eigenvectors[cols]
    return (phi_r * weights) @ phi_c.T


def spatial_kernel_diag(basis, theta, rows=None):
    """Diagonal of the eigenbasis spatial kernel at the given vertices."""
    weights = theta.sigma_m * matern_spectral_density(basis.eigenvalues, theta.l_s)
    phi = basis.eigenvectors if rows is None else basis.eigenvectors[rows]
    return (phi**2) @ weights


def matern32(r, scale, length_scale):
    """Matern-3/2 covariance ``scale (1 + sqrt3 r/l) exp(-sqrt3 r/l)``."""
    z = _SQRT3 * np.asarray(r, dtype=float) / length_scale
    return scale * (1.0 + z) * np.exp(-z)


def temporal_kernel(times_a, times_b, theta):
    """Stationary Matern-3/2 kernel over absolute time lags."""
    a = np.asarray(times_a, dtype=float).reshape(-1, 1)
    b = np.asarray(times_b, dtype=float).reshape(1, -1)
    return matern32(np.abs(a - b), theta.sigma_a, theta.l_t)


def euclidean_spatial_kernel(mesh, theta, rows=None, cols=None):
    """Matern-3/2 kernel over straight-line distances between vertices.

    The geometry-blind baseline: same scale ``sigma_m`` and length scale
    ``l_s`` as the spectral kernel, applied to chord distances in 3D.
    """
    va = mesh.vertices if rows is None else mesh.vertices[rows]
    vb = mesh.vertices if cols is None else mesh.vertices[cols]
    return matern32(cdist(va, vb), theta.sigma_m, theta.l_s)
