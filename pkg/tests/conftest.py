import numpy as np
import pytest

import meshgp as m

try:
    from threadpoolctl import threadpool_limits
except ImportError:
    threadpool_limits = None


@pytest.fixture(scope="session", autouse=True)
def _single_threaded_blas():
    # small factor matrices: BLAS threading costs more than it saves
    if threadpool_limits is None:
        yield
        return
    with threadpool_limits(limits=1):
        yield


@pytest.fixture(scope="session")
def tetra():
    return m.tetrahedron()


@pytest.fixture(scope="session")
def sphere42():
    return m.icosphere(1)


@pytest.fixture(scope="session")
def sphere42_basis(sphere42):
    return m.spectral_basis(m.cotan_laplacian(sphere42), 42)


@pytest.fixture(scope="session")
def sphere162():
    return m.icosphere(2)


def random_instance(seed, n_locations, n_times, mesh=None, basis=None):
    """A small random training set with random positive hyperparameters."""
    rng = np.random.default_rng(seed)
    if mesh is None:
        mesh = m.icosphere(1)
    if basis is None:
        basis = m.spectral_basis(m.cotan_laplacian(mesh), 20)
    theta = m.HyperParams(
        l_s=float(rng.uniform(0.2, 2.0)),
        sigma_m=1.0,
        sigma_eps_s=float(rng.uniform(0.05, 1.0)),
        l_t=float(rng.uniform(0.5, 4.0)),
        sigma_a=float(rng.uniform(0.2, 3.0)),
        sigma_eps_t=float(rng.uniform(0.02, 0.5)),
    )
    locs = np.sort(rng.choice(mesh.num_vertices, size=n_locations, replace=False))
    times = np.sort(rng.uniform(0.0, 10.0, size=n_times))
    Y = rng.standard_normal((n_times, n_locations))
    data = m.TrainingSet(locs, times, Y)
    return mesh, basis, theta, data


def dense_training_cov(basis, theta, data, mesh=None, kind="laplacian"):
    """Explicit Kronecker training covariance, for oracle comparisons."""
    n, nt = data.num_locations, data.num_times
    if kind == "laplacian":
        ks = m.spatial_kernel(basis, theta, data.locations, data.locations)
    else:
        ks = m.euclidean_spatial_kernel(mesh, theta, data.locations, data.locations)
    ks = ks + theta.sigma_eps_s * np.eye(n)
    kt = m.temporal_kernel(data.times, data.times, theta)
    kt = kt + theta.sigma_eps_t * np.eye(nt)
    return np.kron(ks, kt), ks, kt
