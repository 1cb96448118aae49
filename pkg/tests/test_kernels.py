import math

import numpy as np
import pytest

import meshgp as m
from meshgp.kernels import matern32

# frozen from a 40-digit mpmath evaluation of the closed forms
DENSITY_AT_ZERO = 2.0 * math.pi
DENSITY_AT_ONE = 0.008328411588841416
MATERN32_AT_LAG_ONE = 0.4833577245965077  # (1 + sqrt3) exp(-sqrt3)


class TestSpectralDensity:
    def test_value_at_zero(self):
        assert m.matern_spectral_density(0.0, 1.0) == pytest.approx(
            DENSITY_AT_ZERO, rel=1e-12
        )

    def test_value_at_one(self):
        assert m.matern_spectral_density(1.0, 1.0) == pytest.approx(
            DENSITY_AT_ONE, rel=1e-12
        )

    def test_non_increasing(self):
        lam = np.linspace(0.0, 50.0, 200)
        for ls in (0.1, 1.0, 7.5):
            s = m.matern_spectral_density(lam, ls)
            assert np.all(np.diff(s) <= 0)
            assert np.all(s > 0)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            m.matern_spectral_density(-1.0, 1.0)
        with pytest.raises(ValueError):
            m.matern_spectral_density(np.inf, 1.0)
        with pytest.raises(ValueError):
            m.matern_spectral_density(1.0, 0.0)


@pytest.fixture(scope="module")
def theta():
    return m.HyperParams(l_s=0.7, sigma_m=1.3, sigma_eps_s=0.1,
                         l_t=2.0, sigma_a=1.7, sigma_eps_t=0.05)


class TestSpatialKernel:
    def test_matches_naive_summation(self, sphere42, theta):
        basis = m.spectral_basis(m.cotan_laplacian(sphere42), 5)
        rows = np.arange(10)
        K = m.spatial_kernel(basis, theta, rows, rows)
        s = m.matern_spectral_density(basis.eigenvalues, theta.l_s)
        naive = np.zeros((10, 10))
        for a in range(10):
            for b in range(10):
                for j in range(5):
                    naive[a, b] += (theta.sigma_m * s[j]
                                    * basis.eigenvectors[a, j]
                                    * basis.eigenvectors[b, j])
        assert np.abs(K - naive).max() <= 1e-12 * np.abs(naive).max()

    def test_linear_in_sigma_m(self, sphere42_basis, theta):
        double = m.HyperParams(theta.l_s, 2 * theta.sigma_m, theta.sigma_eps_s,
                               theta.l_t, theta.sigma_a, theta.sigma_eps_t)
        k1 = m.spatial_kernel(sphere42_basis, theta)
        k2 = m.spatial_kernel(sphere42_basis, double)
        assert np.allclose(k2, 2 * k1, rtol=1e-14, atol=0)

    def test_symmetric_psd_rank_bounded(self, sphere42, theta):
        basis = m.spectral_basis(m.cotan_laplacian(sphere42), 7)
        K = m.spatial_kernel(basis, theta)
        assert np.abs(K - K.T).max() <= 1e-12 * np.abs(K).max()
        w = np.linalg.eigvalsh(K)
        assert w.min() >= -1e-8 * w.max()
        assert np.sum(w > 1e-10 * w.max()) <= 7

    def test_diag_helper(self, sphere42_basis, theta):
        rows = np.array([0, 3, 9])
        full = m.spatial_kernel(sphere42_basis, theta, rows, rows)
        diag = m.spatial_kernel_diag(sphere42_basis, theta, rows)
        assert np.allclose(np.diag(full), diag, rtol=1e-12)

    def test_truncation_converges(self, sphere162, theta):
        basis = m.spectral_basis(m.cotan_laplacian(sphere162), 128)
        ks = {
            j: m.spatial_kernel(m.truncate_basis(basis, j), theta)
            for j in (8, 32, 128)
        }
        d_8_32 = np.abs(ks[8] - ks[32]).max()
        d_32_128 = np.abs(ks[32] - ks[128]).max()
        assert d_32_128 <= d_8_32 + 1e-12


class TestTemporalKernel:
    def test_zero_lag(self, theta):
        K = m.temporal_kernel([3.0], [3.0], theta)
        assert K[0, 0] == theta.sigma_a

    def test_lag_equal_to_length_scale(self):
        theta = m.HyperParams(1.0, 1.0, 0.0, 2.5, 1.0, 0.0)
        K = m.temporal_kernel([0.0], [2.5], theta)
        assert K[0, 0] == pytest.approx(MATERN32_AT_LAG_ONE, rel=1e-12)

    def test_strictly_decreasing_in_lag(self, theta):
        lags = np.linspace(0, 20, 100)
        vals = m.temporal_kernel([0.0], lags, theta)[0]
        assert np.all(np.diff(vals) < 0)

    def test_stationary_exact_on_integer_times(self, theta):
        a = np.array([0.0, 1.0, 5.0])
        b = np.array([2.0, 7.0])
        for c in (1.0, 16.0, -3.0):
            assert np.array_equal(
                m.temporal_kernel(a + c, b + c, theta),
                m.temporal_kernel(a, b, theta),
            )

    def test_symmetric_psd(self, theta):
        t = np.sort(np.random.default_rng(0).uniform(0, 10, 40))
        K = m.temporal_kernel(t, t, theta)
        w = np.linalg.eigvalsh(K)
        assert w.min() >= -1e-8 * w.max()


class TestEuclideanKernel:
    def test_zero_distance(self, sphere42, theta):
        K = m.euclidean_spatial_kernel(sphere42, theta, [5], [5])
        assert K[0, 0] == theta.sigma_m

    def test_matches_naive_pairwise(self, sphere42, theta):
        rng = np.random.default_rng(2)
        ids = rng.choice(42, 6, replace=False)
        K = m.euclidean_spatial_kernel(sphere42, theta, ids, ids)
        for a in range(6):
            for b in range(6):
                r = np.linalg.norm(sphere42.vertices[ids[a]]
                                   - sphere42.vertices[ids[b]])
                expected = (theta.sigma_m * (1 + math.sqrt(3) * r / theta.l_s)
                            * math.exp(-math.sqrt(3) * r / theta.l_s))
                assert K[a, b] == pytest.approx(expected, rel=1e-12, abs=1e-300)

    def test_symmetric_psd(self, sphere42, theta):
        K = m.euclidean_spatial_kernel(sphere42, theta)
        assert np.abs(K - K.T).max() <= 1e-12
        w = np.linalg.eigvalsh(K)
        assert w.min() >= -1e-8 * w.max()


class TestHyperParams:
    def test_rejects_nonpositive_scales(self):
        with pytest.raises(ValueError):
            m.HyperParams(0.0, 1, 0, 1, 1, 0)
        with pytest.raises(ValueError):
            m.HyperParams(1, 1, 0, 1, -2.0, 0)

    def test_rejects_negative_nuggets(self):
        with pytest.raises(ValueError):
            m.HyperParams(1, 1, -0.1, 1, 1, 0)

    def test_zero_nuggets_allowed(self):
        theta = m.HyperParams(1, 1, 0.0, 1, 1, 0.0)
        assert theta.sigma_eps_s == 0.0

    def test_round_trips_through_dict(self):
        theta = m.HyperParams(1.5, 1.0, 0.2, 3.0, 0.8, 0.01)
        assert m.HyperParams(**theta.to_dict()) == theta


def test_matern32_shared_form():
    # the temporal kernel and the chord-distance kernel use the same profile
    assert matern32(0.0, 2.0, 1.0) == 2.0
    assert matern32(1.0, 1.0, 1.0) == pytest.approx(MATERN32_AT_LAG_ONE, rel=1e-12)


@pytest.mark.parametrize("seed", range(6))
def test_spatial_kernels_psd_for_random_hyperparameters(seed, sphere42,
                                                        sphere42_basis):
    rng = np.random.default_rng(seed)
    theta = m.HyperParams(
        l_s=float(10 ** rng.uniform(-2, 1)),
        sigma_m=float(10 ** rng.uniform(-1, 1)),
        sigma_eps_s=float(10 ** rng.uniform(-3, 0)),
        l_t=float(10 ** rng.uniform(-1, 1)),
        sigma_a=float(10 ** rng.uniform(-1, 1)),
        sigma_eps_t=0.0,
    )
    ids = np.sort(rng.choice(42, rng.integers(3, 20), replace=False))
    for K in (m.spatial_kernel(sphere42_basis, theta, ids, ids),
              m.euclidean_spatial_kernel(sphere42, theta, ids, ids)):
        assert np.abs(K - K.T).max() <= 1e-12 * max(np.abs(K).max(), 1e-300)
        w = np.linalg.eigvalsh(K)
        assert w.min() >= -1e-8 * max(w.max(), 1e-300)
