import math

import numpy as np
import pytest

import meshgp as m
from meshgp.gp import default_starts

from conftest import dense_training_cov, random_instance


def dense_nll(Sigma, Y):
    y = Y.reshape(-1, order="F")
    sign, logdet = np.linalg.slogdet(Sigma)
    return (0.5 * y @ np.linalg.solve(Sigma, y) + 0.5 * logdet
            + 0.5 * len(y) * math.log(2 * math.pi))


class TestNLL:
    def test_scalar_case(self, sphere42, sphere42_basis):
        theta = m.HyperParams(0.9, 1.0, 0.2, 1.5, 1.1, 0.3)
        data = m.TrainingSet([7], [2.0], [[0.8]])
        k_s = m.spatial_kernel(sphere42_basis, theta, [7], [7])[0, 0]
        var = (k_s + theta.sigma_eps_s) * (theta.sigma_a + theta.sigma_eps_t)
        expected = (0.5 * 0.8**2 / var + 0.5 * math.log(var)
                    + 0.5 * math.log(2 * math.pi))
        assert m.nll(theta, data, sphere42_basis) == pytest.approx(expected, rel=1e-12)

    def test_matches_dense_oracle(self):
        mesh, basis, theta, data = random_instance(7, 5, 4)
        Sigma, _, _ = dense_training_cov(basis, theta, data)
        expected = dense_nll(Sigma, data.Y)
        assert m.nll(theta, data, basis) == pytest.approx(expected, rel=1e-8)

    def test_doubling_y_quadruples_fit_term(self):
        mesh, basis, theta, data = random_instance(11, 4, 3)
        Sigma, _, _ = dense_training_cov(basis, theta, data)
        y = data.Y.reshape(-1, order="F")
        f1 = 0.5 * y @ np.linalg.solve(Sigma, y)
        doubled = m.TrainingSet(data.locations, data.times, 2 * data.Y)
        diff = m.nll(theta, doubled, basis) - m.nll(theta, data, basis)
        assert diff == pytest.approx(3 * f1, rel=1e-9)

    def test_permutation_invariance(self):
        mesh, basis, theta, data = random_instance(13, 6, 4)
        perm = np.random.default_rng(5).permutation(6)
        permuted = m.TrainingSet(data.locations[perm], data.times, data.Y[:, perm])
        a = m.nll(theta, data, basis)
        b = m.nll(theta, permuted, basis)
        assert b == pytest.approx(a, rel=1e-10)

    def test_euclidean_kind_matches_dense(self):
        mesh, basis, theta, data = random_instance(17, 5, 3)
        Sigma, _, _ = dense_training_cov(basis, theta, data, mesh, "euclidean")
        expected = dense_nll(Sigma, data.Y)
        got = m.nll(theta, data, basis, kind="euclidean", mesh=mesh)
        assert got == pytest.approx(expected, rel=1e-8)


class TestFit:
    def test_never_worse_than_given_start(self, sphere42, sphere42_basis):
        rng = np.random.default_rng(3)
        theta0 = m.HyperParams(0.8, 1.0, 0.15, 2.0, 1.0, 0.1)
        locs = np.arange(12)
        times = np.linspace(0, 8, 6)
        Sigma, ks, kt = dense_training_cov(
            sphere42_basis, theta0,
            m.TrainingSet(locs, times, np.zeros((6, 12))))
        L = np.linalg.cholesky(Sigma)
        y = L @ rng.standard_normal(len(L))
        data = m.TrainingSet(locs, times, y.reshape(6, 12, order="F"))
        model = m.fit(data, sphere42_basis,
                      config=m.FitConfig(starts=(theta0,), max_iter=120))
        assert m.nll(model.theta, data, sphere42_basis) <= m.nll(
            theta0, data, sphere42_basis) + 1e-9

    def test_white_noise_recovers_total_variance(self, sphere162):
        basis = m.spectral_basis(m.cotan_laplacian(sphere162), 40)
        rng = np.random.default_rng(0)
        locs = np.sort(rng.choice(162, 30, replace=False))
        times = np.arange(200, dtype=float)
        Y = 0.1 * rng.standard_normal((200, 30))
        data = m.TrainingSet(locs, times, Y)
        model = m.fit(data, basis, config=m.FitConfig(max_iter=200))
        t = model.theta
        ks_diag = m.spatial_kernel_diag(basis, t, locs)
        total = np.mean((ks_diag + t.sigma_eps_s) * (t.sigma_a + t.sigma_eps_t))
        assert total == pytest.approx(float(np.var(Y)), rel=0.3)

    def test_deterministic(self, sphere42, sphere42_basis):
        _, _, theta, data = random_instance(23, 8, 6, sphere42, sphere42_basis)
        cfg = m.FitConfig(max_iter=60)
        t1 = m.fit(data, sphere42_basis, config=cfg).theta
        t2 = m.fit(data, sphere42_basis, config=cfg).theta
        assert t1 == t2

    def test_all_starts_failing_raises(self, sphere42, sphere42_basis):
        _, _, _, data = random_instance(29, 5, 4, sphere42, sphere42_basis)
        # a corrupted basis poisons every covariance the optimizer can try
        bad_basis = m.SpectralBasis(
            eigenvalues=sphere42_basis.eigenvalues.copy(),
            eigenvectors=np.full_like(sphere42_basis.eigenvectors, np.nan),
            mass=sphere42_basis.mass,
        )
        with pytest.raises(m.NumericalError):
            m.fit(data, bad_basis, config=m.FitConfig(max_iter=10))


class TestPosterior:
    def test_interpolates_noise_free_observations(self, sphere42, sphere42_basis):
        rng = np.random.default_rng(4)
        theta = m.HyperParams(0.8, 1.0, 0.0, 2.0, 1.0, 0.0)
        locs = np.sort(rng.choice(42, 8, replace=False))
        times = np.linspace(0, 5, 5)
        Y = rng.standard_normal((5, 8))
        data = m.TrainingSet(locs, times, Y)
        model = m.FittedModel(theta, data, sphere42_basis, "laplacian")
        mean = m.posterior_mean(model, locs, times)
        assert np.abs(mean - Y).max() <= 1e-6 * np.abs(Y).max()

    def test_far_future_reverts_to_prior_mean(self):
        mesh, basis, theta, data = random_instance(31, 5, 4)
        model = m.FittedModel(theta, data, basis, "laplacian")
        far = np.array([data.times[-1] + 80 * theta.l_t])
        mean = m.posterior_mean(model, data.locations, far)
        assert np.abs(mean).max() <= 1e-6 * np.abs(data.Y).max()

    def test_mean_matches_dense_oracle(self):
        mesh, basis, theta, data = random_instance(37, 5, 4)
        Sigma, ks, kt = dense_training_cov(basis, theta, data)
        model = m.FittedModel(theta, data, basis, "laplacian")
        qids = np.array([0, 9, 24])
        qts = np.array([0.7, 4.4])
        mean = m.posterior_mean(model, qids, qts)
        ks_star = m.spatial_kernel(basis, theta, qids, data.locations)
        kt_star = m.temporal_kernel(qts, data.times, theta)
        y = data.Y.reshape(-1, order="F")
        dense = np.kron(ks_star, kt_star) @ np.linalg.solve(Sigma, y)
        assert np.abs(dense - mean.reshape(-1, order="F")).max() <= 1e-8 * (
            1 + np.abs(dense).max())

    def test_std_collapses_at_training_points(self, sphere42, sphere42_basis):
        theta = m.HyperParams(0.8, 1.0, 0.0, 2.0, 1.0, 0.0)
        rng = np.random.default_rng(6)
        locs = np.arange(6)
        times = np.linspace(0, 4, 4)
        data = m.TrainingSet(locs, times, rng.standard_normal((4, 6)))
        model = m.FittedModel(theta, data, sphere42_basis, "laplacian")
        std = m.posterior_std(model, locs, times)
        prior = np.sqrt(
            np.outer(np.full(4, theta.sigma_a),
                     m.spatial_kernel_diag(sphere42_basis, theta, locs)))
        assert np.all(std <= 1e-4 * prior)

    def test_huge_nugget_gives_prior_std(self):
        mesh, basis, theta, data = random_instance(41, 5, 4)
        big = m.HyperParams(theta.l_s, theta.sigma_m, 1e10, theta.l_t,
                            theta.sigma_a, 1e10)
        model = m.FittedModel(big, data, basis, "laplacian")
        qids = np.array([1, 8])
        qts = np.array([2.0, 9.0])
        std = m.posterior_std(model, qids, qts)
        prior = np.sqrt(np.outer(
            np.full(2, big.sigma_a),
            m.spatial_kernel_diag(basis, big, qids)))
        assert np.allclose(std, prior, rtol=1e-6)

    def test_std_matches_dense_oracle(self):
        mesh, basis, theta, data = random_instance(43, 5, 4)
        Sigma, _, _ = dense_training_cov(basis, theta, data)
        model = m.FittedModel(theta, data, basis, "laplacian")
        qids = np.array([2, 17, 30])
        qts = np.array([1.1, 6.2])
        std = m.posterior_std(model, qids, qts)
        ks_star = m.spatial_kernel(basis, theta, qids, data.locations)
        kt_star = m.temporal_kernel(qts, data.times, theta)
        kst = np.kron(ks_star, kt_star)
        kss = m.spatial_kernel(basis, theta, qids, qids)
        ktt = m.temporal_kernel(qts, qts, theta)
        var = np.diag(np.kron(kss, ktt)) - np.einsum(
            "ij,ij->i", kst, np.linalg.solve(Sigma, kst.T).T)
        dense = np.sqrt(np.clip(var, 0, None))
        assert np.abs(dense - std.reshape(-1, order="F")).max() <= 1e-8 * (
            1 + dense.max())

    def test_more_data_never_increases_variance(self, sphere42, sphere42_basis):
        theta = m.HyperParams(0.9, 1.0, 0.3, 2.0, 1.2, 0.1)
        rng = np.random.default_rng(8)
        times = np.linspace(0, 6, 5)
        locs_small = np.array([0, 5, 11, 20])
        locs_big = np.array([0, 5, 11, 20, 33])
        Yb = rng.standard_normal((5, 5))
        small = m.FittedModel(
            theta, m.TrainingSet(locs_small, times, Yb[:, :4]),
            sphere42_basis, "laplacian")
        big = m.FittedModel(
            theta, m.TrainingSet(locs_big, times, Yb),
            sphere42_basis, "laplacian")
        q = np.arange(42)
        assert np.all(
            m.posterior_std(big, q, times) <=
            m.posterior_std(small, q, times) + 1e-8)

    def test_predict_bundles_mean_and_std(self):
        mesh, basis, theta, data = random_instance(47, 4, 3)
        model = m.FittedModel(theta, data, basis, "laplacian")
        pred = m.predict(model, [0, 1], [1.0, 2.0, 3.0])
        assert pred.mean.shape == (3, 2)
        assert pred.std.shape == (3, 2)
        assert np.all(pred.std >= 0)


class TestPersistence:
    def test_save_load_roundtrip(self, tmp_path):
        mesh, basis, theta, data = random_instance(53, 5, 4)
        model = m.FittedModel(theta, data, basis, "laplacian")
        path = tmp_path / "model.json"
        m.save_model(model, path)
        back = m.load_model(path, data, basis)
        assert back.theta == model.theta
        assert back.kind == model.kind

    def test_load_rejects_mismatched_data(self, tmp_path):
        mesh, basis, theta, data = random_instance(59, 5, 4)
        model = m.FittedModel(theta, data, basis, "laplacian")
        path = tmp_path / "model.json"
        m.save_model(model, path)
        other = m.TrainingSet(data.locations, data.times, data.Y + 1.0)
        with pytest.raises(ValueError):
            m.load_model(path, other, basis)


class TestSignalsIO:
    def test_roundtrip_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        times = np.sort(rng.uniform(0, 10, 7))
        Y = rng.standard_normal((7, 4))
        ids = np.array([3, 8, 11, 40])
        path = tmp_path / "signals.csv"
        m.write_signals(path, times, Y, ids)
        t2, y2, i2 = m.read_signals(path)
        assert np.array_equal(t2, times)
        assert np.array_equal(y2, Y)
        assert np.array_equal(i2, ids)

    def test_malformed_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("when,v0\n0.0,1.0\n")
        with pytest.raises(ValueError):
            m.read_signals(path)

    def test_wrong_field_count(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("time,v0,v1\n0.0,1.0\n")
        with pytest.raises(ValueError):
            m.read_signals(path)

    def test_non_numeric_value(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("time,v0\n0.0,abc\n")
        with pytest.raises(ValueError):
            m.read_signals(path)


class TestTrainingSetValidation:
    def test_duplicate_locations_rejected(self):
        with pytest.raises(ValueError):
            m.TrainingSet([1, 1], [0.0, 1.0], np.zeros((2, 2)))

    def test_non_increasing_times_rejected(self):
        with pytest.raises(ValueError):
            m.TrainingSet([0, 1], [1.0, 1.0], np.zeros((2, 2)))

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            m.TrainingSet([0, 1], [0.0, 1.0], np.zeros((3, 2)))

    def test_nonfinite_rejected(self):
        Y = np.zeros((2, 2))
        Y[0, 0] = np.nan
        with pytest.raises(ValueError):
            m.TrainingSet([0, 1], [0.0, 1.0], Y)


def test_default_starts_have_grid_shape(sphere42, sphere42_basis):
    _, _, _, data = random_instance(61, 10, 8, sphere42, sphere42_basis)
    starts = default_starts(data, sphere42_basis, "laplacian")
    assert len(starts) == 8
    assert all(s.sigma_m == 1.0 for s in starts)
