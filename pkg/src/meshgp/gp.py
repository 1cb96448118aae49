"""Separable spatiotemporal Gaussian-process regression.

The covariance of the training grid factors as
``(K_s + sigma_eps_s I) kron (K_t + sigma_eps_t I)`` for observations laid
out location-major (time is the fast index), i.e. ``vec(Y)`` stacks the
columns of the ``N_t x N_s`` matrix ``Y``.  All likelihood and posterior
computations work through the two small factors; the full Kronecker matrix
is never formed.

Amplitude is carried by ``sigma_a``: since scaling the spatial factor up
and the temporal factor down leaves the product unchanged, ``sigma_m`` is
pinned to 1 during optimization and only the remaining five parameters are
estimated (in log space, by multi-start Nelder-Mead).
"""

import hashlib
import json
import math
from contextlib import nullcontext
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.optimize import minimize

try:
    from threadpoolctl import threadpool_limits
except ImportError:  # pragma: no cover
    threadpool_limits = None


def single_threaded_blas():
    """Limit BLAS pools to one thread for the scope of a hot loop.

    The factor matrices here are small (hundreds of rows); multithreaded
    BLAS adds synchronization cost that dwarfs the arithmetic, especially
    under container CPU quotas.
    """
    if threadpool_limits is None:
        return nullcontext()
    return threadpool_limits(limits=1)

from .errors import NumericalError
from .kernels import (
    KERNEL_KINDS,
    KIND_EUCLIDEAN,
    KIND_LAPLACIAN,
    HyperParams,
    euclidean_spatial_kernel,
    spatial_kernel,
    spatial_kernel_diag,
    temporal_kernel,
)

# jitter escalation: fractions of the mean diagonal tried before giving up
_JITTER_LADDER = (0.0, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4)

LOG2PI = math.log(2.0 * math.pi)


@dataclass
class TrainingSet:
    """Observations on a grid of vertex ids by time points.

    ``Y`` is ``N_t x N_s``: column ``i`` holds the time series observed at
    vertex ``locations[i]``.
    """

    locations: np.ndarray
    times: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        self.locations = np.asarray(self.locations, dtype=np.int64)
        self.times = np.asarray(self.times, dtype=float)
        self.Y = np.asarray(self.Y, dtype=float)
        if self.locations.ndim != 1 or self.times.ndim != 1:
            raise ValueError("locations and times must be 1-D")
        if len(np.unique(self.locations)) != len(self.locations):
            raise ValueError("duplicate training locations")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")
        if self.Y.shape != (len(self.times), len(self.locations)):
            raise ValueError(
                f"Y must be {(len(self.times), len(self.locations))}, got {self.Y.shape}"
            )
        if not np.all(np.isfinite(self.Y)):
            raise ValueError("Y contains non-finite values")

    @property
    def num_locations(self):
        return len(self.locations)

    @property
    def num_times(self):
        return len(self.times)


@dataclass(frozen=True)
class FitConfig:
    """Settings for maximum-likelihood hyperparameter estimation."""

    n_starts: int = 8
    max_iter: int = 500
    rel_tol: float = 1e-6
    starts: tuple = None  # optional explicit HyperParams start points
    warm_start: HyperParams = None  # single extra start, e.g. a previous fit
    warm_only: bool = False  # skip the grid and refine warm_start alone


@dataclass
class Prediction:
    """Posterior mean and standard deviation on a times-by-vertices grid."""

    mean: np.ndarray
    std: np.ndarray


class FittedModel:
    """A trained separable GP with cached spatial/temporal factorizations."""

    def __init__(self, theta, data, basis, kind, mesh=None):
        if kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {kind!r}")
        if kind == KIND_EUCLIDEAN and mesh is None:
            raise ValueError("euclidean kernel requires the mesh")
        self.theta = theta
        self.data = data
        self.basis = basis
        self.kind = kind
        self.mesh = mesh

        sigma_s = _spatial_cov(kind, basis, mesh, theta, data.locations, data.locations)
        sigma_s[np.diag_indices_from(sigma_s)] += theta.sigma_eps_s
        sigma_t = temporal_kernel(data.times, data.times, theta)
        sigma_t[np.diag_indices_from(sigma_t)] += theta.sigma_eps_t

        self._chol_s, self.jitter_s = _chol_with_jitter(sigma_s, theta)
        self._chol_t, self.jitter_t = _chol_with_jitter(sigma_t, theta)

        # Sigma_t^-1 Y Sigma_s^-1, reused by the likelihood and the posterior mean
        self._G = cho_solve(self._chol_t, cho_solve(self._chol_s, data.Y.T).T)

    def solve_spatial(self, B):
        return cho_solve(self._chol_s, B)

    def solve_temporal(self, B):
        return cho_solve(self._chol_t, B)

    def spatial_cross(self, rows):
        """Covariance block between query vertices and training vertices."""
        return _spatial_cov(self.kind, self.basis, self.mesh, self.theta,
                            np.asarray(rows, dtype=np.int64), self.data.locations)

    def spatial_prior_diag(self, rows):
        rows = np.asarray(rows, dtype=np.int64)
        if self.kind == KIND_LAPLACIAN:
            return spatial_kernel_diag(self.basis, self.theta, rows)
        return np.full(len(rows), self.theta.sigma_m)

    @property
    def log_det_spatial(self):
        return 2.0 * float(np.sum(np.log(np.diag(self._chol_s[0]))))

    @property
    def log_det_temporal(self):
        return 2.0 * float(np.sum(np.log(np.diag(self._chol_t[0]))))


def _spatial_cov(kind, basis, mesh, theta, rows, cols):
    if kind == KIND_LAPLACIAN:
        return spatial_kernel(basis, theta, rows, cols)
    return euclidean_spatial_kernel(mesh, theta, rows, cols)


def _chol_with_jitter(mat, theta):
    """Cholesky factor with escalating diagonal jitter, else NumericalError.

    ValueError from LAPACK covers non-finite matrices, which extreme
    hyperparameters can produce; those fail every jitter level.
    """
    mean_diag = float(np.mean(np.diag(mat)))
    for level in _JITTER_LADDER:
        try:
            shifted = mat if level == 0.0 else mat + level * mean_diag * np.eye(len(mat))
            return cho_factor(shifted, lower=True), level * mean_diag
        except (LinAlgError, ValueError):
            continue
    raise NumericalError(
        f"covariance factorization failed after jitter up to {_JITTER_LADDER[-1]:.0e}"
        " of the mean diagonal",
        theta=theta,
    )


def nll(theta, data, basis, kind=KIND_LAPLACIAN, mesh=None):
    """Negative log marginal likelihood via the two small factorizations.

    Returns ``f1 + f2 + f3`` where ``f1`` is the data-fit quadratic form,
    ``f2 = (N_t log|Sigma_s| + N_s log|Sigma_t|) / 2``, and ``f3`` the
    normalization constant.
    """
    model = FittedModel(theta, data, basis, kind, mesh)
    return _nll_of_model(model)


def _nll_of_model(model):
    data = model.data
    f1 = 0.5 * float(np.sum(data.Y * model._G))
    f2 = 0.5 * (
        data.num_times * model.log_det_spatial
        + data.num_locations * model.log_det_temporal
    )
    f3 = 0.5 * data.num_locations * data.num_times * LOG2PI
    return f1 + f2 + f3


def _median_pairwise(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    diffs = np.linalg.norm(x[:, None, :] - x[None, :, :], axis=-1)
    vals = diffs[np.triu_indices(len(x), k=1)]
    vals = vals[vals > 0]
    return float(np.median(vals)) if len(vals) else 1.0


def default_starts(data, basis, kind, mesh=None):
    """Coarse log-grid of start points spanning length scales and nuggets.

    The spatial scale seed comes from the geometry the kernel actually
    sees: the eigenvalue spectrum for the spectral kernel, pairwise chord
    distances for the Euclidean one.
    """
    if kind == KIND_LAPLACIAN or mesh is None:
        lam_pos = basis.eigenvalues[basis.eigenvalues > 0]
        ls0 = 1.0 / math.sqrt(float(np.median(lam_pos))) if len(lam_pos) else 1.0
    else:
        ls0 = _median_pairwise(mesh.vertices[data.locations])
    lt0 = _median_pairwise(data.times)
    y_var = max(float(np.var(data.Y)), 1e-12)

    starts = []
    for ls_mult in (0.5, 2.0):
        for lt_mult in (0.5, 2.0):
            for nugget_frac in (0.05, 0.5):
                l_s = ls_mult * ls0
                probe = HyperParams(l_s, 1.0, 0.0, lt_mult * lt0, 1.0, 0.0)
                if kind == KIND_LAPLACIAN:
                    ks_scale = float(np.mean(spatial_kernel_diag(basis, probe, data.locations)))
                else:
                    ks_scale = 1.0
                if not (np.isfinite(ks_scale) and ks_scale > 0):
                    ks_scale = 1.0
                sigma_a = y_var / ks_scale
                starts.append(
                    HyperParams(
                        l_s=l_s,
                        sigma_m=1.0,
                        sigma_eps_s=nugget_frac * ks_scale,
                        l_t=lt_mult * lt0,
                        sigma_a=sigma_a,
                        sigma_eps_t=nugget_frac * sigma_a,
                    )
                )
    return starts


def _theta_to_log(theta):
    return np.log(
        [theta.l_s, max(theta.sigma_eps_s, 1e-300), theta.l_t, theta.sigma_a,
         max(theta.sigma_eps_t, 1e-300)]
    )


def _log_to_theta(x):
    l_s, eps_s, l_t, sigma_a, eps_t = np.exp(x)
    return HyperParams(l_s=l_s, sigma_m=1.0, sigma_eps_s=eps_s, l_t=l_t,
                       sigma_a=sigma_a, sigma_eps_t=eps_t)


def fit(data, basis, kind=KIND_LAPLACIAN, config=None, mesh=None):
    """Maximum-likelihood fit of the five free hyperparameters.

    Runs Nelder-Mead in log space from each start point and returns the
    model at the best point seen (so the result is never worse than any
    start).  Deterministic: the start grid is derived from the data alone.
    """
    if config is None:
        config = FitConfig()
    if config.warm_only and config.warm_start is not None:
        starts = [config.warm_start]
    elif config.starts is not None:
        starts = list(config.starts)
    else:
        starts = default_starts(data, basis, kind, mesh)[: config.n_starts]
        if config.warm_start is not None:
            starts = [config.warm_start] + starts

    def objective(x):
        if not np.all(np.isfinite(x)) or np.any(np.abs(x) > 46):
            return np.inf
        try:
            return nll(_log_to_theta(x), data, basis, kind, mesh)
        except NumericalError:
            return np.inf

    best_theta, best_val = None, np.inf
    with single_threaded_blas():
        for start in starts:
            # the start itself is a candidate, evaluated exactly (zero nuggets
            # are representable here even though the log parameterization is not)
            try:
                f_start = nll(start, data, basis, kind, mesh)
            except NumericalError:
                f_start = np.inf
            if f_start < best_val:
                best_theta, best_val = start, f_start

            x0 = np.clip(_theta_to_log(start), -30.0, 30.0)
            f0 = objective(x0)
            if not np.isfinite(f0):
                continue
            res = minimize(
                objective,
                x0,
                method="Nelder-Mead",
                options={
                    "maxiter": config.max_iter,
                    "xatol": config.rel_tol,
                    "fatol": config.rel_tol * max(1.0, abs(f0)),
                },
            )
            if np.isfinite(res.fun) and res.fun < best_val:
                best_theta, best_val = _log_to_theta(res.x), float(res.fun)

    if best_theta is None or not np.isfinite(best_val):
        raise NumericalError("all optimizer starts failed to factorize")
    return FittedModel(best_theta, data, basis, kind, mesh)


def posterior_mean(model, query_ids, query_times):
    """Posterior mean on the query grid, shaped ``len(times) x len(ids)``."""
    ks_star = model.spatial_cross(query_ids)
    kt_star = temporal_kernel(query_times, model.data.times, model.theta)
    return kt_star @ model._G @ ks_star.T


def posterior_std(model, query_ids, query_times):
    """Posterior standard deviation on the query grid.

    The separable structure makes the pointwise variance the difference of
    two outer products of per-axis diagonals.  Small negative round-off is
    clamped to zero; anything below -1e-10 raises ``NumericalError``.
    """
    ks_star = model.spatial_cross(query_ids)
    kt_star = temporal_kernel(query_times, model.data.times, model.theta)

    ds_prior = model.spatial_prior_diag(query_ids)
    dt_prior = np.full(len(np.atleast_1d(query_times)), model.theta.sigma_a)

    ds_data = np.einsum("ij,ij->i", ks_star, model.solve_spatial(ks_star.T).T)
    dt_data = np.einsum("ij,ij->i", kt_star, model.solve_temporal(kt_star.T).T)

    var = np.outer(dt_prior, ds_prior) - np.outer(dt_data, ds_data)
    low = var.min()
    if low < -1e-10:
        raise NumericalError(f"negative posterior variance {low:.3e}", theta=model.theta)
    return np.sqrt(np.clip(var, 0.0, None))


def predict(model, query_ids, query_times):
    """Posterior mean and std in one call."""
    return Prediction(
        mean=posterior_mean(model, query_ids, query_times),
        std=posterior_std(model, query_ids, query_times),
    )


def _array_hash(arr):
    return hashlib.sha256(np.ascontiguousarray(arr).tobytes()).hexdigest()


def save_model(model, path):
    """Persist the fitted hyperparameters plus training-set reference hashes."""
    doc = {
        "theta": model.theta.to_dict(),
        "kind": model.kind,
        "eigenpairs": int(model.basis.count) if model.basis is not None else None,
        "training_hash": {
            "locations": _array_hash(model.data.locations),
            "times": _array_hash(model.data.times),
            "Y": _array_hash(model.data.Y),
        },
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)


def load_model(path, data, basis, mesh=None):
    """Rebuild a FittedModel from a saved parameter file.

    The training set must match the stored hashes; factorizations are
    recomputed from it.
    """
    with open(path) as fh:
        doc = json.load(fh)
    stored = doc["training_hash"]
    actual = {
        "locations": _array_hash(data.locations),
        "times": _array_hash(data.times),
        "Y": _array_hash(data.Y),
    }
    if stored != actual:
        raise ValueError("training set does not match the saved model hashes")
    theta = HyperParams(**doc["theta"])
    return FittedModel(theta, data, basis, doc["kind"], mesh)


def write_signals(path, times, Y, location_ids=None):
    """Write a signals CSV: header ``time,v<id>,...``, one row per time point."""
    times = np.asarray(times, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if location_ids is None:
        location_ids = np.arange(Y.shape[1])
    header = "time," + ",".join(f"v{int(i)}" for i in location_ids)
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for t, row in zip(times, Y):
            fh.write(f"{float(t)!r}," + ",".join(repr(float(x)) for x in row) + "\n")


def read_signals(path):
    """Parse a signals CSV into (times, Y, location_ids)."""
    with open(path) as fh:
        header = fh.readline().strip()
        cols = header.split(",")
        if not cols or cols[0] != "time" or len(cols) < 2:
            raise ValueError(f"{path}: expected header 'time,v<id>,...'")
        try:
            ids = np.array([int(c[1:]) for c in cols[1:]], dtype=np.int64)
        except ValueError as exc:
            raise ValueError(f"{path}: malformed column name in header") from exc
        if any(not c.startswith("v") for c in cols[1:]):
            raise ValueError(f"{path}: malformed column name in header")
        rows = []
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(cols):
                raise ValueError(f"{path}:{line_no}: wrong field count")
            try:
                rows.append([float(x) for x in parts])
            except ValueError as exc:
                raise ValueError(f"{path}:{line_no}: non-numeric value") from exc
    if not rows:
        raise ValueError(f"{path}: no data rows")
    block = np.array(rows)
    return block[:, 0], block[:, 1:], ids
