"""Sequential sensor placement on the mesh.

Each round scores every unmeasured vertex by a convex combination of two
normalized criteria: its minimum geodesic distance to the measured set
(space filling) and its time-averaged posterior standard deviation
(uncertainty).  The adaptive strategy weights the two by comparing the
model's leave-one-location-out cross-validation error against its fitted
spatial noise level, so a poorly fitting model leans on coverage and a
well-calibrated one chases uncertainty.

The cross-validation error needs no refits: with the separable covariance,
the residual time series at location ``i`` collapses to column ``i`` of
``Y Sigma_s^-1`` divided by the ``i``-th diagonal entry of ``Sigma_s^-1``.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .gp import (
    FitConfig,
    FittedModel,
    TrainingSet,
    fit,
    posterior_mean,
    posterior_std,
    single_threaded_blas,
)
from .kernels import KIND_LAPLACIAN
from .mesh import geodesic_distance_matrix
from .metrics import relative_error
from .simulate import add_noise

STRATEGY_ADAPTIVE = "A-AL"
STRATEGY_FIXED = "F-AL"
STRATEGY_UNCERTAINTY = "U-AL"
STRATEGY_SPACE_FILLING = "S-AL"
STRATEGY_RANDOM = "R-AL"
STRATEGIES = (
    STRATEGY_ADAPTIVE,
    STRATEGY_FIXED,
    STRATEGY_UNCERTAINTY,
    STRATEGY_SPACE_FILLING,
    STRATEGY_RANDOM,
)


@dataclass(frozen=True)
class ALConfig:
    """Active-learning run settings."""

    strategy: str = STRATEGY_ADAPTIVE
    gamma: float = 1.0  # weight ratio alpha1/alpha2 for the fixed strategy
    batch_size: int = 3
    rounds: int = 30
    initial_count: int = 50
    seed: int = 0
    refit_each_round: bool = True

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.batch_size < 1 or self.rounds < 1 or self.initial_count < 1:
            raise ValueError("batch_size, rounds, initial_count must be positive")
        if self.strategy == STRATEGY_FIXED and self.gamma < 0:
            raise ValueError("gamma must be nonnegative")


@dataclass
class RoundRecord:
    """One active-learning round: what was selected and how the model did."""

    round_index: int
    n_added: int
    re: float
    tau2: float
    sigma2_eps_s: float
    alpha1: float
    alpha2: float
    picked: tuple


@dataclass
class ALState:
    """Mutable state of one active-learning run."""

    measured: np.ndarray
    candidates: np.ndarray
    model: FittedModel
    weights: tuple
    dist_to_measured: np.ndarray
    history: list = field(default_factory=list)
    initial_re: float = float("nan")


def loo_cv_error(model):
    """Leave-one-location-out CV error and per-location residual series.

    Returns ``(tau2, residuals)`` with ``residuals`` of shape
    ``N_t x n``; ``tau2`` is the residual sum of squares divided by the
    number of locations.
    """
    n = model.data.num_locations
    if n < 2:
        raise ValueError("cross-validation needs at least 2 locations")
    s_inv = model.solve_spatial(np.eye(n))
    residuals = (model.data.Y @ s_inv) / np.diag(s_inv)[None, :]
    tau2 = float(np.sum(residuals**2)) / n
    return tau2, residuals


def adaptive_weights(tau2, sigma2_noise):
    """Space-filling vs uncertainty weights from CV error and noise level."""
    if tau2 < 0 or sigma2_noise < 0:
        raise ValueError("tau2 and sigma2_noise must be nonnegative")
    total = tau2 + sigma2_noise
    if total == 0:
        raise ValueError("tau2 and sigma2_noise cannot both be zero")
    return tau2 / total, sigma2_noise / total


def fixed_weights(gamma):
    """Weights with a fixed ratio alpha1/alpha2 = gamma."""
    return gamma / (1.0 + gamma), 1.0 / (1.0 + gamma)


def uncertainty_score(model, candidates):
    """Posterior standard deviation averaged over the training times."""
    candidates = np.asarray(candidates, dtype=np.int64)
    std = posterior_std(model, candidates, model.data.times)
    return std.mean(axis=0)


def space_filling_score(distance_fields, candidates):
    """Minimum geodesic distance from each candidate to the measured set.

    ``distance_fields`` holds one row of vertex distances per measured
    location (as produced by :func:`meshgp.mesh.geodesic_distance_matrix`).
    """
    fields = np.atleast_2d(np.asarray(distance_fields, dtype=float))
    if fields.shape[0] == 0:
        raise ValueError("measured set is empty")
    return fields.min(axis=0)[np.asarray(candidates, dtype=np.int64)]


def select_next(state, alpha1, alpha2, batch_size, mesh=None):
    """Greedy batch selection by the combined normalized criterion.

    Both criteria are rescaled by their maximum over the current
    candidates.  Within a batch the distance term is updated after every
    pick while uncertainty scores stay frozen (no new observations arrive
    mid-batch).  Ties break to the lowest vertex id.
    """
    candidates = np.sort(np.asarray(state.candidates, dtype=np.int64))
    if len(candidates) == 0:
        raise ValueError("no candidates left")
    if len(candidates) < batch_size:
        raise ValueError(f"need {batch_size} candidates, have {len(candidates)}")
    mesh = mesh if mesh is not None else state.model.mesh

    unc = uncertainty_score(state.model, candidates)
    dist = state.dist_to_measured.copy()

    picked = []
    remaining = np.ones(len(candidates), dtype=bool)
    for _ in range(batch_size):
        ids = candidates[remaining]
        d = dist[ids]
        u = unc[remaining]
        d_norm = d / d.max() if d.max() > 0 else np.zeros_like(d)
        u_norm = u / u.max() if u.max() > 0 else np.zeros_like(u)
        score = alpha1 * d_norm + alpha2 * u_norm
        choice = ids[int(np.argmax(score))]  # first max: lowest id wins ties
        picked.append(int(choice))
        remaining[np.searchsorted(candidates, choice)] = False
        new_field = geodesic_distance_matrix(mesh, [choice])[0]
        dist = np.minimum(dist, new_field)
    return picked


def _weights_for(config, tau2, sigma2_eps_s):
    if config.strategy == STRATEGY_ADAPTIVE:
        return adaptive_weights(tau2, sigma2_eps_s)
    if config.strategy == STRATEGY_FIXED:
        return fixed_weights(config.gamma)
    if config.strategy == STRATEGY_UNCERTAINTY:
        return 0.0, 1.0
    if config.strategy == STRATEGY_SPACE_FILLING:
        return 1.0, 0.0
    return float("nan"), float("nan")  # random strategy ignores weights


def run_active_learning(truth, noise_level, mesh, basis, config,
                        kind=KIND_LAPLACIAN, fit_config=None,
                        refit_max_iter=200):
    """Run one seeded active-learning campaign.

    Starts from ``initial_count`` random vertices, then for each round:
    scores candidates with the strategy's weights, reveals the noisy time
    series at the selected batch, refits (warm-started) or rebuilds the
    model, and records the relative error of the full-field posterior mean
    against the noise-free truth.

    Returns the final :class:`ALState`; per-round records are in
    ``state.history`` and the initial fit's error in
    ``state.initial_re``.
    """
    n = mesh.num_vertices
    needed = config.initial_count + config.rounds * config.batch_size
    if needed > n:
        raise ValueError(f"need {needed} vertices, mesh has {n}")
    if truth.U.shape[1] != n:
        raise ValueError("truth field does not cover all vertices")

    seeds = np.random.SeedSequence(config.seed).spawn(3)
    rng_init = np.random.default_rng(seeds[0])
    noise_seed = seeds[1]
    rng_random = np.random.default_rng(seeds[2])

    # one noisy field per campaign so every strategy with the same seed
    # observes identical values at identical vertices
    noisy = add_noise(truth.U, noise_level, noise_seed)

    all_ids = np.arange(n)
    measured = np.sort(rng_init.choice(n, size=config.initial_count, replace=False))
    candidates = np.setdiff1d(all_ids, measured)

    base_fit = fit_config if fit_config is not None else FitConfig()

    def build(measured_ids, warm):
        data = TrainingSet(measured_ids, truth.times, noisy[:, measured_ids])
        if warm is None:
            return fit(data, basis, kind, base_fit, mesh)
        if not config.refit_each_round:
            return FittedModel(warm.theta, data, basis, kind, mesh)
        cfg = FitConfig(max_iter=refit_max_iter, rel_tol=base_fit.rel_tol,
                        warm_start=warm.theta, warm_only=True)
        return fit(data, basis, kind, cfg, mesh)

    with single_threaded_blas():
        model = build(measured, warm=None)
        initial_re = relative_error(
            posterior_mean(model, all_ids, truth.times), truth.U
        )

        dist = geodesic_distance_matrix(mesh, measured).min(axis=0)
        state = ALState(measured=measured, candidates=candidates, model=model,
                        weights=(float("nan"), float("nan")),
                        dist_to_measured=dist, initial_re=initial_re)

        for round_index in range(1, config.rounds + 1):
            tau2, _ = loo_cv_error(state.model)
            sigma2_eps_s = state.model.theta.sigma_eps_s
            alpha1, alpha2 = _weights_for(config, tau2, sigma2_eps_s)
            state.weights = (alpha1, alpha2)

            if config.strategy == STRATEGY_RANDOM:
                batch = [int(i) for i in
                         rng_random.choice(state.candidates,
                                           size=config.batch_size,
                                           replace=False)]
            else:
                batch = select_next(state, alpha1, alpha2, config.batch_size,
                                    mesh)

            state.measured = np.concatenate([state.measured, batch]).astype(np.int64)
            state.candidates = np.setdiff1d(state.candidates, batch)
            new_fields = geodesic_distance_matrix(mesh, batch)
            state.dist_to_measured = np.minimum(
                state.dist_to_measured, new_fields.min(axis=0)
            )

            state.model = build(state.measured, warm=state.model)
            re = relative_error(
                posterior_mean(state.model, all_ids, truth.times), truth.U
            )
            state.history.append(
                RoundRecord(
                    round_index=round_index,
                    n_added=round_index * config.batch_size,
                    re=re,
                    tau2=tau2,
                    sigma2_eps_s=sigma2_eps_s,
                    alpha1=alpha1,
                    alpha2=alpha2,
                    picked=tuple(batch),
                )
            )
    return state


def write_history_csv(history, path):
    """Export round records: one row per round, picks joined by ';'."""
    with open(path, "w") as fh:
        fh.write("round,N_plus,RE,tau2,sigma2_eps_s,alpha1,alpha2,picked_ids\n")
        for rec in history:
            picks = ";".join(str(i) for i in rec.picked)
            fh.write(
                f"{rec.round_index},{rec.n_added},{float(rec.re)!r},{float(rec.tau2)!r},"
                f"{float(rec.sigma2_eps_s)!r},{float(rec.alpha1)!r},{float(rec.alpha2)!r},{picks}\n"
            )


def history_summary(state, config):
    """JSON-ready summary of a finished campaign."""
    return {
        "strategy": config.strategy,
        "seed": config.seed,
        "initial_count": config.initial_count,
        "rounds": config.rounds,
        "batch_size": config.batch_size,
        "initial_re": getattr(state, "initial_re", None),
        "final_re": state.history[-1].re if state.history else None,
        "final_measured": int(len(state.measured)),
        "re_by_round": [rec.re for rec in state.history],
    }


def write_history_json(state, config, path):
    with open(path, "w") as fh:
        json.dump(history_summary(state, config), fh, indent=2)
