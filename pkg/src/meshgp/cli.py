"""Command-line entry points.

Five verbs, each driven by a JSON experiment config: ``eigs`` writes the
Laplacian eigenbasis, ``simulate`` generates truth and noisy signal files,
``fit-predict`` trains a model and scores the full-field prediction,
``active-learn`` runs sensor-placement campaigns, and ``benchmark``
assembles the full study grid into a consolidated report.

Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.
"""

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import benchmark as bench
from .active import ALConfig, run_active_learning, write_history_csv, write_history_json, history_summary
from .errors import ConfigError, MeshError, NumericalError
from .gp import TrainingSet, fit, posterior_mean, read_signals, save_model, write_signals
from .kernels import KERNEL_KINDS, KIND_LAPLACIAN
from .mesh import cotan_laplacian, load_mesh, spectral_basis
from .metrics import relative_error
from .simulate import APParams, StimulusProtocol, add_noise, simulate_aliev_panfilov, two_source_pacing

_AP_FIELDS = ("k", "a", "eps0", "mu1", "mu2", "D", "dt", "steps", "record_every")
_AL_FIELDS = ("strategy", "gamma", "batch_size", "rounds", "initial_count",
              "refit_each_round")


@dataclass
class ExperimentConfig:
    """A fully resolved experiment description (paths absolute)."""

    mesh_path: Path
    output_dir: Path
    seed: int
    eigenpairs: int = 256
    kernel: str = KIND_LAPLACIAN
    training_size: int = 50
    noise_level: float = 0.01
    simulation: APParams = field(default_factory=APParams)
    stimuli: tuple = ()
    pacing_period: float = 40.0
    use_default_pacing: bool = True
    al: dict = field(default_factory=dict)
    strategies: tuple = ()
    truth_path: Path = None
    noisy_path: Path = None
    eigenpair_sweep: tuple = bench.DEFAULT_EIGENPAIR_SWEEP
    training_sizes: tuple = bench.DEFAULT_TRAINING_SIZES
    noise_levels: tuple = bench.DEFAULT_NOISE_LEVELS
    replications: int = bench.DEFAULT_REPLICATIONS
    al_seeds: tuple = (0, 1, 2)


def _require(doc, key, path):
    if key not in doc:
        raise ConfigError(f"{path}: missing required key {key!r}")
    return doc[key]


def load_config(path, seed_override=None, out_override=None):
    path = Path(path)
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")

    base = path.parent
    mesh_path = base / _require(doc, "mesh", path)
    seed = int(_require(doc, "seed", path)) if seed_override is None else int(seed_override)
    out = Path(out_override) if out_override else base / doc.get("output_dir", "out")

    sim_doc = dict(doc.get("simulation", {}))
    stimuli_doc = sim_doc.pop("stimuli", None)
    pacing = sim_doc.pop("pacing_period", 40.0)
    unknown = set(sim_doc) - set(_AP_FIELDS)
    if unknown:
        raise ConfigError(f"{path}: unknown simulation keys {sorted(unknown)}")
    try:
        sim = APParams(**sim_doc)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: bad simulation parameters: {exc}") from exc

    stimuli = ()
    if stimuli_doc is not None:
        try:
            stimuli = tuple(
                StimulusProtocol(
                    vertices=tuple(int(v) for v in s["vertices"]),
                    amplitude=float(s["amplitude"]),
                    start=float(s.get("start", 0.0)),
                    duration=float(s["duration"]),
                    period=float(s.get("period", 0.0)),
                )
                for s in stimuli_doc
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: bad stimulus entry: {exc}") from exc

    al_doc = dict(doc.get("active_learning", {}))
    unknown = set(al_doc) - set(_AL_FIELDS)
    if unknown:
        raise ConfigError(f"{path}: unknown active_learning keys {sorted(unknown)}")

    bench_doc = dict(doc.get("benchmark", {}))
    kernel = doc.get("kernel", KIND_LAPLACIAN)
    if kernel not in KERNEL_KINDS:
        raise ConfigError(f"{path}: unknown kernel {kernel!r}")

    signals = doc.get("signals", {})

    cfg = ExperimentConfig(
        mesh_path=mesh_path,
        output_dir=out,
        seed=seed,
        eigenpairs=int(doc.get("eigenpairs", 256)),
        kernel=kernel,
        training_size=int(doc.get("training_size", 50)),
        noise_level=float(doc.get("noise_level", 0.01)),
        simulation=sim,
        stimuli=stimuli,
        pacing_period=float(pacing),
        use_default_pacing=stimuli_doc is None,
        al=al_doc,
        strategies=tuple(doc.get("strategies", ())),
        truth_path=base / signals["truth"] if "truth" in signals else None,
        noisy_path=base / signals["noisy"] if "noisy" in signals else None,
        eigenpair_sweep=tuple(bench_doc.get("eigenpair_sweep", bench.DEFAULT_EIGENPAIR_SWEEP)),
        training_sizes=tuple(bench_doc.get("training_sizes", bench.DEFAULT_TRAINING_SIZES)),
        noise_levels=tuple(bench_doc.get("noise_levels", bench.DEFAULT_NOISE_LEVELS)),
        replications=int(bench_doc.get("replications", bench.DEFAULT_REPLICATIONS)),
        al_seeds=tuple(bench_doc.get("al_seeds", (0, 1, 2))),
    )
    if not cfg.mesh_path.exists():
        raise ConfigError(f"mesh file not found: {cfg.mesh_path}")
    return cfg


def _load_geometry(cfg, need_basis=True):
    mesh = load_mesh(cfg.mesh_path)
    lap = cotan_laplacian(mesh)
    if not need_basis:
        return mesh, lap, None
    if cfg.eigenpairs > mesh.num_vertices:
        raise ConfigError(
            f"eigenpairs {cfg.eigenpairs} exceeds vertex count {mesh.num_vertices}"
        )
    return mesh, lap, spectral_basis(lap, cfg.eigenpairs)


def _simulate_truth(cfg, mesh, lap):
    stimuli = cfg.stimuli if not cfg.use_default_pacing else two_source_pacing(
        mesh, period=cfg.pacing_period
    )
    return simulate_aliev_panfilov(mesh, lap, cfg.simulation, stimuli)


def _ensure_out(cfg):
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    return cfg.output_dir


def cmd_eigs(cfg):
    mesh, lap, basis = _load_geometry(cfg)
    out = _ensure_out(cfg)
    with open(out / "eigenvalues.csv", "w") as fh:
        fh.write("index,eigenvalue\n")
        for i, lam in enumerate(basis.eigenvalues):
            fh.write(f"{i},{float(lam)!r}\n")
    with open(out / "eigenvectors.csv", "w") as fh:
        fh.write("vertex_id," + ",".join(f"mode_{j}" for j in range(basis.count)) + "\n")
        for i, row in enumerate(basis.eigenvectors):
            fh.write(f"{i}," + ",".join(repr(float(x)) for x in row) + "\n")
    print(f"wrote {basis.count} eigenpairs to {out}")
    return 0


def cmd_simulate(cfg):
    mesh, lap, _ = _load_geometry(cfg, need_basis=False)
    truth = _simulate_truth(cfg, mesh, lap)
    noise_seed = np.random.SeedSequence(cfg.seed).spawn(2)[1]
    noisy = add_noise(truth.U, cfg.noise_level, noise_seed)
    out = _ensure_out(cfg)
    write_signals(out / "truth.csv", truth.times, truth.U)
    write_signals(out / "noisy.csv", truth.times, noisy)
    print(f"simulated {truth.num_times} steps on {mesh.num_vertices} vertices -> {out}")
    return 0


def _training_data(cfg, mesh, truth_times, truth_U):
    init_seed, noise_seed = np.random.SeedSequence(cfg.seed).spawn(2)
    rng = np.random.default_rng(init_seed)
    n = mesh.num_vertices
    if cfg.training_size > n:
        raise ConfigError(f"training_size {cfg.training_size} exceeds {n} vertices")
    locations = np.sort(rng.choice(n, size=cfg.training_size, replace=False))
    if cfg.noisy_path is not None:
        times, Y, ids = read_signals(cfg.noisy_path)
        id_to_col = {int(v): k for k, v in enumerate(ids)}
        try:
            cols = [id_to_col[int(v)] for v in locations]
        except KeyError as exc:
            raise ConfigError(f"noisy signals missing vertex {exc}") from exc
        return TrainingSet(locations, times, Y[:, cols])
    noisy = add_noise(truth_U, cfg.noise_level, noise_seed)
    return TrainingSet(locations, truth_times, noisy[:, locations])


def cmd_fit_predict(cfg):
    mesh, lap, basis = _load_geometry(cfg)
    if cfg.truth_path is not None:
        times, U, _ = read_signals(cfg.truth_path)
    else:
        truth = _simulate_truth(cfg, mesh, lap)
        times, U = truth.times, truth.U
    data = _training_data(cfg, mesh, times, U)
    model = fit(data, basis, cfg.kernel, None, mesh)
    pred = posterior_mean(model, np.arange(mesh.num_vertices), times)
    re = relative_error(pred, U)
    out = _ensure_out(cfg)
    write_signals(out / "prediction.csv", times, pred)
    save_model(model, out / "model.json")
    with open(out / "metrics.json", "w") as fh:
        json.dump({"re": re, "kernel": cfg.kernel,
                   "training_size": cfg.training_size,
                   "noise_level": cfg.noise_level, "seed": cfg.seed,
                   "training_locations": [int(i) for i in data.locations]},
                  fh, indent=2)
    print(f"fit-predict RE = {re:.4f} ({cfg.kernel}) -> {out}")
    return 0


def cmd_active_learn(cfg):
    mesh, lap, basis = _load_geometry(cfg)
    truth = _simulate_truth(cfg, mesh, lap)
    strategies = cfg.strategies or (cfg.al.get("strategy", "A-AL"),)
    out = _ensure_out(cfg)
    comparison = []
    for strategy in strategies:
        al_doc = dict(cfg.al)
        al_doc["strategy"] = strategy
        al_doc.setdefault("seed", cfg.seed)
        try:
            config = ALConfig(**al_doc)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad active_learning settings: {exc}") from exc
        state = run_active_learning(truth, cfg.noise_level, mesh, basis, config)
        tag = strategy.lower().replace("-", "_")
        write_history_csv(state.history, out / f"history_{tag}.csv")
        write_history_json(state, config, out / f"summary_{tag}.json")
        comparison.append(history_summary(state, config))
        print(f"{strategy}: final RE {state.history[-1].re:.4f}")
    if len(strategies) > 1:
        with open(out / "comparison.json", "w") as fh:
            json.dump(comparison, fh, indent=2)
    return 0


def cmd_benchmark(cfg):
    mesh, lap, _ = _load_geometry(cfg, need_basis=False)
    truth = _simulate_truth(cfg, mesh, lap)
    out = _ensure_out(cfg)
    write_signals(out / "truth.csv", truth.times, truth.U)
    report = {"mesh": str(cfg.mesh_path), "seed": cfg.seed,
              "num_vertices": mesh.num_vertices, "num_times": truth.num_times}

    t0 = time.perf_counter()
    max_j = min(max(cfg.eigenpair_sweep), mesh.num_vertices)
    sweep_js = [j for j in cfg.eigenpair_sweep if j <= mesh.num_vertices]
    basis = spectral_basis(lap, max_j)
    sweep = bench.eigenpair_sweep(mesh, lap, truth, sweep_js,
                                  train_size=cfg.training_size,
                                  noise_level=cfg.noise_level,
                                  seed=cfg.seed, basis=basis)
    report["eigenpair_sweep"] = sweep
    report["eigenpair_sweep_flags"] = bench.sweep_shape_flags(sweep)

    basis_j = bench.truncate_basis(basis, min(cfg.eigenpairs, basis.count))
    grid_dir = out / "grid"
    grid_dir.mkdir(exist_ok=True)
    cells = []
    for si, size in enumerate(cfg.training_sizes):
        for ni, noise in enumerate(cfg.noise_levels):
            cell_start = time.perf_counter()
            cell = {"training_size": size, "noise_level": noise, "kernels": {}}
            for kind in KERNEL_KINDS:
                res = []
                for rep in range(cfg.replications):
                    seed = cfg.seed + 1000 * rep + 100 * si + 10 * ni
                    re, _, pred = bench.fit_predict_re(
                        mesh, basis_j, truth, size, noise, seed, kind)
                    pred_path = grid_dir / f"pred_s{size}_n{ni}_{kind}_r{rep}.csv"
                    write_signals(pred_path, truth.times, pred)
                    res.append({"seed": seed, "re": re,
                                "prediction": pred_path.name})
                cell["kernels"][kind] = {
                    "replications": res,
                    "re_mean": float(np.mean([r["re"] for r in res])),
                    "re_median": float(np.median([r["re"] for r in res])),
                }
            cell["wall_time_s"] = time.perf_counter() - cell_start
            cells.append(cell)
    report["grid"] = cells

    al = bench.al_comparison(mesh, basis_j, truth,
                             strategies=list(cfg.strategies) or ["A-AL", "R-AL"],
                             seeds=list(cfg.al_seeds),
                             noise_level=cfg.noise_level,
                             **{k: v for k, v in cfg.al.items()
                                if k in ("batch_size", "rounds", "initial_count", "gamma")})
    report["active_learning"] = al
    report["total_wall_time_s"] = time.perf_counter() - t0

    with open(out / "report.json", "w") as fh:
        json.dump(report, fh, indent=2)
    print(f"benchmark report -> {out / 'report.json'}")
    return 0


_COMMANDS = {
    "eigs": cmd_eigs,
    "simulate": cmd_simulate,
    "fit-predict": cmd_fit_predict,
    "active-learn": cmd_active_learn,
    "benchmark": cmd_benchmark,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="meshgp",
        description="Spatiotemporal GP modeling and sensor placement on meshes",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="experiment JSON file")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--out", default=None, help="override output directory")

    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, seed_override=args.seed, out_override=args.out)
        return _COMMANDS[args.command](cfg)
    except (ConfigError, MeshError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
