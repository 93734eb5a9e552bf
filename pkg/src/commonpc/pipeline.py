"""End-to-end experiment runner.

Each system is sampled, reweighted and serialized independently (in a
thread pool bounded by ``workers``).  Axes, grids and histograms are built
only after every system has finished.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import io
from .config import ExperimentConfig, Mode
from .induced import (
    PCGrid,
    PCHistogram,
    exact_marginal_quadrature,
    grid_from_data,
    induced_histogram,
    marginal_error,
    reweighted_marginal,
)
from .model import HARMONIC, QUARTIC, SystemSpec
from .pca import CommonAxes, build_axes, composed_stats, pc_project
from .reweight import WeightedSequence, compute_weights, effective_sample_size, weighted_moments
from .sampler import SamplerConfig, Target, Trajectory, chain_diagnostics, metropolis_sample, tune_step_sizes

logger = logging.getLogger(__name__)

ESS_WARN_FRACTION = 0.01
POTENTIAL_KINDS = {QUARTIC: "quartic_chain", HARMONIC: "harmonic"}


@dataclass
class SystemResult:
    spec: SystemSpec
    sampler: SamplerConfig
    trajectory: Trajectory
    weights: WeightedSequence
    diagnostics: dict
    axes: CommonAxes | None = None
    histogram: PCHistogram | None = None
    marginal: PCHistogram | None = None
    exact_marginal: PCHistogram | None = None


@dataclass
class RunManifest:
    config: dict
    mode: str
    status: str = "running"
    seeds: dict = field(default_factory=dict)
    acceptance_rates: dict = field(default_factory=dict)
    effective_sample_sizes: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    error: str | None = None
    results: dict = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("results")
        return d


def config_echo(cfg: ExperimentConfig) -> dict:
    systems = []
    for spec, scfg in cfg.systems:
        s = asdict(spec)
        pot = asdict(spec.potential)
        pot["kind"] = POTENTIAL_KINDS[pot["kind"]]
        s["potential"] = pot
        s["sampler"] = {**asdict(scfg), "target": scfg.target.value}
        systems.append(s)
    return {
        "mode": cfg.mode.value,
        "l": cfg.l,
        "fractions": cfg.fractions,
        "center_pc_scores": cfg.center_pc_scores,
        "grid": asdict(cfg.grid),
        "marginal": asdict(cfg.marginal),
        "workers": cfg.workers,
        "tune": cfg.tune,
        "target_acceptance": cfg.target_acceptance,
        "output_dir": str(cfg.output_dir),
        "systems": systems,
    }


def _marginal_grid(spec: SystemSpec, cfg: ExperimentConfig) -> PCGrid:
    i, j = (c - 1 for c in cfg.marginal.coords)
    box_i = spec.potential.quadrature_box(i, spec.beta_target)
    box_j = spec.potential.quadrature_box(j, spec.beta_target)
    return PCGrid((box_i[0], box_j[0]), (box_i[1], box_j[1]), cfg.marginal.bins)


def sample_system(spec: SystemSpec, scfg: SamplerConfig, cfg: ExperimentConfig) -> SystemResult:
    if cfg.mode is Mode.CANONICAL_BASELINE:
        scfg = replace(scfg, target=Target.CANONICAL)
    t0 = time.perf_counter()
    if cfg.tune:
        scfg = tune_step_sizes(spec, scfg, cfg.target_acceptance)
    traj = metropolis_sample(spec, scfg)
    diag = chain_diagnostics(spec, traj)
    ws = compute_weights(spec, traj)
    return SystemResult(
        spec=spec,
        sampler=scfg,
        trajectory=traj,
        weights=ws,
        diagnostics={
            "acceptance_rate": diag.acceptance_rate,
            "well_transition_counts": diag.well_transition_counts,
            "effective_sample_estimate": diag.effective_sample_estimate,
            "seconds": time.perf_counter() - t0,
        },
    )


def pc_score_moments(ws: WeightedSequence, axes: CommonAxes) -> tuple[np.ndarray, np.ndarray]:
    """Reweighted mean and covariance of the PC scores of one sequence."""
    return weighted_moments(pc_project(axes, ws.points), ws.ratios)


def run_experiment(cfg: ExperimentConfig, keep_results: bool = True) -> RunManifest:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(config=config_echo(cfg), mode=cfg.mode.value)
    manifest_path = out / "manifest.json"
    t_start = time.perf_counter()

    def record(path: Path) -> None:
        manifest.outputs.append(path.name)

    try:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(sample_system, spec, scfg, cfg) for spec, scfg in cfg.systems]
            results = [f.result() for f in futures]
        manifest.timings["sampling_seconds"] = time.perf_counter() - t_start

        for r in results:
            label = r.spec.label
            manifest.seeds[label] = r.sampler.seed
            manifest.acceptance_rates[label] = r.trajectory.acceptance_rate
            ess = effective_sample_size(r.weights)
            manifest.effective_sample_sizes[label] = ess
            if ess < ESS_WARN_FRACTION * r.weights.n_steps:
                msg = f"{label}: weight ESS {ess:.1f} below {ESS_WARN_FRACTION:.0%} of {r.weights.n_steps} points"
                logger.warning(msg)
                manifest.warnings.append(msg)
            manifest.summary.setdefault("systems", {})[label] = {
                "step_size_x": r.sampler.step_size_x,
                "step_size_p": r.sampler.step_size_p,
                **r.diagnostics,
            }
            record(io.write_trajectory(r.trajectory, out / f"{label}.traj"))
            record(io.write_weights(r.weights, out / f"{label}.weights"))

        t_axes = time.perf_counter()
        if cfg.mode is Mode.INDIVIDUAL_PCA:
            for r in results:
                stats = composed_stats([r.weights])
                r.axes = build_axes(stats, cfg.l, centered=cfg.center_pc_scores)
                record(io.write_axes(r.axes, out / f"axes_{r.spec.label}.txt"))
        else:
            stats = composed_stats([r.weights for r in results], cfg.fractions)
            axes = build_axes(stats, cfg.l, centered=cfg.center_pc_scores)
            for r in results:
                r.axes = axes
            record(io.write_axes(axes, out / "axes.txt"))
            manifest.summary["composed_covariance"] = stats.covariance
            manifest.summary["fractions"] = stats.per_system_fractions
        manifest.timings["axes_seconds"] = time.perf_counter() - t_axes

        _histograms(cfg, results, manifest, out, record)
        if cfg.marginal.enabled:
            _marginals(cfg, results, manifest, out, record)

        record(io.emit_scatter(
            [(r.spec.label, r.weights.points) for r in results], out / "scatter.csv"
        ))
        if cfg.figures:
            from .plotting import render_run

            for path in render_run(results, out):
                record(path)
        manifest.status = "ok"
    except Exception as exc:
        manifest.status = "failed"
        manifest.error = f"{type(exc).__name__}: {exc}"
        raise
    finally:
        manifest.timings["total_seconds"] = time.perf_counter() - t_start
        manifest.outputs.append(manifest_path.name)
        io.write_json(manifest.to_dict(), manifest_path)
    if keep_results:
        manifest.results = {r.spec.label: r for r in results}
    return manifest


def _histograms(cfg, results, manifest, out, record) -> None:
    scores = {r.spec.label: pc_project(r.axes, r.weights.points) for r in results}
    if cfg.grid.lo is not None:
        shared = PCGrid(cfg.grid.lo, cfg.grid.hi, cfg.grid.bins)
    elif cfg.mode is not Mode.INDIVIDUAL_PCA:
        shared = grid_from_data(np.vstack(list(scores.values())), cfg.grid.bins, cfg.grid.padding)
    else:
        shared = None
    for r in results:
        label = r.spec.label
        grid = shared or grid_from_data(scores[label], cfg.grid.bins, cfg.grid.padding)
        r.histogram = induced_histogram(r.weights, r.axes, grid)
        pc_labels = [f"pc{k + 1}" for k in range(cfg.l)]
        record(io.write_histogram(r.histogram, out / f"hist_{label}.csv", pc_labels))
        _, cov = pc_score_moments(r.weights, r.axes)
        manifest.summary["systems"][label].update(
            eigenvalues=r.axes.eigenvalues,
            eigenvectors=r.axes.eigenvectors,
            pc_score_variances=np.diag(cov),
            histogram_out_of_range_mass=r.histogram.out_of_range_mass,
        )


def _marginals(cfg, results, manifest, out, record) -> None:
    i, j = (c - 1 for c in cfg.marginal.coords)
    names = [f"x{i + 1}", f"x{j + 1}"]
    for r in results:
        label = r.spec.label
        grid = _marginal_grid(r.spec, cfg)
        raw = WeightedSequence(
            label, r.trajectory.x[:, [i, j]], r.weights.weights, r.weights.n_steps, r.weights.ratios
        )
        r.marginal = reweighted_marginal(raw, (0, 1), grid)
        r.exact_marginal = exact_marginal_quadrature(
            r.spec, (i, j), grid, cfg.marginal.quad_points_per_dim
        )
        mean_err, max_err = marginal_error(r.marginal, r.exact_marginal)
        manifest.summary["systems"][label].update(
            marginal_mean_abs_error=mean_err, marginal_max_abs_error=max_err
        )
        record(io.write_histogram(r.marginal, out / f"marginal_{label}.csv", names))
        record(io.write_histogram(r.exact_marginal, out / f"exact_marginal_{label}.csv", names))
