"""Command-line interface.

Exit codes: 0 success, 2 configuration/input error, 3 numerical error,
4 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io
from .config import ExperimentConfig, Mode, bundled_config, load_config, parse_config
from .errors import CommonPCError
from .induced import PCGrid, grid_from_data, induced_histogram
from .pca import build_axes, composed_stats, pc_project
from .pipeline import sample_system, run_experiment
from .reweight import compute_weights

logger = logging.getLogger("commonpc")


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if getattr(args, "out", None):
        cfg.output_dir = Path(args.out)
    if getattr(args, "mode", None):
        cfg.mode = Mode(args.mode)
    if getattr(args, "seed", None) is not None:
        cfg.systems = [
            (spec, replace(scfg, seed=args.seed + s)) for s, (spec, scfg) in enumerate(cfg.systems)
        ]
    if getattr(args, "n_steps", None):
        cfg.systems = [
            (spec, replace(scfg, n_steps=args.n_steps, burn_in=args.n_steps // 10))
            for spec, scfg in cfg.systems
        ]
    if getattr(args, "figures", False):
        cfg.figures = True
    return cfg


def _load(args) -> ExperimentConfig:
    return _apply_overrides(load_config(args.config), args)


def cmd_run(args) -> int:
    cfg = _load(args)
    manifest = run_experiment(cfg, keep_results=False)
    print(f"{manifest.status}: {len(manifest.outputs)} files in {cfg.output_dir}")
    for w in manifest.warnings:
        print(f"warning: {w}")
    return 0


def cmd_sample(args) -> int:
    cfg = _load(args)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = {}
    for spec, scfg in cfg.systems:
        r = sample_system(spec, scfg, cfg)
        io.write_trajectory(r.trajectory, out / f"{spec.label}.traj")
        summary[spec.label] = {"seed": r.sampler.seed, **r.diagnostics}
        print(f"{spec.label}: {len(r.trajectory)} points, acceptance {r.trajectory.acceptance_rate:.3f}")
    io.write_json(summary, out / "sample_manifest.json")
    return 0


def cmd_axes(args) -> int:
    cfg = _load(args)
    out = Path(cfg.output_dir)
    seqs = []
    for spec, _ in cfg.systems:
        traj = io.read_trajectory(out / f"{spec.label}.traj")
        ws = compute_weights(spec, traj)
        io.write_weights(ws, out / f"{spec.label}.weights")
        seqs.append(ws)
    if cfg.mode is Mode.INDIVIDUAL_PCA:
        for ws in seqs:
            axes = build_axes(composed_stats([ws]), cfg.l, cfg.center_pc_scores)
            io.write_axes(axes, out / f"axes_{ws.label}.txt")
            print(f"{ws.label}: eigenvalues {np.array2string(axes.eigenvalues, precision=4)}")
    else:
        axes = build_axes(composed_stats(seqs, cfg.fractions), cfg.l, cfg.center_pc_scores)
        io.write_axes(axes, out / "axes.txt")
        print(f"eigenvalues {np.array2string(axes.eigenvalues, precision=4)}")
    return 0


def cmd_hist(args) -> int:
    cfg = _load(args)
    out = Path(cfg.output_dir)
    seqs = [io.read_weights(out / f"{spec.label}.weights") for spec, _ in cfg.systems]
    if cfg.mode is Mode.INDIVIDUAL_PCA:
        axes = {ws.label: io.read_axes(out / f"axes_{ws.label}.txt") for ws in seqs}
    else:
        shared = io.read_axes(out / "axes.txt")
        axes = {ws.label: shared for ws in seqs}
    scores = {ws.label: pc_project(axes[ws.label], ws.points) for ws in seqs}
    if cfg.grid.lo is not None:
        shared_grid = PCGrid(cfg.grid.lo, cfg.grid.hi, cfg.grid.bins)
    elif cfg.mode is not Mode.INDIVIDUAL_PCA:
        shared_grid = grid_from_data(np.vstack(list(scores.values())), cfg.grid.bins, cfg.grid.padding)
    else:
        shared_grid = None
    for ws in seqs:
        grid = shared_grid or grid_from_data(scores[ws.label], cfg.grid.bins, cfg.grid.padding)
        hist = induced_histogram(ws, axes[ws.label], grid)
        io.write_histogram(hist, out / f"hist_{ws.label}.csv", [f"pc{k + 1}" for k in range(cfg.l)])
        print(f"{ws.label}: out-of-range mass {hist.out_of_range_mass:.3g}")
    return 0


def cmd_check(args) -> int:
    from .checks import run_checks

    return 0 if run_checks(seed=args.seed or 0) else 3


def cmd_repro_fig1(args) -> int:
    text = Path(args.config).read_text() if args.config else bundled_config("fig1.cfg")
    base = Path(args.out or "out/fig1")
    runs = {}
    for mode in Mode:
        cfg = _apply_overrides(parse_config(text), argparse.Namespace(
            out=str(base / mode.value), mode=mode.value, seed=args.seed,
            n_steps=args.n_steps, figures=not args.no_figures,
        ))
        manifest = run_experiment(cfg)
        runs[mode] = manifest.results
        print(f"{mode.value}: {manifest.status}, {len(manifest.outputs)} files in {cfg.output_dir}")
        for label, summary in manifest.summary["systems"].items():
            var = np.array2string(np.asarray(summary["pc_score_variances"]), precision=3)
            print(f"  {label}: PC-score variances {var}")
    if not args.no_figures:
        from .plotting import plot_fig1

        path = plot_fig1(
            runs[Mode.COMMON_AXES], runs[Mode.INDIVIDUAL_PCA], runs[Mode.CANONICAL_BASELINE],
            base / "fig1.png",
        )
        print(f"figure: {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="commonpc",
        description="Common principal-component axes from reweighted delocalized sampling.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help, config=True):
        p = sub.add_parser(name, help=help)
        if config:
            p.add_argument("--config", required=True, type=Path, help="experiment config (TOML)")
            p.add_argument("--out", help="output directory (overrides experiment.output_dir)")
            p.add_argument("--mode", choices=[m.value for m in Mode])
        p.add_argument("--seed", type=int, help="base seed; system s uses seed + s")
        p.set_defaults(func=func)
        return p

    p = add("run", cmd_run, "full pipeline")
    p.add_argument("--figures", action="store_true", help="also render PNG figures")
    add("sample", cmd_sample, "sample trajectories only")
    add("axes", cmd_axes, "weights and PC axes from sampled trajectories in --out")
    add("hist", cmd_hist, "PC-plane histograms from weights and axes in --out")
    add("check", cmd_check, "fast invariant suite", config=False)
    p = add("repro-fig1", cmd_repro_fig1, "two-system experiment in all three modes", config=False)
    p.add_argument("--config", type=Path, help="override the bundled fig1.cfg")
    p.add_argument("--out", help="output directory (default out/fig1)")
    p.add_argument("--n-steps", type=int, help="chain length per system (burn-in n/10)")
    p.add_argument("--no-figures", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except CommonPCError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
