"""Matplotlib renderings of run outputs.

Only the report path imports this module; the numeric pipeline never
needs matplotlib.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

COLORS = ("tab:blue", "tab:red", "tab:green", "tab:orange")

plt.rcParams.update(
    {
        "font.size": 9,
        "axes.labelsize": 9,
        "axes.titlesize": 9,
        "xtick.labelsize": 8,
        "ytick.labelsize": 8,
        "savefig.dpi": 150,
        "image.cmap": "viridis",
    }
)


def _hist_panel(ax, hist, title, xlabel="PC1", ylabel="PC2"):
    g = hist.grid
    masses = np.ma.masked_equal(hist.masses.T, 0.0)
    mesh = ax.pcolormesh(g.edges(0), g.edges(1), masses, shading="flat")
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    return mesh


def _thin(points, max_points=20000):
    stride = max(1, len(points) // max_points)
    return points[::stride]


def plot_scatter(named_points, path, title="projected samples"):
    fig = plt.figure(figsize=(4.5, 4))
    m = named_points[0][1].shape[1]
    if m >= 3:
        ax = fig.add_subplot(projection="3d")
    else:
        ax = fig.add_subplot()
    for (label, pts), color in zip(named_points, COLORS):
        pts = _thin(pts)
        cols = [pts[:, k] for k in range(min(m, 3))]
        ax.scatter(*cols, s=0.5, alpha=0.3, color=color, label=label)
    ax.set_title(title)
    ax.legend(markerscale=10, loc="upper left", fontsize=7)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return Path(path)


def plot_histogram(hist, path, title, xlabel="PC1", ylabel="PC2"):
    fig, ax = plt.subplots(figsize=(4, 3.4))
    mesh = _hist_panel(ax, hist, title, xlabel, ylabel)
    fig.colorbar(mesh, ax=ax, label="probability mass")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return Path(path)


def plot_marginal_comparison(estimate, exact, path, title, names=("x1", "x2")):
    fig, axes = plt.subplots(1, 3, figsize=(10, 3.2))
    vmax = max(estimate.masses.max(), exact.masses.max())
    for ax, hist, sub in zip(axes[:2], (estimate, exact), ("reweighted", "quadrature")):
        mesh = _hist_panel(ax, hist, f"{title}: {sub}", *names)
        mesh.set_clim(0, vmax)
    g = estimate.grid
    ax = axes[2]
    delta = (estimate.masses - exact.masses).T
    lim = np.abs(delta).max() or 1.0
    mesh = ax.pcolormesh(g.edges(0), g.edges(1), delta, cmap="RdBu_r", vmin=-lim, vmax=lim, shading="flat")
    ax.set_title("difference")
    ax.set_xlabel(names[0])
    fig.colorbar(mesh, ax=ax)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return Path(path)


def render_run(results, out) -> list[Path]:
    """Figures for one pipeline run; returns the written paths."""
    out = Path(out)
    paths = [plot_scatter([(r.spec.label, r.weights.points) for r in results], out / "scatter.png")]
    for r in results:
        label = r.spec.label
        if r.histogram is not None and r.histogram.grid.ndim == 2:
            paths.append(plot_histogram(r.histogram, out / f"hist_{label}.png", label))
        if r.marginal is not None:
            paths.append(
                plot_marginal_comparison(r.marginal, r.exact_marginal, out / f"marginal_{label}.png", label)
            )
    return paths


def plot_fig1(common, individual, canonical, path) -> Path:
    """Seven-panel overview: scatter, common axes, individual PCA, canonical baseline.

    Each argument maps system label to its pipeline result.
    """
    labels = list(common)
    fig = plt.figure(figsize=(13, 6.2))
    grid = fig.add_gridspec(2, 4)
    ax = fig.add_subplot(grid[:, 0], projection="3d")
    for label, color in zip(labels, COLORS):
        pts = _thin(common[label].weights.points)
        ax.scatter(pts[:, 0], pts[:, 1], pts[:, 2], s=0.4, alpha=0.3, color=color, label=label)
    ax.set_title("(a) projected samples")
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_zlabel("x3")
    ax.legend(markerscale=10, fontsize=7)
    panels = [
        ("b", "c", common, "common axes"),
        ("d", "e", individual, "individual PCA"),
        ("f", "g", canonical, "canonical sampling"),
    ]
    for col, (k1, k2, runs, name) in enumerate(panels, start=1):
        for row, (key, label) in enumerate(zip((k1, k2), labels)):
            sub = fig.add_subplot(grid[row, col])
            _hist_panel(sub, runs[label].histogram, f"({key}) {label}, {name}")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return Path(path)
