"""Text formats for trajectories, weights, axes, histograms and scatter data.

Floats are written with 17 significant digits, which round-trips IEEE
doubles exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import InputError
from .induced import PCGrid, PCHistogram
from .pca import CommonAxes
from .reweight import WeightedSequence
from .sampler import Target, Trajectory

FMT = "%.17g"


def _fmt_row(values) -> str:
    return " ".join(FMT % v for v in values)


def _write_table(fh, index: np.ndarray, table: np.ndarray) -> None:
    buf = io.StringIO()
    np.savetxt(buf, np.column_stack([index, table]), fmt=["%d"] + [FMT] * table.shape[1])
    fh.write(buf.getvalue())


def _read_table(lines: list[str]) -> np.ndarray:
    data = np.loadtxt(io.StringIO("".join(lines)), dtype=float, ndmin=2)
    return data


def write_trajectory(traj: Trajectory, path) -> Path:
    path = Path(path)
    if " " in traj.spec_label:
        raise InputError("labels may not contain spaces")
    with open(path, "w") as fh:
        fh.write(f"# {traj.spec_label} {traj.n} {traj.m} {traj.seed} {traj.target.value}\n")
        fh.write(f"# acceptance_rate {FMT % traj.acceptance_rate}\n")
        _write_table(fh, np.arange(1, len(traj) + 1), np.hstack([traj.x, traj.p]))
    return path


def read_trajectory(path) -> Trajectory:
    with open(path) as fh:
        lines = fh.readlines()
    head = lines[0].split()
    if len(head) != 6 or head[0] != "#":
        raise InputError(f"{path}: malformed trajectory header")
    label, n, m, seed, target = head[1], int(head[2]), int(head[3]), int(head[4]), Target(head[5])
    acc = float("nan")
    body = []
    for line in lines[1:]:
        if line.startswith("# acceptance_rate"):
            acc = float(line.split()[2])
        elif not line.startswith("#"):
            body.append(line)
    data = _read_table(body) if body else np.empty((0, 1 + 2 * n))
    if data.shape[1] != 1 + 2 * n:
        raise InputError(f"{path}: expected {1 + 2 * n} columns, got {data.shape[1]}")
    return Trajectory(
        spec_label=label,
        x=data[:, 1 : 1 + n].copy(),
        p=data[:, 1 + n :].copy(),
        target=target,
        acceptance_rate=acc,
        seed=seed,
        m=m,
    )


def write_weights(ws: WeightedSequence, path) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        fh.write(f"# {ws.label} {ws.m} {ws.n_steps}\n")
        _write_table(fh, np.arange(1, ws.n_steps + 1), np.column_stack([ws.weights, ws.points]))
    return path


def read_weights(path) -> WeightedSequence:
    with open(path) as fh:
        lines = fh.readlines()
    head = lines[0].split()
    label, m, n_steps = head[1], int(head[2]), int(head[3])
    data = _read_table([ln for ln in lines[1:] if not ln.startswith("#")])
    if data.shape != (n_steps, 2 + m):
        raise InputError(f"{path}: expected {n_steps}x{2 + m} table, got {data.shape}")
    return WeightedSequence(label, data[:, 2:].copy(), data[:, 1].copy(), n_steps)


def write_axes(axes: CommonAxes, path) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        fh.write(f"# l={axes.l} m={axes.m} centered={int(axes.centered)}\n")
        fh.write(_fmt_row(axes.eigenvalues) + "\n")
        for u in axes.eigenvectors:
            fh.write(_fmt_row(u) + "\n")
        fh.write(_fmt_row(axes.mean) + "\n")
    return path


def read_axes(path) -> CommonAxes:
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    meta = dict(item.split("=") for item in lines[0].lstrip("# ").split())
    l, m = int(meta["l"]), int(meta["m"])
    rows = [np.array([float(v) for v in ln.split()]) for ln in lines[1:]]
    if len(rows) != l + 2:
        raise InputError(f"{path}: expected {l + 2} data lines, got {len(rows)}")
    return CommonAxes(
        eigenvalues=rows[0],
        eigenvectors=np.vstack(rows[1 : 1 + l]).reshape(l, m),
        mean=rows[-1],
        centered=bool(int(meta.get("centered", 1))),
    )


def write_histogram(hist: PCHistogram, path, labels=None) -> Path:
    """CSV with ``#`` metadata lines, then one row per bin."""
    path = Path(path)
    g = hist.grid
    k = g.ndim
    if labels is None:
        labels = [f"center_{a + 1}" for a in range(k)]
    bin_cols = ["bin_i", "bin_j"] if k == 2 else [f"bin_{a + 1}" for a in range(k)]
    with open(path, "w", newline="") as fh:
        fh.write("# lo=" + ",".join(FMT % v for v in g.lo) + "\n")
        fh.write("# hi=" + ",".join(FMT % v for v in g.hi) + "\n")
        fh.write("# bins=" + ",".join(str(b) for b in g.bins) + "\n")
        fh.write(f"# out_of_range_mass={FMT % hist.out_of_range_mass}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(bin_cols + list(labels) + ["mass", "neg_log_mass"])
        centers = [g.centers(a) for a in range(k)]
        for idx in np.ndindex(*g.bins):
            mass = hist.masses[idx]
            nlm = FMT % -math.log(mass) if mass > 0 else "inf"
            w.writerow(
                [*idx, *(FMT % centers[a][idx[a]] for a in range(k)), FMT % mass, nlm]
            )
    return path


def read_histogram(path) -> PCHistogram:
    meta = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                key, value = line[1:].strip().split("=", 1)
                meta[key] = value
            else:
                rows.append(line)
    lo = [float(v) for v in meta["lo"].split(",")]
    hi = [float(v) for v in meta["hi"].split(",")]
    bins = [int(v) for v in meta["bins"].split(",")]
    grid = PCGrid(tuple(lo), tuple(hi), tuple(bins))
    reader = csv.DictReader(rows)
    masses = np.zeros(grid.bins)
    k = grid.ndim
    bin_cols = ["bin_i", "bin_j"] if k == 2 else [f"bin_{a + 1}" for a in range(k)]
    for rec in reader:
        masses[tuple(int(rec[c]) for c in bin_cols)] = float(rec["mass"])
    return PCHistogram(grid, masses, float(meta["out_of_range_mass"]))


def emit_scatter(named_points, path, max_rows: int = 50_000) -> Path:
    """Write projected points tagged by label, thinned by a common stride.

    ``named_points`` is a sequence of ``(label, points)`` pairs.  The stride
    is the smallest that keeps the total row count at or below ``max_rows``.
    """
    path = Path(path)
    named_points = [(label, np.atleast_2d(np.asarray(pts, dtype=float))) for label, pts in named_points]
    total = sum(len(p) for _, p in named_points)
    stride = max(1, math.ceil(total / max_rows))
    while sum(math.ceil(len(p) / stride) for _, p in named_points) > max_rows:
        stride += 1
    m = named_points[0][1].shape[1] if named_points else 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label"] + [f"z{a + 1}" for a in range(m)])
        for label, pts in named_points:
            for row in pts[::stride]:
                w.writerow([label, *(FMT % v for v in row)])
    return path


def read_scatter(path) -> list[tuple[str, np.ndarray]]:
    out: dict[str, list] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            out.setdefault(row[0], []).append([float(v) for v in row[1:]])
    return [(k, np.array(v)) for k, v in out.items()]


def write_json(obj, path) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=False, default=_json_default)
        fh.write("\n")
    return path


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")
