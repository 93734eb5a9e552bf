import numpy as np
import pytest

from commonpc import io
from commonpc.errors import InputError
from commonpc.induced import PCGrid, weighted_histogram
from commonpc.pca import build_axes, composed_stats
from commonpc.reweight import WeightedSequence, compute_weights
from commonpc.sampler import SamplerConfig, Target, metropolis_sample


def test_trajectory_round_trip(system1, tmp_path):
    traj = metropolis_sample(system1, SamplerConfig(n_steps=300, burn_in=0, seed=4))
    back = io.read_trajectory(io.write_trajectory(traj, tmp_path / "t.traj"))
    assert np.array_equal(back.x, traj.x) and np.array_equal(back.p, traj.p)
    assert (back.spec_label, back.seed, back.target, back.m) == ("system1", 4, Target.DELOCALIZED, 3)
    assert back.acceptance_rate == traj.acceptance_rate


def test_trajectory_file_layout(system1, tmp_path):
    traj = metropolis_sample(system1, SamplerConfig(n_steps=3, burn_in=0, seed=4))
    lines = io.write_trajectory(traj, tmp_path / "t.traj").read_text().splitlines()
    assert lines[0] == "# system1 4 3 4 DELOCALIZED"
    rows = [ln for ln in lines if not ln.startswith("#")]
    assert len(rows) == 3
    assert [r.split()[0] for r in rows] == ["1", "2", "3"]
    assert all(len(r.split()) == 9 for r in rows)


def test_weights_round_trip(system1, tmp_path):
    traj = metropolis_sample(system1, SamplerConfig(n_steps=500, burn_in=0, seed=4))
    ws = compute_weights(system1, traj)
    back = io.read_weights(io.write_weights(ws, tmp_path / "w.weights"))
    assert np.array_equal(back.weights, ws.weights)
    assert np.array_equal(back.points, ws.points)
    assert back.label == ws.label and back.n_steps == ws.n_steps


def test_axes_round_trip(rng, tmp_path):
    pts = rng.normal(size=(50, 3))
    axes = build_axes(composed_stats([WeightedSequence("s", pts, np.full(50, 0.02), 50)]), 2, centered=False)
    back = io.read_axes(io.write_axes(axes, tmp_path / "axes.txt"))
    assert np.array_equal(back.eigenvalues, axes.eigenvalues)
    assert np.array_equal(back.eigenvectors, axes.eigenvectors)
    assert np.array_equal(back.mean, axes.mean)
    assert back.centered is False


def test_histogram_round_trip(rng, tmp_path):
    pts = rng.normal(size=(300, 2))
    h = weighted_histogram(pts, rng.dirichlet(np.ones(300)), PCGrid((-2, -2), (2, 2), (7, 5)))
    back = io.read_histogram(io.write_histogram(h, tmp_path / "h.csv", ["pc1", "pc2"]))
    assert back.grid == h.grid
    assert np.array_equal(back.masses, h.masses)
    assert back.out_of_range_mass == h.out_of_range_mass
    header = [ln for ln in (tmp_path / "h.csv").read_text().splitlines() if not ln.startswith("#")][0]
    assert header == "bin_i,bin_j,pc1,pc2,mass,neg_log_mass"


def test_scatter_two_points(tmp_path):
    path = io.emit_scatter([("a", np.array([[1.0, 2.0]])), ("b", np.array([[3.0, 4.0]]))], tmp_path / "s.csv")
    lines = path.read_text().splitlines()
    assert len(lines) == 3
    labels = [name for name, _ in io.read_scatter(path)]
    assert labels == ["a", "b"]


def test_scatter_thinning(tmp_path):
    pts = np.arange(2 * 10**6, dtype=float).reshape(10**6, 2)
    path = io.emit_scatter([("big", pts)], tmp_path / "s.csv")
    (name, back), = io.read_scatter(path)
    assert name == "big"
    assert len(back) <= 50_000
    steps = np.diff(back[:, 0]) / 2
    assert np.all(steps == steps[0])


def test_unreadable_header(tmp_path):
    bad = tmp_path / "bad.traj"
    bad.write_text("garbage\n")
    with pytest.raises(InputError):
        io.read_trajectory(bad)
