"""Fast invariant suite behind ``commonpc check``."""

from __future__ import annotations

import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io
from .config import bundled_config, parse_config
from .induced import PCGrid, coarsen, weighted_histogram
from .model import log_mixture_density, potential_energy, potential_gradient
from .pca import composed_covariance, composed_mean, single_sequence_stats, symmetric_eigen
from .reweight import WeightedSequence
from .sampler import metropolis_sample


def _fig1_specs():
    return [spec for spec, _ in parse_config(bundled_config("fig1.cfg")).systems]


def check_gradient(rng):
    worst = 0.0
    h = 1e-5
    for spec in _fig1_specs():
        b = spec.potential.length_scales()
        for _ in range(100):
            x = spec.potential.centers + rng.uniform(-1.5, 1.5, spec.n) * b
            g = potential_gradient(spec, x)
            fd = np.empty(spec.n)
            for i in range(spec.n):
                e = np.zeros(spec.n)
                e[i] = h
                fd[i] = (potential_energy(spec, x + e) - potential_energy(spec, x - e)) / (2 * e[i])
            worst = max(worst, np.max(np.abs(g - fd) / np.maximum(np.abs(g), 1.0)))
    return worst < 1e-5, f"max relative error {worst:.2e}"


def check_mixture_density(rng):
    e = np.sort(rng.uniform(0, 200, 1000))
    lr = log_mixture_density(e, 0.2, 1.0)
    monotone = bool(np.all(np.diff(lr) <= 0))
    bounded = bool(np.all((lr <= -0.2 * e + 1e-12) & (lr >= -1.0 * e - 1e-12)))
    return monotone and bounded, f"monotone={monotone} bounded={bounded}"


def check_eigen(rng):
    worst = 0.0
    for _ in range(200):
        m = int(rng.integers(1, 11))
        a = rng.normal(size=(m, m))
        a = a + a.T
        lam, u = symmetric_eigen(a)
        res = np.max(np.abs(a @ u.T - u.T * lam)) / max(1.0, abs(lam[0]))
        orth = np.max(np.abs(u @ u.T - np.eye(m)))
        worst = max(worst, res / 1e-8, orth / 1e-10)
    return worst < 1.0, f"worst normalized residual {worst:.2e}"


def check_composition(rng):
    worst = 0.0
    for _ in range(100):
        m = int(rng.integers(1, 5))
        a = rng.normal(size=(int(rng.integers(1, 50)), m))
        b = rng.normal(3.0, 2.0, size=(int(rng.integers(1, 50)), m))
        seqs = [WeightedSequence("a", a, np.full(len(a), 1 / len(a)), len(a)),
                WeightedSequence("b", b, np.full(len(b), 1 / len(b)), len(b))]
        mean = composed_mean(seqs)
        cov = composed_covariance(seqs, mean)
        ref_mean, ref_cov = single_sequence_stats(np.vstack([a, b]))
        worst = max(worst, np.max(np.abs(mean - ref_mean)), np.max(np.abs(cov - ref_cov)))
    return worst < 1e-12, f"max deviation {worst:.2e}"


def check_histogram(rng):
    pts = rng.normal(size=(5000, 2))
    w = rng.random(5000)
    w /= w.sum()
    grid = PCGrid((-2.5, -2.5), (2.5, 2.5), (20, 20))
    coarse = weighted_histogram(pts, w, grid)
    merged = coarsen(weighted_histogram(pts, w, grid.refined()))
    cons = abs(coarse.total() - 1.0)
    add = np.max(np.abs(merged.masses - coarse.masses))
    return cons < 1e-10 and add == 0.0, f"mass error {cons:.1e}, refinement {add:.1e}"


def check_roundtrip(rng):
    spec, scfg = parse_config(bundled_config("fig1.cfg")).systems[0]
    traj = metropolis_sample(spec, replace(scfg, n_steps=500, burn_in=0))
    with tempfile.TemporaryDirectory() as tmp:
        back = io.read_trajectory(io.write_trajectory(traj, Path(tmp) / "t.traj"))
    ok = np.array_equal(back.x, traj.x) and np.array_equal(back.p, traj.p)
    return ok, "bit-exact" if ok else "mismatch"


CHECKS = [
    ("gradient matches finite differences", check_gradient),
    ("delocalized density monotone and bounded", check_mixture_density),
    ("Jacobi eigenpairs residual/orthonormality", check_eigen),
    ("composition identity", check_composition),
    ("histogram mass conservation and refinement", check_histogram),
    ("trajectory text round-trip", check_roundtrip),
]


def run_checks(seed: int = 0, echo=print) -> bool:
    rng = np.random.default_rng(seed)
    all_ok = True
    for name, fn in CHECKS:
        ok, detail = fn(rng)
        all_ok &= bool(ok)
        echo(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return all_ok
