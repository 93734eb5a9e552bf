import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from commonpc.errors import ConvergenceError, InputError
from commonpc.pca import (
    CommonAxes,
    ComposedStats,
    build_axes,
    composed_covariance,
    composed_mean,
    composed_stats,
    pc_project,
    single_sequence_stats,
    symmetric_eigen,
)
from commonpc.reweight import WeightedSequence


def uniform(points, label="s"):
    points = np.asarray(points, dtype=float)
    return WeightedSequence(label, points, np.full(len(points), 1 / len(points)), len(points))


def weighted(points, weights):
    points = np.asarray(points, dtype=float)
    return WeightedSequence("w", points, np.asarray(weights, dtype=float), len(points))


point_sets = st.integers(1, 4).flatmap(
    lambda m: st.tuples(
        arrays(np.float64, st.tuples(st.integers(1, 40), st.just(m)), elements=st.floats(-100, 100)),
        arrays(np.float64, st.tuples(st.integers(1, 40), st.just(m)), elements=st.floats(-100, 100)),
    )
)


def test_composed_mean_examples(rng):
    pts = rng.normal(size=(30, 3))
    assert np.allclose(composed_mean([uniform(pts)]), pts.mean(axis=0), atol=1e-14)
    assert np.array_equal(composed_mean([uniform([[1.0, 0.0]]), uniform([[0.0, 1.0]])]), [0.5, 0.5])
    got = composed_mean([uniform([[0.0, 0.0], [2.0, 0.0]]), weighted([[0.0, 3.0]], [1.0])])
    assert got == pytest.approx([2 / 3, 1.0], abs=1e-15)


def test_composed_covariance_examples():
    same = uniform(np.ones((5, 2)) * 3.0)
    assert np.array_equal(composed_covariance([same], composed_mean([same])), np.zeros((2, 2)))
    seqs = [uniform([[1.0, 0.0]]), uniform([[-1.0, 0.0]])]
    assert np.array_equal(composed_covariance(seqs, composed_mean(seqs)), [[1.0, 0.0], [0.0, 0.0]])


def test_composition_errors():
    a = uniform(np.zeros((3, 2)))
    b = uniform(np.zeros((3, 3)))
    with pytest.raises(InputError):
        composed_mean([a, b])
    with pytest.raises(InputError, match="fractions must sum to 1"):
        composed_mean([a, uniform(np.ones((2, 2)))], fractions=[0.3, 0.3])
    with pytest.raises(InputError):
        composed_mean([])


@settings(max_examples=100, deadline=None)
@given(point_sets)
def test_composition_identity(pair):
    a, b = pair
    seqs = [uniform(a, "a"), uniform(b, "b")]
    mean = composed_mean(seqs)
    cov = composed_covariance(seqs, mean)
    ref_mean, ref_cov = single_sequence_stats(np.vstack([a, b]))
    scale = max(1.0, np.abs(np.vstack([a, b])).max()) ** 2
    assert np.max(np.abs(mean - ref_mean)) <= 1e-12 * math.sqrt(scale)
    assert np.max(np.abs(cov - ref_cov)) <= 1e-12 * scale


def test_composition_identity_equal_fractions(rng):
    a = rng.normal(size=(25, 3))
    b = rng.normal(2.0, 1.5, size=(25, 3))
    seqs = [uniform(a), uniform(b)]
    mean = composed_mean(seqs, [0.5, 0.5])
    ref_mean, ref_cov = single_sequence_stats(np.vstack([a, b]))
    assert np.max(np.abs(composed_covariance(seqs, mean, [0.5, 0.5]) - ref_cov)) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(point_sets)
def test_composition_is_permutation_invariant(pair):
    a, b = pair
    s1 = composed_stats([uniform(a), uniform(b)])
    s2 = composed_stats([uniform(b), uniform(a)])
    scale = max(1.0, np.abs(np.vstack([a, b])).max()) ** 2
    assert np.max(np.abs(s1.mean - s2.mean)) <= 1e-12 * math.sqrt(scale)
    assert np.max(np.abs(s1.covariance - s2.covariance)) <= 1e-12 * scale


def test_covariance_is_symmetric_and_psd(rng):
    seqs = [weighted(rng.normal(size=(50, 4)), rng.dirichlet(np.ones(50))) for _ in range(3)]
    stats = composed_stats(seqs)
    assert np.array_equal(stats.covariance, stats.covariance.T)
    assert np.linalg.eigvalsh(stats.covariance).min() > -1e-12


def test_single_sequence_stats_examples():
    mean, cov = single_sequence_stats([[1.0, 2.0]])
    assert np.array_equal(mean, [1.0, 2.0]) and np.array_equal(cov, np.zeros((2, 2)))
    mean, cov = single_sequence_stats([[0.0, 0.0], [2.0, 0.0]])
    assert np.array_equal(mean, [1.0, 0.0]) and np.array_equal(cov, [[1.0, 0.0], [0.0, 0.0]])
    with pytest.raises(InputError):
        single_sequence_stats(np.zeros((0, 2)))


def test_single_stats_match_one_uniform_sequence(rng):
    pts = rng.normal(size=(40, 3))
    mean, cov = single_sequence_stats(pts)
    ws = uniform(pts)
    assert np.allclose(composed_covariance([ws], composed_mean([ws])), cov, atol=1e-14)


def test_eigen_examples():
    lam, u = symmetric_eigen(np.eye(3))
    assert np.array_equal(lam, np.ones(3))
    lam, u = symmetric_eigen(np.diag([3.0, 1.0]))
    assert np.array_equal(lam, [3.0, 1.0]) and np.array_equal(u[0], [1.0, 0.0])
    lam, u = symmetric_eigen([[2.0, 1.0], [1.0, 2.0]])
    assert lam == pytest.approx([3.0, 1.0], abs=1e-14)
    assert u[0] == pytest.approx([1 / math.sqrt(2)] * 2, abs=1e-14)


def test_eigen_errors():
    with pytest.raises(InputError):
        symmetric_eigen([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(InputError):
        symmetric_eigen(np.ones((2, 3)))
    with pytest.raises(ConvergenceError):
        symmetric_eigen(np.array([[1.0, 0.5, 0.2], [0.5, 2.0, 0.1], [0.2, 0.1, 3.0]]), max_sweeps=1)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 10).flatmap(
    # rounded entries: LAPACK itself loses accuracy on entries near 1e-160
    lambda m: arrays(np.float64, (m, m), elements=st.floats(-1e3, 1e3).map(lambda v: round(v, 6)))
))
def test_eigen_properties(raw):
    a = raw + raw.T
    lam, u = symmetric_eigen(a)
    m = len(a)
    scale = max(1.0, np.abs(a).max())
    assert np.all(np.diff(lam) <= 0)
    assert np.max(np.abs(a @ u.T - u.T * lam)) <= 1e-8 * max(1.0, abs(lam).max(), scale)
    assert np.max(np.abs(u @ u.T - np.eye(m))) <= 1e-10
    assert abs(lam.sum() - np.trace(a)) <= 1e-10 * max(1.0, np.abs(lam).sum())
    # oracle: LAPACK
    assert np.allclose(lam, np.linalg.eigvalsh(a)[::-1], atol=1e-9 * scale)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8).flatmap(lambda m: arrays(np.float64, (m, m), elements=st.floats(-10, 10))))
def test_eigen_sign_convention(raw):
    _, u = symmetric_eigen(raw + raw.T)
    for row in u:
        mag = np.abs(row)
        j = int(np.flatnonzero(mag >= mag.max() - 1e-12)[0])
        assert row[j] > 0


def test_eigen_is_deterministic(rng):
    a = rng.normal(size=(6, 6))
    a = a + a.T
    l1, u1 = symmetric_eigen(a)
    l2, u2 = symmetric_eigen(a.copy())
    assert np.array_equal(l1, l2) and np.array_equal(u1, u2)


def _stats(cov, mean=None):
    cov = np.asarray(cov, dtype=float)
    return ComposedStats(mean=np.zeros(len(cov)) if mean is None else mean, covariance=cov,
                         n_total=1, per_system_fractions=np.ones(1))


def test_build_axes_examples(rng):
    axes = build_axes(_stats(np.diag([3.0, 2.0, 1.0])), 2)
    assert np.array_equal(axes.eigenvectors, [[1, 0, 0], [0, 1, 0]])
    assert np.array_equal(axes.eigenvalues, [3.0, 2.0])
    b = rng.normal(size=(4, 4))
    cov = b @ b.T
    full = build_axes(_stats(cov), 4)
    assert abs(full.eigenvalues.sum() - np.trace(cov)) <= 1e-10 * np.trace(cov)
    with pytest.raises(InputError):
        build_axes(_stats(cov), 5)
    with pytest.raises(InputError):
        build_axes(_stats(cov), 0)


def test_axes_scaling_invariance(rng):
    b = rng.normal(size=(3, 3))
    cov = b @ b.T
    a1 = build_axes(_stats(cov), 3)
    a2 = build_axes(_stats(7.5 * cov), 3)
    assert np.allclose(a2.eigenvalues, 7.5 * a1.eigenvalues, rtol=1e-12)
    assert np.allclose(a1.eigenvectors, a2.eigenvectors, atol=1e-12)


def test_projection_examples(rng):
    axes = CommonAxes(np.array([2.0, 1.0]), np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]), np.zeros(3))
    assert np.array_equal(pc_project(axes, np.array([1.0, 2.0, 3.0])), [2.0, 3.0])
    mean = rng.normal(size=3)
    centered = CommonAxes(axes.eigenvalues, axes.eigenvectors, mean)
    assert np.array_equal(pc_project(centered, mean), [0.0, 0.0])
    with pytest.raises(InputError):
        pc_project(axes, np.ones(4))


def test_projection_is_isometric_on_full_basis(rng):
    b = rng.normal(size=(4, 4))
    axes = build_axes(_stats(b @ b.T, rng.normal(size=4)), 4)
    z = rng.normal(size=(100, 4)) * 5
    assert np.allclose(np.linalg.norm(pc_project(axes, z), axis=1),
                       np.linalg.norm(z - axes.mean, axis=1), atol=1e-12)


def test_uncentered_projection(rng):
    axes = CommonAxes(np.ones(2), np.eye(2), rng.normal(size=2), centered=False)
    z = rng.normal(size=(5, 2))
    assert np.array_equal(pc_project(axes, z), z)
