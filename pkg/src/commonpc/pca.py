"""Composed weighted statistics and the common principal-component map.

Several weighted sequences living in the same R^m are pooled into one mean
and one covariance, each sequence contributing with a fraction (by default
its share of the total number of points).  The eigenvectors of the pooled
covariance give PC axes shared by all the systems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InputError
from .reweight import WeightedSequence


@dataclass
class ComposedStats:
    mean: np.ndarray
    covariance: np.ndarray
    n_total: int
    per_system_fractions: np.ndarray


@dataclass
class CommonAxes:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # shape (l, m); row k is u_k
    mean: np.ndarray
    centered: bool = True

    @property
    def l(self) -> int:
        return len(self.eigenvalues)

    @property
    def m(self) -> int:
        return self.eigenvectors.shape[1]


def _check_sequences(sequences) -> int:
    if not sequences:
        raise InputError("need at least one sequence")
    ms = {ws.m for ws in sequences}
    if len(ms) != 1:
        raise InputError(f"sequences disagree in dimension m: {sorted(ms)}")
    return ms.pop()


def _fractions(sequences, fractions) -> np.ndarray:
    if fractions is None:
        counts = np.array([ws.n_steps for ws in sequences], dtype=float)
        return counts / counts.sum()
    f = np.asarray(fractions, dtype=float)
    if f.shape != (len(sequences),):
        raise InputError(f"expected {len(sequences)} fractions, got {f.size}")
    if np.any(f <= 0):
        raise InputError("fractions must be positive")
    if abs(f.sum() - 1.0) > 1e-12:
        raise InputError("fractions must sum to 1")
    return f


def composed_mean(sequences: list[WeightedSequence], fractions=None) -> np.ndarray:
    _check_sequences(sequences)
    f = _fractions(sequences, fractions)
    # deviations from an anchor point keep identical inputs exact
    anchor = sequences[0].points[0]
    parts = [fs * (ws.ratios @ (ws.points - anchor)) / np.sum(ws.ratios) for fs, ws in zip(f, sequences)]
    return anchor + np.sum(parts, axis=0)


def composed_covariance(sequences: list[WeightedSequence], mean, fractions=None) -> np.ndarray:
    m = _check_sequences(sequences)
    f = _fractions(sequences, fractions)
    mean = np.asarray(mean, dtype=float)
    if mean.shape != (m,):
        raise InputError(f"mean has shape {mean.shape}, expected ({m},)")
    parts = []
    for fs, ws in zip(f, sequences):
        c = ws.points - mean
        parts.append(fs * ((c * ws.ratios[:, None]).T @ c) / np.sum(ws.ratios))
    cov = np.sum(parts, axis=0)
    return np.triu(cov) + np.triu(cov, 1).T


def composed_stats(sequences: list[WeightedSequence], fractions=None) -> ComposedStats:
    mean = composed_mean(sequences, fractions)
    return ComposedStats(
        mean=mean,
        covariance=composed_covariance(sequences, mean, fractions),
        n_total=sum(ws.n_steps for ws in sequences),
        per_system_fractions=_fractions(sequences, fractions),
    )


def single_sequence_stats(points) -> tuple[np.ndarray, np.ndarray]:
    """Unweighted mean and covariance with 1/N normalization."""
    z = np.asarray(points, dtype=float)
    if z.ndim == 1:
        z = z[:, None]
    if z.shape[0] == 0:
        raise InputError("empty point set")
    mean = z[0] + (z - z[0]).mean(axis=0)
    c = z - mean
    cov = c.T @ c / z.shape[0]
    return mean, np.triu(cov) + np.triu(cov, 1).T


def _off_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def symmetric_eigen(matrix, tol: float = 1e-14, max_sweeps: int = 100):
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues descending and
    eigenvectors as rows.  Each eigenvector is signed so its largest-magnitude
    component (lowest index on ties) is positive.
    """
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"expected a square matrix, got shape {a.shape}")
    scale = np.max(np.abs(a)) if a.size else 0.0
    if np.max(np.abs(a - a.T), initial=0.0) > 1e-10 * scale:
        raise InputError("matrix is not symmetric")
    if not np.all(np.isfinite(a)):
        raise InputError("matrix has non-finite entries")
    a = 0.5 * (a + a.T)
    m = a.shape[0]
    v = np.eye(m)
    norm = np.linalg.norm(a)

    for _ in range(max_sweeps):
        if _off_norm(a) <= tol * norm:
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                with np.errstate(over="ignore"):
                    # overflow means apq is negligible; t then rounds to 0
                    theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(1.0, theta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        if _off_norm(a) > tol * norm:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")

    evals = np.diag(a).copy()
    order = np.argsort(-evals, kind="stable")
    evals = evals[order]
    vecs = v[:, order].T.copy()
    for k in range(m):
        mag = np.abs(vecs[k])
        # near-equal magnitudes count as a tie so the choice survives rounding
        j = int(np.flatnonzero(mag >= mag.max() - 1e-12)[0])
        if vecs[k, j] < 0:
            vecs[k] = -vecs[k]
    return evals, vecs


def build_axes(stats: ComposedStats, l: int, centered: bool = True) -> CommonAxes:
    m = stats.covariance.shape[0]
    if not 1 <= l <= m:
        raise InputError(f"l must lie in [1, {m}], got {l}")
    evals, vecs = symmetric_eigen(stats.covariance)
    return CommonAxes(
        eigenvalues=evals[:l],
        eigenvectors=vecs[:l],
        mean=np.array(stats.mean, dtype=float),
        centered=centered,
    )


def pc_project(axes: CommonAxes, points) -> np.ndarray:
    """PC scores of one point (shape (m,)) or many (shape (N, m))."""
    z = np.asarray(points, dtype=float)
    if z.shape[-1:] != (axes.m,):
        raise InputError(f"point dimension {z.shape[-1:]} does not match axes m={axes.m}")
    if axes.centered:
        z = z - axes.mean
    return z @ axes.eigenvectors.T
