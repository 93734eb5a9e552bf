"""Reweighting a delocalized chain back to its Boltzmann-Gibbs target."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateWeightsError, InputError
from .model import SystemSpec, log_weight_ratios
from .sampler import Target, Trajectory

logger = logging.getLogger(__name__)


@dataclass
class WeightedSequence:
    """Projected points with normalized weights.

    ``ratios`` are the unnormalized density ratios rescaled so their maximum
    is 1; ``weights == ratios / ratios.sum()``.  Estimators divide by the
    ratio sum instead of multiplying by the pre-divided weights, so uniform
    ratios reproduce a plain chain mean bit-for-bit.
    """

    label: str
    points: np.ndarray
    weights: np.ndarray
    n_steps: int
    ratios: np.ndarray | None = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim == 1:
            self.points = self.points[:, None]
        self.weights = np.asarray(self.weights, dtype=float)
        if self.ratios is None:
            self.ratios = self.weights
        if not (len(self.points) == len(self.weights) == len(self.ratios) == self.n_steps):
            raise InputError("points, weights and n_steps disagree in length")
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1.0) > 1e-12:
            raise InputError("weights must be nonnegative and sum to 1")

    @property
    def m(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n_steps


def normalize_log_ratios(log_ratios) -> tuple[np.ndarray, np.ndarray]:
    """Log-sum-exp normalization. Returns (weights, ratios scaled to max 1)."""
    lr = np.asarray(log_ratios, dtype=float)
    top = lr.max() if lr.size else -np.inf
    if not np.isfinite(top):
        raise DegenerateWeightsError("all log weight ratios are -inf (or nonfinite)")
    ratios = np.exp(lr - top)
    return ratios / ratios.sum(), ratios


def project_trajectory(spec: SystemSpec, traj: Trajectory) -> np.ndarray:
    if traj.n != spec.n:
        raise InputError(f"trajectory has {traj.n} coordinates, spec has {spec.n}")
    return traj.x[:, spec.proj_idx]


def compute_weights(spec: SystemSpec, traj: Trajectory) -> WeightedSequence:
    """Weights proportional to rho_BG(beta_target) / rho_R along the chain.

    A CANONICAL chain already samples rho_BG at beta_target, so its weights
    are uniform.
    """
    if traj.target is Target.CANONICAL:
        log_ratios = np.zeros(len(traj))
    else:
        log_ratios = log_weight_ratios(spec, traj.x, traj.p)
    weights, ratios = normalize_log_ratios(log_ratios)
    return WeightedSequence(
        label=traj.spec_label,
        points=project_trajectory(spec, traj),
        weights=weights,
        n_steps=len(traj),
        ratios=ratios,
    )


def reweighted_expectation(ws: WeightedSequence, values) -> float:
    values = np.asarray(values, dtype=float)
    if values.shape != (ws.n_steps,):
        raise InputError(f"expected {ws.n_steps} values, got shape {values.shape}")
    return float(np.sum(ws.ratios * values) / np.sum(ws.ratios))


def weighted_mean(ws: WeightedSequence) -> np.ndarray:
    # same reduction order as points.mean(axis=0)
    return np.sum(ws.ratios[:, None] * ws.points, axis=0) / np.sum(ws.ratios)


def effective_sample_size(ws: WeightedSequence) -> float:
    return float(1.0 / np.sum(ws.weights**2))


def block_bootstrap_se(
    ws: WeightedSequence,
    statistic,
    n_blocks: int = 50,
    n_boot: int = 400,
    seed: int = 0,
) -> np.ndarray:
    """Standard error of a weighted statistic by moving-block resampling.

    ``statistic(points, ratios)`` is evaluated on resampled sequences built
    from ``n_blocks`` contiguous, non-overlapping blocks of the chain drawn
    with replacement.  Blocks keep the chain's autocorrelation intact.
    """
    n = ws.n_steps
    size = n // n_blocks
    if size < 1:
        raise InputError("fewer points than blocks")
    rng = np.random.default_rng(seed)
    starts = np.arange(n_blocks) * size
    offsets = np.arange(size)
    reps = []
    for _ in range(n_boot):
        pick = starts[rng.integers(0, n_blocks, n_blocks)]
        idx = (pick[:, None] + offsets).ravel()
        reps.append(np.asarray(statistic(ws.points[idx], ws.ratios[idx]), dtype=float))
    return np.std(np.array(reps), axis=0, ddof=1)


def weighted_moments(points: np.ndarray, ratios: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Weighted mean and covariance (1/sum(w) normalization)."""
    total = np.sum(ratios)
    mean = (ratios @ points) / total
    centered = points - mean
    cov = (centered * ratios[:, None]).T @ centered / total
    return mean, cov
