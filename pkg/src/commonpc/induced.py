"""Induced distributions on the PC plane and exact quadrature marginals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AccuracyError, InputError
from .model import SystemSpec
from .pca import CommonAxes, pc_project
from .reweight import WeightedSequence

MAX_BINS = 10**7


@dataclass(frozen=True)
class PCGrid:
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    bins: tuple[int, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        bins = tuple(int(v) for v in np.atleast_1d(self.bins))
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "bins", bins)
        if not len(lo) == len(hi) == len(bins):
            raise InputError("grid lo, hi and bins must have equal length")
        if any(not a < b for a, b in zip(lo, hi)):
            raise InputError("grid needs lo < hi on every axis")
        if any(b < 1 for b in bins):
            raise InputError("bin counts must be positive")
        if int(np.prod(bins)) > MAX_BINS:
            raise InputError(f"grid has more than {MAX_BINS} bins")

    @property
    def ndim(self) -> int:
        return len(self.bins)

    def edges(self, axis: int) -> np.ndarray:
        return np.linspace(self.lo[axis], self.hi[axis], self.bins[axis] + 1)

    def centers(self, axis: int) -> np.ndarray:
        e = self.edges(axis)
        return 0.5 * (e[:-1] + e[1:])

    def refined(self, factor: int = 2) -> PCGrid:
        return PCGrid(self.lo, self.hi, tuple(b * factor for b in self.bins))


@dataclass
class PCHistogram:
    grid: PCGrid
    masses: np.ndarray
    out_of_range_mass: float
    # exact fixed-point bin sums (flat index -> int, out-of-range int, exponent)
    exact: tuple[dict, int, int] | None = field(default=None, repr=False, compare=False)

    def total(self) -> float:
        return float(self.masses.sum() + self.out_of_range_mass)


def grid_from_data(scores: np.ndarray, bins, padding: float = 0.1) -> PCGrid:
    """Axis-aligned grid spanning the data range, widened by ``padding`` of the span per side."""
    scores = np.asarray(scores, dtype=float)
    lo = scores.min(axis=0)
    hi = scores.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    return PCGrid(tuple(lo - padding * span), tuple(hi + padding * span), tuple(bins))


def bin_indices(grid: PCGrid, coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Flat bin index per point and an in-range mask.

    Bins are half-open [lo, hi) except the last bin on each axis, which is
    closed.  The fractional position is computed once per point and scaled
    by the bin count, so doubling the bin count subdivides bins exactly.
    """
    coords = np.asarray(coords, dtype=float)
    if coords.ndim == 1:
        coords = coords[:, None]
    if coords.shape[1] != grid.ndim:
        raise InputError(f"points have dimension {coords.shape[1]}, grid has {grid.ndim}")
    lo = np.array(grid.lo)
    hi = np.array(grid.hi)
    bins = np.array(grid.bins)
    inside = np.all((coords >= lo) & (coords <= hi), axis=1)
    u = (coords - lo) / (hi - lo)
    idx = np.floor(u * bins).astype(np.int64)
    idx = np.clip(idx, 0, bins - 1)
    flat = np.ravel_multi_index(tuple(idx.T), grid.bins)
    return flat, inside


def _fixed_point(weights: np.ndarray) -> tuple[list[int], int]:
    """Write each weight as an integer times 2**exponent, with one shared exponent."""
    mant, expo = np.frexp(weights)
    ints = (mant * 2.0**53).astype(np.int64)
    expo = expo.astype(np.int64) - 53
    nonzero = ints != 0
    emin = int(expo[nonzero].min()) if nonzero.any() else 0
    shifts = np.where(nonzero, expo - emin, 0)
    return [int(i) << int(sh) for i, sh in zip(ints.tolist(), shifts.tolist())], emin


def _from_fixed(sums: dict, nbins: int, emin: int) -> np.ndarray:
    masses = np.zeros(nbins)
    for b, total in sums.items():
        masses[b] = math.ldexp(float(total), emin)
    return masses


def weighted_histogram(coords: np.ndarray, weights: np.ndarray, grid: PCGrid) -> PCHistogram:
    """Bin weights by point; bin sums are accumulated exactly.

    Each weight is converted to an integer multiple of a common power of two,
    so every bin total is the correctly rounded exact sum.  Merging bins later
    (:func:`coarsen`) therefore gives bit-identical masses to binning directly
    on the coarser grid.
    """
    weights = np.asarray(weights, dtype=float)
    flat, inside = bin_indices(grid, coords)
    nbins = int(np.prod(grid.bins))
    ints, emin = _fixed_point(weights)
    sums: dict[int, int] = {}
    outside = 0
    for b, ok, w in zip(flat.tolist(), inside.tolist(), ints):
        if not ok:
            outside += w
        elif w:
            sums[b] = sums.get(b, 0) + w
    return PCHistogram(
        grid=grid,
        masses=_from_fixed(sums, nbins, emin).reshape(grid.bins),
        out_of_range_mass=math.ldexp(float(outside), emin),
        exact=(sums, outside, emin),
    )


def induced_histogram(ws: WeightedSequence, axes: CommonAxes, grid: PCGrid) -> PCHistogram:
    if ws.m != axes.m:
        raise InputError(f"sequence dimension {ws.m} does not match axes m={axes.m}")
    if grid.ndim != axes.l:
        raise InputError(f"grid has {grid.ndim} axes, PC space has l={axes.l}")
    return weighted_histogram(pc_project(axes, ws.points), ws.weights, grid)


def reweighted_marginal(ws_full: WeightedSequence, pair: tuple[int, int], grid: PCGrid) -> PCHistogram:
    """Weighted 2-D histogram of two raw columns (0-based) of ``ws_full.points``."""
    i, j = pair
    if not (0 <= i < ws_full.m and 0 <= j < ws_full.m) or i == j:
        raise InputError(f"invalid coordinate pair {pair} for m={ws_full.m}")
    if grid.ndim != 2:
        raise InputError("marginal grid must be 2-D")
    return weighted_histogram(ws_full.points[:, [i, j]], ws_full.weights, grid)


def coarsen(hist: PCHistogram, factor: int = 2) -> PCHistogram:
    """Merge factor^l blocks of bins into one."""
    bins = hist.grid.bins
    if any(b % factor for b in bins):
        raise InputError(f"bin counts {bins} not divisible by {factor}")
    coarse = tuple(b // factor for b in bins)
    grid = PCGrid(hist.grid.lo, hist.grid.hi, coarse)
    if hist.exact is not None:
        sums, outside, emin = hist.exact
        merged: dict[int, int] = {}
        for b, total in sums.items():
            idx = np.unravel_index(b, bins)
            cb = int(np.ravel_multi_index(tuple(i // factor for i in idx), coarse))
            merged[cb] = merged.get(cb, 0) + total
        masses = _from_fixed(merged, int(np.prod(coarse)), emin).reshape(coarse)
        return PCHistogram(grid, masses, hist.out_of_range_mass, (merged, outside, emin))
    shape = []
    for b in coarse:
        shape += [b, factor]
    masses = hist.masses.reshape(shape).sum(axis=tuple(range(1, 2 * len(coarse), 2)))
    return PCHistogram(grid, masses, hist.out_of_range_mass)


def marginal_error(estimate: PCHistogram, exact: PCHistogram) -> tuple[float, float]:
    if estimate.grid != exact.grid:
        raise InputError("histograms are on different grids")
    diff = np.abs(estimate.masses - exact.masses)
    return float(diff.mean()), float(diff.max())


# ---------------------------------------------------------------------------
# quadrature oracle

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def _trapezoid(lo: float, hi: float, q: int) -> tuple[np.ndarray, np.ndarray]:
    z = np.linspace(lo, hi, q)
    w = np.full(q, (hi - lo) / (q - 1))
    w[0] = w[-1] = 0.5 * w[0]
    return z, w


def _bin_nodes(edges: np.ndarray, max_panel: float) -> tuple[np.ndarray, np.ndarray, int]:
    """Composite Gauss-Legendre nodes and weights, bin-major order.

    Every bin is split into the same number of panels, none wider than
    ``max_panel``.  Returns nodes, weights and the node count per bin.
    """
    width = np.diff(edges)
    panels = max(1, int(np.ceil(width.max() / max_panel)))
    t = np.linspace(0.0, 1.0, panels + 1)
    sub = edges[:-1, None] + width[:, None] * t  # (bins, panels + 1)
    half = 0.5 * np.diff(sub, axis=1)
    mid = 0.5 * (sub[:, :-1] + sub[:, 1:])
    z = (mid[..., None] + half[..., None] * _GL_NODES).reshape(len(width), -1)
    w = (half[..., None] * _GL_WEIGHTS).reshape(len(width), -1)
    return z.ravel(), w.ravel(), z.shape[1]


def _contract(spec: SystemSpec, beta: float, nodes, weights, keep) -> np.ndarray:
    """Sum exp(-beta U) * prod(weights) over all nodes, leaving the ``keep`` axes free."""
    pot = spec.potential
    operands = []
    for c in range(spec.n):
        operands += [np.exp(-beta * pot.site_energy(c, nodes[c])) * weights[c], [c]]
    for c in range(spec.n - 1):
        if pot.has_coupling(c):
            operands += [np.exp(-beta * pot.pair_energy(c, nodes[c], nodes[c + 1])), [c, c + 1]]
    return np.einsum(*operands, list(keep), optimize="optimal")


def _box_nodes(spec: SystemSpec, beta: float, q: int):
    nodes, weights = [], []
    for c in range(spec.n):
        z, w = _trapezoid(*spec.potential.quadrature_box(c, beta), q)
        nodes.append(z)
        weights.append(w)
    return nodes, weights


def partition_function(spec: SystemSpec, beta: float, quad_points_per_dim: int) -> float:
    """Configurational integral of exp(-beta U) over the quadrature box.

    Raises :class:`AccuracyError` if refining the trapezoid rule
    (2q - 1 nested points) moves the result by more than 1e-6 relative.
    """
    q = quad_points_per_dim
    z1 = float(_contract(spec, beta, *_box_nodes(spec, beta, q), keep=()))
    z2 = float(_contract(spec, beta, *_box_nodes(spec, beta, 2 * q - 1), keep=()))
    if not (z1 > 0 and abs(z2 - z1) <= 1e-6 * z2):
        raise AccuracyError(
            f"quadrature mass not converged for {spec.label}: {z1!r} vs {z2!r} "
            f"at {q} points per dimension"
        )
    return z2


def exact_marginal_quadrature(
    spec: SystemSpec,
    pair: tuple[int, int],
    grid: PCGrid,
    quad_points_per_dim: int = 401,
    beta: float | None = None,
) -> PCHistogram:
    """Exact Boltzmann-Gibbs bin masses of raw coordinates ``pair`` (0-based).

    The remaining coordinates are integrated by tensor-product trapezoid
    rules on the potential's quadrature box; inside each bin the pair
    coordinates use composite 8-point Gauss-Legendre rules.  Momenta factor out of the
    normalized ratio and are never integrated.
    """
    if spec.n > 6:
        raise InputError("exact quadrature is limited to n <= 6")
    i, j = pair
    if not (0 <= i < spec.n and 0 <= j < spec.n) or i == j:
        raise InputError(f"invalid coordinate pair {pair} for n={spec.n}")
    if grid.ndim != 2:
        raise InputError("marginal grid must be 2-D")
    beta = spec.beta_target if beta is None else beta
    z_total = partition_function(spec, beta, quad_points_per_dim)
    nodes, weights = _box_nodes(spec, beta, quad_points_per_dim)
    per_bin = []
    for axis, c in enumerate((i, j)):
        # panels no wider than twice the trapezoid spacing trusted for the normalization
        spacing = nodes[c][1] - nodes[c][0]
        nodes[c], weights[c], g = _bin_nodes(grid.edges(axis), 2.0 * spacing)
        per_bin.append(g)
    joint = _contract(spec, beta, nodes, weights, keep=(i, j)) / z_total
    masses = joint.reshape(grid.bins[0], per_bin[0], grid.bins[1], per_bin[1]).sum(axis=(1, 3))
    return PCHistogram(grid, masses, max(0.0, 1.0 - float(masses.sum())))


def exact_moments(
    spec: SystemSpec,
    coords,
    quad_points_per_dim: int = 401,
    beta: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Exact Boltzmann-Gibbs mean and covariance of raw coordinates ``coords`` (0-based)."""
    beta = spec.beta_target if beta is None else beta
    nodes, weights = _box_nodes(spec, beta, quad_points_per_dim)
    z = float(_contract(spec, beta, nodes, weights, keep=()))
    coords = list(coords)
    k = len(coords)
    mean = np.empty(k)
    cov = np.empty((k, k))
    for a, c in enumerate(coords):
        pc = _contract(spec, beta, nodes, weights, keep=(c,)) / z
        mean[a] = pc @ nodes[c]
    for a, c in enumerate(coords):
        for b in range(a, k):
            d = coords[b]
            if c == d:
                pc = _contract(spec, beta, nodes, weights, keep=(c,)) / z
                cov[a, a] = pc @ (nodes[c] - mean[a]) ** 2
            else:
                pcd = _contract(spec, beta, nodes, weights, keep=(c, d)) / z
                cov[a, b] = cov[b, a] = (nodes[c] - mean[a]) @ pcd @ (nodes[d] - mean[b])
    return mean, cov
