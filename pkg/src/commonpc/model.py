"""Systems, energies and the two phase-space log-densities.

Two potential families are available. ``QuarticChainParams`` is the
nearest-neighbour chain of quartic double wells used for the two-system
experiment; ``HarmonicParams`` is a diagonal harmonic well kept for
analytic Gaussian oracles.  Both expose the same chain decomposition
(single-site terms plus nearest-neighbour pair terms) so that the
quadrature code in :mod:`commonpc.induced` can contract them.

Masses are unit throughout: K(p) = |p|^2 / 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError

QUARTIC = 0
HARMONIC = 1


def _as_tuple(values) -> tuple[float, ...]:
    return tuple(float(v) for v in np.atleast_1d(np.asarray(values, dtype=float)))


@dataclass(frozen=True)
class QuarticChainParams:
    """U(x) = sum_i a/b_i^4 ((x_i-d_i)^2-b_i^2)^2 + sum_i k/2 (x_i-x_{i+1}-d_i+d_{i+1})^2"""

    b: tuple[float, ...]
    d: tuple[float, ...]
    k: float = 0.0
    amplitude: float = 10.0
    kind: int = field(default=QUARTIC, init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "b", _as_tuple(self.b))
        object.__setattr__(self, "d", _as_tuple(self.d))
        if len(self.b) != len(self.d):
            raise InputError(f"len(b)={len(self.b)} != len(d)={len(self.d)}")
        if any(not bi > 0 for bi in self.b):
            raise InputError("all well half-widths b must be > 0")
        if not self.k >= 0:
            raise InputError("coupling k must be >= 0")
        # amplitude 0 is allowed: it gives the flat-potential limit
        if not self.amplitude >= 0:
            raise InputError("amplitude must be >= 0")

    @property
    def n(self) -> int:
        return len(self.b)

    @property
    def centers(self) -> np.ndarray:
        return np.array(self.d)

    def trap_point(self) -> np.ndarray:
        """Bottom of the left well in every coordinate."""
        return np.array(self.d) - np.array(self.b)

    def length_scales(self) -> np.ndarray:
        return np.array(self.b)

    def energy(self, x: np.ndarray) -> np.ndarray:
        b = np.array(self.b)
        d = np.array(self.d)
        y = x - d
        quartic = (self.amplitude / b**4) * (y**2 - b**2) ** 2
        u = quartic.sum(axis=-1)
        if self.n > 1:
            diff = y[..., :-1] - y[..., 1:]
            u = u + (0.5 * self.k * diff**2).sum(axis=-1)
        return u

    def gradient(self, x: np.ndarray) -> np.ndarray:
        b = np.array(self.b)
        d = np.array(self.d)
        y = x - d
        g = (4.0 * self.amplitude / b**4) * y * (y**2 - b**2)
        if self.n > 1:
            diff = self.k * (y[..., :-1] - y[..., 1:])
            g = g.copy()
            g[..., :-1] += diff
            g[..., 1:] -= diff
        return g

    # chain decomposition used by the quadrature oracle
    def site_energy(self, i: int, z: np.ndarray) -> np.ndarray:
        b, d = self.b[i], self.d[i]
        return (self.amplitude / b**4) * ((z - d) ** 2 - b**2) ** 2

    def pair_energy(self, i: int, zi: np.ndarray, zj: np.ndarray) -> np.ndarray:
        """Coupling between coordinates i and i+1 (outer-product broadcast)."""
        u = np.subtract.outer(zi - self.d[i], zj - self.d[i + 1])
        return 0.5 * self.k * u**2

    def has_coupling(self, i: int) -> bool:
        return self.k > 0

    def quadrature_box(self, i: int, beta: float) -> tuple[float, float]:
        # Laplace width at the well bottom; quartic tails fall off faster than this
        curvature = 8.0 * self.amplitude / self.b[i] ** 2 + 2.0 * self.k
        sigma = 1.0 / np.sqrt(beta * curvature)
        half = 2.0 * self.b[i] + 5.0 * sigma
        return self.d[i] - half, self.d[i] + half

    def kernel_params(self) -> np.ndarray:
        return np.vstack([self.b, self.d])


@dataclass(frozen=True)
class HarmonicParams:
    """U(x) = sum_i omega_i x_i^2 / 2"""

    omega: tuple[float, ...]
    kind: int = field(default=HARMONIC, init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "omega", _as_tuple(self.omega))
        if any(not w > 0 for w in self.omega):
            raise InputError("all omega must be > 0")

    @property
    def n(self) -> int:
        return len(self.omega)

    @property
    def centers(self) -> np.ndarray:
        return np.zeros(self.n)

    def trap_point(self) -> np.ndarray:
        return np.zeros(self.n)

    def length_scales(self) -> np.ndarray:
        return 1.0 / np.sqrt(np.array(self.omega))

    def energy(self, x: np.ndarray) -> np.ndarray:
        return (0.5 * np.array(self.omega) * x**2).sum(axis=-1)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return np.array(self.omega) * x

    def site_energy(self, i: int, z: np.ndarray) -> np.ndarray:
        return 0.5 * self.omega[i] * z**2

    def pair_energy(self, i: int, zi: np.ndarray, zj: np.ndarray) -> np.ndarray:
        return np.zeros((len(zi), len(zj)))

    def has_coupling(self, i: int) -> bool:
        return False

    def quadrature_box(self, i: int, beta: float) -> tuple[float, float]:
        # Gaussian tails need more room than 5 sigma for 1e-8 bin accuracy
        sigma = 1.0 / np.sqrt(beta * self.omega[i])
        return -10.0 * sigma, 10.0 * sigma

    def kernel_params(self) -> np.ndarray:
        return np.vstack([self.omega, np.zeros(self.n)])


Potential = QuarticChainParams | HarmonicParams


@dataclass(frozen=True)
class SystemSpec:
    n: int
    potential: Potential
    beta_target: float
    beta_lo: float
    beta_hi: float
    projection: tuple[int, ...]
    label: str = "system"

    def __post_init__(self):
        object.__setattr__(self, "projection", tuple(int(k) for k in self.projection))
        if self.n < 1:
            raise InputError("n must be a positive integer")
        if self.potential.n != self.n:
            raise InputError(f"potential has {self.potential.n} coordinates, n = {self.n}")
        if not 0 < self.beta_lo <= self.beta_target <= self.beta_hi:
            raise InputError(
                "need 0 < beta_lo <= beta_target <= beta_hi, got "
                f"{self.beta_lo}, {self.beta_target}, {self.beta_hi}"
            )
        m = len(self.projection)
        if not 1 <= m <= self.n:
            raise InputError(f"projection length {m} not in [1, {self.n}]")
        for k in self.projection:
            if not 1 <= k <= self.n:
                raise InputError(f"projection index {k} outside [1, {self.n}]")
        if any(a >= b for a, b in zip(self.projection, self.projection[1:])):
            raise InputError("projection indices must be strictly increasing")

    @property
    def m(self) -> int:
        return len(self.projection)

    @property
    def proj_idx(self) -> np.ndarray:
        """0-based projection indices."""
        return np.array(self.projection) - 1


@dataclass(frozen=True)
class PhasePoint:
    x: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        p = np.asarray(self.p, dtype=float)
        if x.shape != p.shape or x.ndim != 1:
            raise InputError(f"x and p must be equal-length vectors, got {x.shape}, {p.shape}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(p))):
            raise InputError("phase point has non-finite entries")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)


def _check_dim(spec: SystemSpec, v, what: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape[-1:] != (spec.n,):
        raise InputError(f"{what} has trailing dimension {v.shape[-1:]}, expected ({spec.n},)")
    return v


def potential_energy(spec: SystemSpec, x) -> float | np.ndarray:
    x = _check_dim(spec, x, "x")
    return spec.potential.energy(x)[()]


def potential_gradient(spec: SystemSpec, x) -> np.ndarray:
    x = _check_dim(spec, x, "x")
    return spec.potential.gradient(x)


def kinetic_energy(spec: SystemSpec, p) -> float | np.ndarray:
    p = _check_dim(spec, p, "p")
    return (0.5 * p**2).sum(axis=-1)[()]


def total_energy(spec: SystemSpec, pt: PhasePoint) -> float:
    return float(potential_energy(spec, pt.x) + kinetic_energy(spec, pt.p))


def log_rho_bg(spec: SystemSpec, pt: PhasePoint, beta: float) -> float:
    return -beta * total_energy(spec, pt)


def log_mixture_density(energy, beta_lo: float, beta_hi: float):
    """log of int exp(-beta E) f(beta) dbeta with f uniform on [beta_lo, beta_hi].

    Works on scalars or arrays. Uses
    log rho = -beta_lo E + log((1 - exp(-a)) / a),  a = (beta_hi - beta_lo) E,
    with the second term evaluated through expm1 so that small ``a`` keeps
    full precision and negative ``a`` does not overflow.
    """
    e = np.asarray(energy, dtype=float)
    if not np.all(np.isfinite(e)):
        raise InputError("energy must be finite")
    if beta_hi == beta_lo:
        return (-beta_lo * e)[()]
    a = (beta_hi - beta_lo) * e
    abs_a = np.abs(a)
    with np.errstate(divide="ignore", invalid="ignore"):
        tail = np.log(-np.expm1(-abs_a)) - np.log(abs_a)
    tail = np.where(a < 0, tail + abs_a, tail)
    tail = np.where(a == 0, 0.0, tail)
    return (-beta_lo * e + tail)[()]


def log_rho_r(spec: SystemSpec, pt: PhasePoint) -> float:
    return float(log_mixture_density(total_energy(spec, pt), spec.beta_lo, spec.beta_hi))


def log_weight_ratio(spec: SystemSpec, pt: PhasePoint) -> float:
    return log_rho_bg(spec, pt, spec.beta_target) - log_rho_r(spec, pt)


def log_weight_ratios(spec: SystemSpec, x: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Vectorised :func:`log_weight_ratio` over rows of ``x`` and ``p``."""
    e = np.asarray(potential_energy(spec, x) + kinetic_energy(spec, p), dtype=float)
    return -spec.beta_target * e - log_mixture_density(e, spec.beta_lo, spec.beta_hi)
