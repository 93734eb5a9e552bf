"""Random-walk Metropolis chains on phase space (x, p).

The chain targets either the temperature-delocalized density rho_R or the
canonical density at the system's target temperature.  Time averages of
a DELOCALIZED chain are averages over rho_R, which is all the reweighting
step needs.

Proposals are Gaussian: x moves by ``step_size_x * x_scales * N(0, 1)``
and p by ``step_size_p * N(0, 1)``.  ``x_scales`` defaults to the
potential's natural length scales (well half-widths for the quartic chain)
so a single tuned multiplier fits coordinates of very different stiffness.

Random numbers come from numpy's PCG64 seeded with ``SamplerConfig.seed``
and are drawn in fixed-size blocks, so a given (spec, config) reproduces
bit-identically.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .errors import InputError, NumericalError, TuningError
from .model import SystemSpec

logger = logging.getLogger(__name__)

_BLOCK = 1 << 15


class Target(str, enum.Enum):
    DELOCALIZED = "DELOCALIZED"
    CANONICAL = "CANONICAL"

    @property
    def code(self) -> int:
        return _kernels.DELOCALIZED if self is Target.DELOCALIZED else _kernels.CANONICAL


@dataclass(frozen=True)
class SamplerConfig:
    n_steps: int = 550_000
    burn_in: int | None = None
    thin: int = 1
    step_size_x: float = 0.5
    step_size_p: float = 0.5
    seed: int = 0
    target: Target = Target.DELOCALIZED
    x_scales: tuple[float, ...] | None = None
    x0: tuple[float, ...] | None = None
    tuned_acceptance: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "target", Target(self.target))
        if self.burn_in is None:
            object.__setattr__(self, "burn_in", self.n_steps // 10)
        if self.n_steps < 1:
            raise InputError("n_steps must be positive")
        if not 0 <= self.burn_in <= self.n_steps:
            raise InputError(f"burn_in must lie in [0, n_steps], got {self.burn_in}")
        if self.thin < 1:
            raise InputError("thin must be >= 1")
        if not (self.step_size_x > 0 and self.step_size_p > 0):
            raise InputError("step sizes must be > 0")
        if not 0 <= self.seed < 2**64:
            raise InputError("seed must be a 64-bit unsigned integer")
        if self.x_scales is not None:
            object.__setattr__(self, "x_scales", tuple(float(s) for s in self.x_scales))
            if any(not s > 0 for s in self.x_scales):
                raise InputError("x_scales must be > 0")
        if self.x0 is not None:
            object.__setattr__(self, "x0", tuple(float(v) for v in self.x0))

    @property
    def n_recorded(self) -> int:
        return (self.n_steps - self.burn_in) // self.thin


@dataclass
class Trajectory:
    spec_label: str
    x: np.ndarray
    p: np.ndarray
    target: Target
    acceptance_rate: float
    seed: int
    m: int = 0

    def __len__(self) -> int:
        return self.x.shape[0]

    @property
    def n(self) -> int:
        return self.x.shape[1]


@dataclass
class ChainDiagnostics:
    acceptance_rate: float
    well_transition_counts: list[int] = field(default_factory=list)
    effective_sample_estimate: float = 0.0


def initial_point(spec: SystemSpec, cfg: SamplerConfig) -> tuple[np.ndarray, np.ndarray]:
    if cfg.x0 is not None:
        x0 = np.array(cfg.x0, dtype=float)
        if x0.shape != (spec.n,):
            raise InputError(f"x0 has {x0.size} entries, expected {spec.n}")
    elif cfg.target is Target.CANONICAL:
        # the canonical baseline starts inside one well to expose trapping
        x0 = spec.potential.trap_point()
    else:
        x0 = spec.potential.centers.copy()
    return x0, np.zeros(spec.n)


def _x_scales(spec: SystemSpec, cfg: SamplerConfig) -> np.ndarray:
    if cfg.x_scales is None:
        return spec.potential.length_scales()
    scales = np.array(cfg.x_scales)
    if scales.shape != (spec.n,):
        raise InputError(f"x_scales has {scales.size} entries, expected {spec.n}")
    return scales


def metropolis_sample(spec: SystemSpec, cfg: SamplerConfig) -> Trajectory:
    pot = spec.potential
    params = np.ascontiguousarray(pot.kernel_params(), dtype=float)
    k = float(getattr(pot, "k", 0.0))
    amplitude = float(getattr(pot, "amplitude", 0.0))
    target = cfg.target.code
    x, p = initial_point(spec, cfg)
    e0 = _kernels.potential_energy(pot.kind, params, k, amplitude, x) + 0.5 * float(p @ p)
    logt = np.array([_kernels.log_target(e0, target, spec.beta_target, spec.beta_lo, spec.beta_hi)])
    if not np.isfinite(logt[0]):
        raise NumericalError(f"log-target is not finite at the initial point of {spec.label}")

    sx = cfg.step_size_x * _x_scales(spec, cfg)
    n = spec.n
    out_x = np.empty((cfg.n_recorded, n))
    out_p = np.empty((cfg.n_recorded, n))
    out_pos = np.zeros(1, dtype=np.int64)
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    accepted = 0
    done = 0
    while done < cfg.n_steps:
        size = min(_BLOCK, cfg.n_steps - done)
        normals = rng.standard_normal((size, 2 * n))
        uniforms = 1.0 - rng.random(size)
        accepted += _kernels.metropolis_chunk(
            pot.kind, params, k, amplitude,
            x, p, logt,
            sx, float(cfg.step_size_p), target,
            float(spec.beta_target), float(spec.beta_lo), float(spec.beta_hi),
            normals, uniforms,
            done, cfg.burn_in, cfg.thin,
            out_x, out_p, out_pos,
        )
        done += size
    assert out_pos[0] == cfg.n_recorded
    return Trajectory(
        spec_label=spec.label,
        x=out_x,
        p=out_p,
        target=cfg.target,
        acceptance_rate=accepted / cfg.n_steps,
        seed=cfg.seed,
        m=spec.m,
    )


def _pilot_seed(seed: int, round_: int) -> int:
    ss = np.random.SeedSequence([seed, 0x7475_6E65, round_])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def tune_step_sizes(
    spec: SystemSpec,
    cfg: SamplerConfig,
    target_acceptance: float = 0.35,
    pilot_steps: int = 5000,
    max_rounds: int = 30,
) -> SamplerConfig:
    """Rescale both step sizes by a common factor until the pilot acceptance
    lands within +-0.1 of ``target_acceptance``.

    The factor is bracketed geometrically and then bisected in log space.
    Pilot chains use seeds derived from ``cfg.seed``; the returned config
    keeps the original seed for the production run.
    """
    if not 0 < target_acceptance < 1:
        raise InputError("target_acceptance must lie in (0, 1)")
    lo_band, hi_band = target_acceptance - 0.1, target_acceptance + 0.1
    pilot = replace(cfg, n_steps=pilot_steps, burn_in=0, thin=1)
    lo = hi = None  # log-factors known to give too-high / too-low acceptance
    log_f = 0.0
    acc = float("nan")
    for r in range(max_rounds):
        f = float(np.exp(log_f))
        trial = replace(
            pilot,
            step_size_x=cfg.step_size_x * f,
            step_size_p=cfg.step_size_p * f,
            seed=_pilot_seed(cfg.seed, r),
        )
        acc = metropolis_sample(spec, trial).acceptance_rate
        logger.debug("tune %s round %d factor %.4g acceptance %.3f", spec.label, r, f, acc)
        if lo_band <= acc <= hi_band:
            if r == 0:
                return replace(cfg, tuned_acceptance=acc)
            return replace(
                cfg,
                step_size_x=trial.step_size_x,
                step_size_p=trial.step_size_p,
                tuned_acceptance=acc,
            )
        if acc > hi_band:
            lo = log_f
            log_f = log_f + 1.0 if hi is None else 0.5 * (log_f + hi)
        else:
            hi = log_f
            log_f = log_f - 1.0 if lo is None else 0.5 * (log_f + lo)
    raise TuningError(
        f"step-size tuning for {spec.label} did not reach acceptance "
        f"{target_acceptance:.2f}+-0.1 in {max_rounds} rounds (last {acc:.3f})",
        last_acceptance=acc,
    )


def count_well_transitions(traj: Trajectory, coordinate: int, threshold: float) -> int:
    """Sign changes of x[coordinate] - threshold along the chain (0-based coordinate)."""
    if not 0 <= coordinate < traj.n:
        raise InputError(f"coordinate {coordinate} outside [0, {traj.n})")
    side = traj.x[:, coordinate] >= threshold
    return int(np.count_nonzero(side[1:] != side[:-1]))


def integrated_autocorr_time(series: np.ndarray, c: float = 5.0) -> float:
    """Integrated autocorrelation time with Sokal's self-consistent window."""
    y = np.asarray(series, dtype=float)
    y = y - y.mean()
    n = y.size
    if n < 2 or not np.any(y):
        return 1.0
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(y, size)
    acf = np.fft.irfft(f * np.conj(f), size)[:n]
    acf /= acf[0]
    tau = 2.0 * np.cumsum(acf) - 1.0
    window = np.arange(n) >= c * tau
    w = int(np.argmax(window)) if window.any() else n - 1
    return float(max(tau[w], 1.0))


def chain_diagnostics(spec: SystemSpec, traj: Trajectory) -> ChainDiagnostics:
    centers = spec.potential.centers
    counts = [count_well_transitions(traj, i, float(centers[i])) for i in range(traj.n)]
    u = spec.potential.energy(traj.x)
    tau = integrated_autocorr_time(u)
    return ChainDiagnostics(
        acceptance_rate=traj.acceptance_rate,
        well_transition_counts=counts,
        effective_sample_estimate=len(traj) / tau,
    )
