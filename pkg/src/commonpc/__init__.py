"""Common principal-component axes for several systems sampled with
temperature-delocalized Metropolis chains and reweighted to their own
Boltzmann-Gibbs targets."""

from .errors import (
    AccuracyError,
    CommonPCError,
    ConfigError,
    ConvergenceError,
    DegenerateWeightsError,
    InputError,
    NumericalError,
    TuningError,
)
from .model import (
    HarmonicParams,
    PhasePoint,
    QuarticChainParams,
    SystemSpec,
    kinetic_energy,
    log_rho_bg,
    log_rho_r,
    log_weight_ratio,
    potential_energy,
    potential_gradient,
)
from .sampler import SamplerConfig, Target, Trajectory, metropolis_sample, tune_step_sizes
from .reweight import WeightedSequence, compute_weights, effective_sample_size, reweighted_expectation
from .pca import CommonAxes, ComposedStats, build_axes, composed_stats, pc_project, symmetric_eigen
from .induced import PCGrid, PCHistogram, exact_marginal_quadrature, induced_histogram

__version__ = "0.1.0"
