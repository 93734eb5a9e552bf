import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from commonpc import _kernels
from commonpc.errors import InputError
from commonpc.model import (
    PhasePoint,
    kinetic_energy,
    log_mixture_density,
    log_rho_bg,
    log_rho_r,
    log_weight_ratio,
    log_weight_ratios,
    potential_energy,
    potential_gradient,
)

from conftest import D, quartic_spec, harmonic_spec


def reference_energy(b, d, k, x, a=10.0):
    """Direct loop evaluation, kept independent of the library code."""
    total = 0.0
    for i in range(len(b)):
        total += a / b[i] ** 4 * ((x[i] - d[i]) ** 2 - b[i] ** 2) ** 2
    for i in range(len(b) - 1):
        total += k / 2 * (x[i] - x[i + 1] - d[i] + d[i + 1]) ** 2
    return total


def test_energy_at_barrier_tops(system1):
    assert potential_energy(system1, np.array(D)) == pytest.approx(40.0, abs=1e-12)


def test_energy_at_well_bottoms(system1):
    x = np.array([6.0, 13.0, 19.4, 21.4])
    expected = reference_energy((6, 1, 0.4, 0.4), D, 1e-5, x)
    assert expected == pytest.approx(1.268e-4, rel=1e-9)
    assert potential_energy(system1, x) == pytest.approx(expected, rel=1e-9)


def test_energy_uncoupled_one_well():
    spec = quartic_spec(k=0.0)
    x = np.array(D) + np.array([6.0, 0, 0, 0])
    assert potential_energy(spec, x) == pytest.approx(30.0, abs=1e-12)


def test_energy_dimension_mismatch(system1):
    with pytest.raises(InputError):
        potential_energy(system1, np.zeros(3))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-30, 40), min_size=4, max_size=4))
def test_energy_matches_reference_loop(x):
    spec = quartic_spec()
    x = np.array(x)
    ref = reference_energy((6, 1, 0.4, 0.4), D, 1e-5, x)
    assert potential_energy(spec, x) == pytest.approx(ref, rel=1e-12, abs=1e-12)


def test_kernel_energy_matches_numpy(system1, rng):
    pot = system1.potential
    params = pot.kernel_params()
    for _ in range(20):
        x = pot.centers + rng.normal(size=4) * 3
        assert _kernels.potential_energy(pot.kind, params, pot.k, pot.amplitude, x) == pytest.approx(
            potential_energy(system1, x), rel=1e-13, abs=1e-13
        )


def test_gradient_zero_at_centers(system1):
    assert np.all(potential_gradient(system1, np.array(D)) == 0.0)


def test_gradient_matches_finite_difference(system1):
    x = np.array(D) + np.array([1.0, 0, 0, 0])
    h = 1e-5
    e = np.array([h, 0, 0, 0])
    fd = (potential_energy(system1, x + e) - potential_energy(system1, x - e)) / (2 * h)
    assert potential_gradient(system1, x)[0] == pytest.approx(fd, rel=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=4, max_size=4))
def test_gradient_matches_finite_difference_everywhere(u):
    spec = quartic_spec()
    x = np.array(D) + np.array(u) * np.array([6, 1, 0.4, 0.4])
    g = potential_gradient(spec, x)
    h = 1e-5
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        fd = (potential_energy(spec, x + e) - potential_energy(spec, x - e)) / (2 * h)
        assert g[i] == pytest.approx(fd, rel=1e-5, abs=1e-5)


def test_uncoupled_gradient_is_separable():
    spec = quartic_spec(k=0.0)
    x = np.array(D)
    x[2] += 0.1
    g = potential_gradient(spec, x)
    assert g[2] != 0.0
    assert np.all(np.delete(g, 2) == 0.0)


@pytest.mark.parametrize("p, expected", [((1, 0, 0, 0), 0.5), ((0, 0, 0, 0), 0.0), ((1, 1, 1, 1), 2.0)])
def test_kinetic_energy(system1, p, expected):
    assert kinetic_energy(system1, np.array(p, dtype=float)) == expected


def test_log_rho_bg_examples(system1):
    zero = PhasePoint(np.array([6.0, 13.0, 19.4, 21.4]), np.zeros(4))
    assert log_rho_bg(harmonic_spec(), PhasePoint(np.zeros(4), np.zeros(4)), 1.0) == 0.0
    assert log_rho_bg(system1, PhasePoint(np.array(D), np.zeros(4)), 1.0) == pytest.approx(-40.0)
    pt = PhasePoint(np.array(D), np.array([1.0, 0, 0, 0]))
    assert log_rho_bg(system1, pt, 0.5) == pytest.approx(-20.25)
    assert log_rho_bg(system1, zero, 1.0) < 0


def test_mixture_density_examples():
    assert log_mixture_density(0.0, 0.2, 1.0) == 0.0
    assert log_mixture_density(1.0, 0.0, 1.0) == pytest.approx(math.log(1 - math.exp(-1)), rel=1e-14)
    assert log_mixture_density(1.0, 0.0, 1.0) == pytest.approx(-0.45868, abs=5e-6)


@settings(max_examples=100, deadline=None)
@given(st.floats(-50, 500), st.floats(0.01, 5.0))
def test_mixture_degenerate_range_is_canonical(e, beta):
    assert log_mixture_density(e, beta, beta) == -beta * e


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 500.0), st.floats(0.0, 500.0))
def test_mixture_density_monotone_and_bounded(e1, e2):
    lo, hi = 0.2, 1.0
    a, b = sorted((e1, e2))
    la, lb = log_mixture_density(np.array([a, b]), lo, hi)
    assert lb <= la
    assert -hi * a - 1e-12 <= la <= -lo * a + 1e-12


@pytest.mark.parametrize("e", [1e-300, 1e-10, 1.0, 1e3])
def test_mixture_density_continuous_in_width(e):
    beta = 0.7
    near = log_mixture_density(e, beta, beta + 1e-12)
    assert near == pytest.approx(-beta * e, rel=1e-10, abs=1e-300)


def test_mixture_density_rejects_nonfinite():
    with pytest.raises(InputError):
        log_mixture_density(np.inf, 0.2, 1.0)


def test_mixture_density_matches_quadrature_in_beta(rng):
    from scipy.integrate import quad

    lo, hi = 0.2, 1.0
    for e in rng.uniform(-5, 60, 10):
        integral, _ = quad(lambda beta: math.exp(-beta * e), lo, hi, epsabs=0, epsrel=1e-13)
        direct = math.log(integral / (hi - lo))
        assert log_mixture_density(e, lo, hi) == pytest.approx(direct, rel=1e-10, abs=1e-12)


def test_log_weight_ratio_examples():
    spec = harmonic_spec(omega=(2.0,), lo=0.5, hi=1.0)
    # E = 1 at x = 1 with omega = 2
    pt = PhasePoint(np.array([1.0]), np.array([0.0]))
    assert log_weight_ratio(spec, pt) == pytest.approx(-1.0 - log_rho_r(spec, pt))
    # the [0, 1] example uses the closed forms directly since beta_lo must be positive in a spec
    assert -1.0 - log_mixture_density(1.0, 0.0, 1.0) == pytest.approx(-0.54132, abs=5e-6)
    degenerate = harmonic_spec(lo=1.0, hi=1.0)
    pt4 = PhasePoint(np.ones(4), np.ones(4))
    assert log_weight_ratio(degenerate, pt4) == 0.0
    assert log_weight_ratio(harmonic_spec(), PhasePoint(np.zeros(4), np.zeros(4))) == 0.0


def test_vectorized_ratios_match_pointwise(system1, rng):
    x = np.array(D) + rng.normal(size=(50, 4))
    p = rng.normal(size=(50, 4))
    vec = log_weight_ratios(system1, x, p)
    for k in range(50):
        assert vec[k] == pytest.approx(log_weight_ratio(system1, PhasePoint(x[k], p[k])), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize(
    "kwargs",
    [dict(lo=1.1, hi=2.0), dict(lo=0.0, hi=1.0), dict(lo=0.2, hi=0.9), dict(projection=(1, 5)), dict(projection=(2, 1))],
)
def test_spec_validation(kwargs):
    with pytest.raises(InputError):
        quartic_spec(**kwargs)


def test_spec_rejects_nonpositive_width():
    from commonpc.model import QuarticChainParams

    with pytest.raises(InputError):
        QuarticChainParams(b=(1.0, 0.0), d=(0.0, 1.0))
