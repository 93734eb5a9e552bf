"""Compiled Metropolis inner loop.

The energy formulas here duplicate the numpy versions in
:mod:`commonpc.model`; ``tests/test_sampler.py`` pins the two together.
"""

import math

import numba
import numpy as np

DELOCALIZED = 0
CANONICAL = 1


@numba.njit(cache=True, nogil=True)
def _potential(kind, params, k, amplitude, x):
    n = x.shape[0]
    u = 0.0
    if kind == 0:
        for i in range(n):
            b = params[0, i]
            y = x[i] - params[1, i]
            q = y * y - b * b
            u += amplitude / (b * b * b * b) * q * q
        for i in range(n - 1):
            r = x[i] - x[i + 1] - params[1, i] + params[1, i + 1]
            u += 0.5 * k * r * r
    else:
        for i in range(n):
            u += 0.5 * params[0, i] * x[i] * x[i]
    return u


@numba.njit(cache=True, nogil=True)
def _log_target(energy, target, beta_target, beta_lo, beta_hi):
    if target == 1 or beta_hi == beta_lo:
        beta = beta_target if target == 1 else beta_lo
        return -beta * energy
    a = (beta_hi - beta_lo) * energy
    if a == 0.0:
        return -beta_lo * energy
    abs_a = abs(a)
    tail = math.log(-math.expm1(-abs_a)) - math.log(abs_a)
    if a < 0.0:
        tail += abs_a
    return -beta_lo * energy + tail


@numba.njit(cache=True, nogil=True)
def metropolis_chunk(
    kind, params, k, amplitude,
    x, p, logt,
    sx, sp, target, beta_target, beta_lo, beta_hi,
    normals, uniforms,
    step0, burn_in, thin,
    out_x, out_p, out_pos,
):
    """Advance the chain by ``len(uniforms)`` steps in place.

    ``x``/``p`` hold the current state; ``logt`` is a 1-element array with the
    current log-target.  Recorded states are written from ``out_pos[0]`` on.
    Returns the number of accepted proposals.
    """
    n = x.shape[0]
    xn = np.empty(n)
    pn = np.empty(n)
    accepted = 0
    for t in range(uniforms.shape[0]):
        kin = 0.0
        for i in range(n):
            xn[i] = x[i] + sx[i] * normals[t, i]
            pn[i] = p[i] + sp * normals[t, n + i]
            kin += 0.5 * pn[i] * pn[i]
        e = _potential(kind, params, k, amplitude, xn) + kin
        lt = _log_target(e, target, beta_target, beta_lo, beta_hi)
        if math.log(uniforms[t]) < lt - logt[0]:
            for i in range(n):
                x[i] = xn[i]
                p[i] = pn[i]
            logt[0] = lt
            accepted += 1
        step = step0 + t + 1
        if step > burn_in and (step - burn_in) % thin == 0:
            j = out_pos[0]
            for i in range(n):
                out_x[j, i] = x[i]
                out_p[j, i] = p[i]
            out_pos[0] = j + 1
    return accepted


@numba.njit(cache=True, nogil=True)
def potential_energy(kind, params, k, amplitude, x):
    return _potential(kind, params, k, amplitude, x)


@numba.njit(cache=True, nogil=True)
def log_target(energy, target, beta_target, beta_lo, beta_hi):
    return _log_target(energy, target, beta_target, beta_lo, beta_hi)
