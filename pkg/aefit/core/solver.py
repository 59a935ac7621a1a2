# SPDX-FileCopyrightText: 2024 aefit developers
#
# SPDX-License-Identifier: MIT

"""
Pathwise solution of ``dX = -θX dt + dG`` from a sampled noise path.

Integration by parts gives ``X_t = ξe^{-θt} + G_t - θ∫_0^t e^{-θ(t-s)} G_s ds``,
so only a Riemann integral of the continuous noise path is approximated.
"""
from dataclasses import replace

import numpy as np
from scipy import signal

from aefit.core.noise import DomainError


def _check_theta(theta):
    if not np.isfinite(theta) or theta <= 0:
        raise DomainError('theta must be a positive finite number, got {}.'.format(theta))


def integrate_exponential(values, theta, dt, carry=0.0):
    """
    ``I_k = ∫_0^{t_k} e^{-θ(t_k - s)} G_s ds`` by the exponential recursion::

        I_{k+1} = e^{-θΔ} I_k + (Δ/2)(e^{-θΔ} G_k + G_{k+1})

    :param values: noise values ``G_{t_0}, ..., G_{t_n}``.
    :param theta: θ > 0.
    :param dt: grid step Δ.
    :param carry: ``I_{t_0}``, nonzero when continuing a previous solve.
    :return: array ``I_{t_0}, ..., I_{t_n}``.
    """
    _check_theta(theta)
    values = np.asarray(values, dtype=float)
    decay = np.exp(-theta * dt)
    local = 0.5 * dt * (decay * values[:-1] + values[1:])
    tail, _ = signal.lfilter([1.0], [1.0, -decay], local, zi=[decay * carry])
    return np.concatenate([[carry], tail])


def solve_zero_start(noise, theta):
    """
    Zero-start solution ``X = G - θI`` of the Langevin equation driven by
    ``noise``.

    :param noise: :class:`~aefit.core.sampler.PathSample` of kind ``'G'``.
    :param theta: θ > 0.
    :return: :class:`~aefit.core.sampler.PathSample` of kind ``'X'``.
    """
    if noise.kind != 'G':
        raise DomainError('Expected a noise path, got kind {!r}.'.format(noise.kind))
    integral = integrate_exponential(noise.values, theta, noise.grid.dt)
    return replace(noise, values=noise.values - theta * integral, theta=float(theta), kind='X')


def shift_initial(path, theta, xi):
    """
    Solution started from ``xi`` instead: ``x_t + e^{-θt}ξ``. Any two
    solutions differ by such a term, so shifts compose additively.
    """
    _check_theta(theta)
    if path.theta is not None and not np.isclose(path.theta, theta, rtol=1e-12, atol=0):
        raise DomainError('Path was produced with theta={}, not {}.'.format(path.theta, theta))
    if path.kind not in ('X', 'U', 'U_xi'):
        raise DomainError('Cannot shift a path of kind {!r}.'.format(path.kind))
    values = path.values + np.exp(-theta * path.times) * xi
    return replace(path, values=values, theta=float(theta), kind='U_xi', xi=path.xi + xi)
