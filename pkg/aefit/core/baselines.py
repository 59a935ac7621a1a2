# SPDX-FileCopyrightText: 2024 aefit developers
#
# SPDX-License-Identifier: MIT

"""
Comparison estimators for the drift parameter: the least-squares estimator
built from the Itô-type identity ``∫X δX = ½X_T² - ½E[X_T²]``, which is not
consistent for fractional noise, and the maximum likelihood estimator of the
classical Ornstein-Uhlenbeck process.
"""
import numpy as np
from scipy.integrate import trapezoid

from aefit.core.noise import BROWNIAN, DomainError
from aefit.core.kernel import KernelContext, gamma_cov
from aefit.core.estimator import DegenerateInput, ae_point_estimate


class UnsupportedModel(TypeError):
    """Raised when an estimator has no form for the given noise model."""
    pass


def _energy(values, dt):
    """``∫_0^T X_t² dt`` by the trapezoidal rule."""
    energy = trapezoid(np.asarray(values, dtype=float) ** 2, dx=dt)
    if not energy > 0:
        raise DegenerateInput('The path is identically zero.')
    return energy


def _check_zero_start(path):
    if path.kind != 'X':
        raise DomainError('Expected a zero-start path, got kind {!r}.'.format(path.kind))


def lse_ito(path, model=None, theta_ref=None):
    """
    ``θ̂ = -(½X_T² - ½γ_θ(T, T)) / ∫_0^T X_t² dt``.

    :param path: :class:`~aefit.core.sampler.PathSample` of kind ``'X'``.
    :param model: noise model, defaults to ``path.model``.
    :param theta_ref: θ at which ``E[X_T²] = γ_θ(T, T)`` is evaluated; when
        None the alternative estimate from the same path is plugged in.
    :return: the estimate, which tends to 0 for long horizons.
    """
    _check_zero_start(path)
    model = path.model if model is None else model
    dt, values = path.grid.dt, path.values
    energy = _energy(values, dt)
    if theta_ref is None:
        theta_ref, _ = ae_point_estimate(values, dt, model)
    horizon = path.grid.horizon
    moment = gamma_cov(KernelContext(model, theta_ref), horizon, horizon)
    return -(0.5 * values[-1] ** 2 - 0.5 * moment) / energy


def mle_brownian(path, dt=None):
    """
    Maximum likelihood estimator of the Ornstein-Uhlenbeck drift, with the
    stochastic integral as a forward (Itô) sum::

        θ̄ = -Σ X_{t_k}(X_{t_{k+1}} - X_{t_k}) / ∫_0^T X_t² dt

    :raises UnsupportedModel: unless the path is driven by Brownian noise.
    """
    if path.model.kind != BROWNIAN:
        raise UnsupportedModel('The likelihood is only available for Brownian noise, '
                               'not {}.'.format(path.model))
    _check_zero_start(path)
    dt = path.grid.dt if dt is None else dt
    values = path.values
    energy = _energy(values, dt)
    return -np.sum(values[:-1] * np.diff(values)) / energy
