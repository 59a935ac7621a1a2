# SPDX-FileCopyrightText: 2024 aefit developers
#
# SPDX-License-Identifier: MIT

"""
The alternative estimator ``θ̃_T = ψ^{-1}((1/T)∫_0^T X_t² dt)``, its
discrete-observation and stationary variants, plug-in confidence intervals
and the finite-horizon bias of ``ψ(θ̃_T)``.
"""
import numpy as np
from scipy.integrate import trapezoid

from aefit.core.noise import DomainError
from aefit.core.kernel import KernelContext, psi_inverse, r_stationary
from aefit.core.asymptotics import w_T, R_T, rate_regime
from aefit.core.estimate_results import EstimateResult
from aefit.core.support import geometric_edges, integrate_panels
from aefit.distributions import normal_quantile

DEFAULT_ALPHA = 0.05
MESH_DELTA = 0.1


class DegenerateInput(ValueError):
    """
    Raised for observations that carry no information about θ, such as an
    all-zero path or an empty observation vector.
    """
    pass


def mean_square(values, dt):
    """
    ``(1/T)∫_0^T X_t² dt`` by the trapezoidal rule on a uniform grid.

    :raises DegenerateInput: for fewer than two values or a vanishing result.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size < 2:
        raise DegenerateInput('A path needs at least two grid values.')
    if not np.all(np.isfinite(values)):
        raise DegenerateInput('The path contains non-finite values.')
    value = trapezoid(values ** 2, dx=dt) / (dt * (values.size - 1))
    if value <= 0:
        raise DegenerateInput('The path is identically zero.')
    return value


def discrete_mean_square(observations, delta):
    """
    ``(1/T_N)Σ_{k=1}^N X_{kΔ}²Δ`` with ``T_N = NΔ``, the observations being
    ``X_Δ, ..., X_{NΔ}``.
    """
    observations = np.asarray(observations, dtype=float)
    if observations.ndim != 1 or observations.size < 1:
        raise DegenerateInput('At least one observation is needed.')
    if not delta > 0:
        raise DomainError('The observation step must be positive, got {}.'.format(delta))
    value = np.mean(observations ** 2)
    if not np.isfinite(value):
        raise DegenerateInput('The observations contain non-finite values.')
    if value <= 0:
        raise DegenerateInput('All observations are zero.')
    return value


def ae_point_estimate(values, dt, model):
    """
    θ̃_T alone, without standard error or diagnostics.

    :return: ``(theta_hat, mean_square)``.
    """
    value = mean_square(values, dt)
    return psi_inverse(model, value), value


def _check_alpha(alpha):
    if not 0 < alpha <= 1:
        raise DomainError('alpha must lie in (0, 1], got {}.'.format(alpha))


def standard_error(theta_hat, model, T, w=None):
    """``√w_θ̂(T)/|ψ′(θ̂)|``, the scale of the master statistic."""
    ctx = KernelContext(model, theta_hat)
    w = w_T(ctx, T) if w is None else w
    return np.sqrt(w) / abs(ctx.psi_prime_value)


def confidence_interval(theta_hat, model, T, alpha=DEFAULT_ALPHA):
    """
    Plug-in interval ``θ̂ ± z_{1-α/2}·√w_θ̂(T)/|ψ′(θ̂)|``.

    :return: ``(lo, hi)``.
    """
    if not theta_hat > 0:
        raise DomainError('theta_hat must be positive, got {}.'.format(theta_hat))
    _check_alpha(alpha)
    half = normal_quantile(1 - alpha / 2) * standard_error(theta_hat, model, T)
    return theta_hat - half, theta_hat + half


def _estimate(model, value, T, alpha, method, mesh_ok=None, notes=None):
    theta_hat = psi_inverse(model, value)
    ctx = KernelContext(model, theta_hat)
    w = w_T(ctx, T)
    se = standard_error(theta_hat, model, T, w=w)
    half = normal_quantile(1 - alpha / 2) * se
    notes = dict(notes or {})
    notes.update(psi_prime=ctx.psi_prime_value, w=w,
                 rate_regime=rate_regime(model).regime)
    return EstimateResult(
        theta_hat, value, se, (theta_hat - half, theta_hat + half),
        R_T(ctx, T, w=w), model=model, horizon=T, alpha=alpha, method=method,
        mesh_ok=mesh_ok, notes=notes
    )


def ae_continuous(path, model=None, alpha=DEFAULT_ALPHA):
    """
    Alternative estimator from a continuously observed path.

    Any solution may be used: the initial condition only contributes a
    transient that vanishes in the time average.

    :param path: :class:`~aefit.core.sampler.PathSample` of kind ``'X'``,
        ``'U'`` or ``'U_xi'``.
    :param model: noise model, defaults to ``path.model``.
    :param alpha: level of the confidence interval.
    :return: :class:`~aefit.core.estimate_results.EstimateResult`.
    """
    _check_alpha(alpha)
    if path.kind not in ('X', 'U', 'U_xi'):
        raise DomainError('Cannot estimate theta from a path of kind {!r}.'.format(path.kind))
    model = path.model if model is None else model
    value = mean_square(path.values, path.grid.dt)
    return _estimate(model, value, path.grid.horizon, alpha, 'AE')


def check_mesh(hurst, delta, N, step):
    """
    Mesh condition ``N·Δ^β <= 1`` with ``β = (2H+½)/(H+½) - δ``.

    :return: ``(ok, margin)`` with ``margin = log(N·Δ^β)``.
    """
    if not 0 < hurst < 1:
        raise DomainError('H must lie in (0, 1), got {}.'.format(hurst))
    beta_max = (2 * hurst + 0.5) / (hurst + 0.5)
    if not 0 < delta < beta_max:
        raise DomainError('delta must lie in (0, {}), got {}.'.format(beta_max, delta))
    margin = np.log(N) + (beta_max - delta) * np.log(step)
    return bool(margin <= 0), float(margin)


def ae_discrete(observations, delta, model, alpha=DEFAULT_ALPHA, mesh_delta=MESH_DELTA):
    """
    Alternative estimator from ``X_Δ, ..., X_{NΔ}`` with the left Riemann
    sum as mean square. ``mesh_ok`` reports :func:`check_mesh` for the Hölder
    index of ``model``.
    """
    _check_alpha(alpha)
    value = discrete_mean_square(observations, delta)
    count = np.size(observations)
    mesh_ok, margin = check_mesh(model.holder_index, mesh_delta, count, delta)
    return _estimate(model, value, count * delta, alpha, 'AE-discrete',
                     mesh_ok=mesh_ok, notes={'mesh_margin': margin})


def sae(path, model=None, alpha=DEFAULT_ALPHA):
    """
    Stationary alternative estimator: the same computation as
    :func:`ae_continuous` on a stationary path, for which ``ψ(θ̈_T)`` is
    unbiased.
    """
    _check_alpha(alpha)
    if path.kind != 'U':
        raise DomainError('The stationary estimator needs a path of kind U, got {!r}.'.format(path.kind))
    model = path.model if model is None else model
    value = mean_square(path.values, path.grid.dt)
    return _estimate(model, value, path.grid.horizon, alpha, 'SAE')


def bias_expansion(ctx, T, printed=False):
    """
    Finite-horizon bias of ``ψ(θ̃_T)``, from ``E[X_t²] = γ_θ(t, t)``::

        E[ψ(θ̃_T)] - ψ(θ) = (1/T)[ψ(1 - e^{-2θT})/(2θ) - 2∫_0^T e^{-θt} r(t) dt]

    :param printed: use coefficient +1 on the r-integral instead of -2.
    """
    if not T > 0:
        raise DomainError('The horizon T must be positive, got {}.'.format(T))
    theta = ctx.theta
    integral = integrate_panels(lambda t: np.exp(-theta * t) * r_stationary(ctx, t),
                                geometric_edges(T, 1 / theta))
    coefficient = 1.0 if printed else -2.0
    return (ctx.psi_value * -np.expm1(-2 * theta * T) / (2 * theta)
            + coefficient * integral) / T
