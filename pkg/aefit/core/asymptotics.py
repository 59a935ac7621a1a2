# SPDX-FileCopyrightText: 2024 aefit developers
#
# SPDX-License-Identifier: MIT

"""
Asymptotic quantities of the alternative estimator: the variance proxy
``w_θ(T)``, the Berry-Esseen rate ``R_θ(T)``, the classical-rate variance,
the moments of the quadratic functional ``Q_T = (1/T)∫(X_t² - E X_t²)dt``
and the rate regime of each noise model.
"""
from dataclasses import dataclass, asdict

import numpy as np

from aefit.core.noise import NoiseModel, DomainError, FBM, BROWNIAN
from aefit.core.kernel import (
    KernelContext, NumericsError, r_stationary, r_interpolant,
    fou_r_asymptote_terms
)
from aefit.core.support import gauss_legendre, geometric_edges, integrate_panels

TAIL_POINTS = np.array([1e2, 1e3, 1e4])
TAIL_SLOPE_LIMIT = -0.05
TAIL_NEGLIGIBLE = 1e-30
# ∫r² is integrated numerically up to this multiple of 1/θ.
TAIL_HORIZON = 1000.0
Q_PANEL_ORDER = 16
Q_MAX_PANELS = 64
# 2·sqrt((q - 1)/(3q)) for the second chaos.
FOURTH_MOMENT_CONSTANT = 2 * np.sqrt(1 / 6.)

CLASSICAL = 'classical'
SLOW_POLYNOMIAL = 'slow_polynomial'
LOG_RATE = 'log_rate'
NO_RATE = 'none'


class NonIntegrable(NumericsError):
    """Raised when ``∫_0^∞ r_θ(t)² dt`` diverges."""
    pass


def _check_horizon(T):
    if not np.isfinite(T) or T <= 0:
        raise DomainError('The horizon T must be positive, got {}.'.format(T))


def w_T(ctx, T):
    """
    Variance proxy of the master statistic::

        w_θ(T) = (2/T²)∬_{[0,T]²} r(t-s)² ds dt = (4/T²)∫_0^T r(t)²(T-t) dt

    :param ctx: :class:`~aefit.core.kernel.KernelContext`.
    :param T: horizon.
    :return: w > 0.
    """
    _check_horizon(T)
    value = 4 * integrate_panels(
        lambda t: r_stationary(ctx, t) ** 2 * (T - t),
        geometric_edges(T, 1 / ctx.theta)
    ) / T ** 2
    if not np.isfinite(value) or value <= 0:
        raise NumericsError('w_T evaluated to {} for {} at T={}.'.format(value, ctx, T))
    return value


def R_T(ctx, T, w=None):
    """
    ``R_θ(T) = ∫_0^T |r(t)| dt / (T√w_θ(T))``.

    :param w: precomputed ``w_T(ctx, T)``.
    """
    _check_horizon(T)
    w = w_T(ctx, T) if w is None else w
    integral = integrate_panels(lambda t: np.abs(r_stationary(ctx, t)),
                                geometric_edges(T, 1 / ctx.theta))
    return integral / (T * np.sqrt(w))


def check_tail(ctx, points=TAIL_POINTS):
    """
    Log-slope of ``r(t)²·t`` at infinity. For increment models this is the
    exact exponent ``4H - 3`` of the slowest power-law leaf; the Lamperti
    models decay exponentially and get a fit over ``points`` instead.

    :raises NonIntegrable: if the exact exponent is ``>= 0``, or the fitted
        slope is ``>= -0.05`` while the values are not negligible.
    :return: the slope, or ``-inf`` when ``r`` decays exponentially or has
        already vanished.
    """
    if ctx.model.is_increment:
        terms = fou_r_asymptote_terms(ctx.model, ctx.theta)
        if not terms:
            return -np.inf
        slope = 2 * max(exponent for _, exponent in terms) + 1
        if slope >= 0:
            raise NonIntegrable(
                'r(t)²·t does not decay for {} (exponent {:.3f}).'.format(ctx.model, slope)
            )
        return slope
    values = r_stationary(ctx, points) ** 2 * points
    if values[-1] <= TAIL_NEGLIGIBLE or np.any(values <= 0):
        return -np.inf
    slope = np.polyfit(np.log(points), np.log(values), 1)[0]
    if slope >= TAIL_SLOPE_LIMIT:
        raise NonIntegrable(
            'r(t)²·t does not decay for {} (log-slope {:.3f}).'.format(ctx.model, slope)
        )
    return slope


def integral_r_squared(ctx):
    """
    ``∫_0^∞ r_θ(t)² dt``: composite quadrature up to ``1000/θ`` plus the
    analytic integral of the squared power-law asymptote beyond.

    :raises NonIntegrable: see :func:`check_tail`.
    """
    check_tail(ctx)
    horizon = TAIL_HORIZON / ctx.theta
    body = integrate_panels(lambda t: r_stationary(ctx, t) ** 2,
                            geometric_edges(horizon, 1 / ctx.theta))
    tail = 0.0
    terms = fou_r_asymptote_terms(ctx.model, ctx.theta)
    for coefficient_i, exponent_i in terms:
        for coefficient_j, exponent_j in terms:
            power = exponent_i + exponent_j + 1
            tail += coefficient_i * coefficient_j * horizon ** power / -power
    return body + tail


def sigma2_classical(ctx):
    """
    Asymptotic variance ``4∫_0^∞ r²/ψ′(θ)²`` of ``√T(θ̂ - θ)`` in the
    classical regime; ``2θ`` for Brownian noise.
    """
    return 4 * integral_r_squared(ctx) / ctx.psi_prime_value ** 2


def sigma_H2(hurst):
    """``σ_H² = ∫_0^∞ r_{H,1}(t)² dt`` for fractional noise at θ = 1."""
    return integral_r_squared(KernelContext(NoiseModel.fbm(hurst), 1.0))


def fou_sigma_scaling_check(hurst, theta):
    """
    Compare ``∫_0^∞ r_{H,θ}²`` computed directly with the two candidate
    rescalings of ``σ_H²``: ``θ^{-2H}σ_H²`` and ``θ^{-4H-1}σ_H²``.
    The latter follows from ``r_θ(t) = θ^{-2H}r_1(θt)``.
    """
    direct = integral_r_squared(KernelContext(NoiseModel.fbm(hurst), theta))
    base = sigma_H2(hurst)
    return {
        'direct': direct,
        'variance_scaling': theta ** (-2 * hurst) * base,
        'self_similar_scaling': theta ** (-4 * hurst - 1) * base,
    }


def composite_nodes(T, order=Q_PANEL_ORDER, panels=4):
    """Nodes and weights of composite Gauss-Legendre on [0, T]."""
    u, w = gauss_legendre(order)
    edges = np.linspace(0, T, panels + 1)
    width = np.diff(edges)[:, None]
    return (edges[:-1, None] + width * u).ravel(), (width * w).ravel()


def quadratic_form_moments(cov, T, order=Q_PANEL_ORDER, panels=4):
    """
    Second and fourth moments of ``Q_T = (1/T)∫_0^T (X_t² - E X_t²) dt`` for a
    centred Gaussian ``X`` with covariance ``cov(t, s)``.

    With the weighted Gram matrix ``M = W^½ Γ W^½`` on composite
    Gauss-Legendre nodes, ``∬γ² ≈ ‖M‖_F²`` and the cyclic fourfold integral
    ``≈ ‖M²‖_F²``, so that::

        E[Q²] = 2∬γ²/T²
        E[Q⁴] = 12(∬γ²/T²)² + 48·(cyclic)/T⁴

    :param cov: vectorised covariance ``cov(t, s)``.
    :return: ``(q2, q4)``.
    """
    _check_horizon(T)
    nodes, weights = composite_nodes(T, order, panels)
    root = np.sqrt(weights)
    gram = root[:, None] * cov(nodes[:, None], nodes[None, :]) * root[None, :]
    second = np.sum(gram ** 2)
    cyclic = np.sum((gram @ gram) ** 2)
    q2 = 2 * second / T ** 2
    q4 = 12 * (second / T ** 2) ** 2 + 48 * cyclic / T ** 4
    return q2, q4


def q_moments_exact(ctx, T, order=Q_PANEL_ORDER, panels=None):
    """
    :func:`quadratic_form_moments` for the zero-start solution, with γ_θ
    assembled from a verified spline of r.

    :param panels: number of panels, by default one per unit of θT with at
        least 4 and at most 64.
    """
    _check_horizon(T)
    if panels is None:
        panels = int(min(max(4, np.ceil(ctx.theta * T)), Q_MAX_PANELS))
    r = r_interpolant(ctx, T)
    theta, psi = ctx.theta, ctx.psi_value

    def cov(t, s):
        return (r(np.abs(t - s)) + np.exp(-theta * (t + s)) * psi
                - np.exp(-theta * t) * r(s) - np.exp(-theta * s) * r(t))
    return quadratic_form_moments(cov, T, order, panels)


def fourth_moment_bound(q2, q4):
    """
    Kolmogorov-distance bound ``2√(1/6)·√(E[F⁴] - 3)`` for the standardised
    second-chaos variable ``F = Q_T/√q2``.
    """
    if q2 <= 0:
        raise DomainError('q2 must be positive, got {}.'.format(q2))
    return FOURTH_MOMENT_CONSTANT * np.sqrt(max(0.0, q4 / q2 ** 2 - 3))


@dataclass(frozen=True)
class RateDescriptor(object):
    """
    Berry-Esseen rate of a model: ``T^{-exponent}`` for the polynomial
    regimes, ``1/√log T`` for ``log_rate`` and none beyond H = 3/4.
    """
    regime: str
    exponent: float = None
    hurst: float = None

    def rate(self, T):
        if self.regime in (CLASSICAL, SLOW_POLYNOMIAL):
            return T ** -self.exponent
        elif self.regime == LOG_RATE:
            return 1 / np.sqrt(np.log(T))
        return np.nan


def effective_hurst(model):
    """Largest Hurst index among the leaves of an increment model."""
    return max(0.5 if leaf.kind == BROWNIAN else leaf.hurst for leaf in model.leaves())


def rate_regime(model, H_effective=None):
    """
    Rate regime of the alternative estimator.

    Lamperti models decay exponentially and are classical. For increment
    models with effective Hurst index H: classical for H <= 1/2,
    ``T^{-(3-4H)/2}`` for 1/2 < H < 3/4, ``1/√log T`` at 3/4 and none above.

    :param H_effective: overrides the largest Hurst index of the leaves.
    :return: :class:`RateDescriptor`.
    """
    if not model.is_increment:
        return RateDescriptor(CLASSICAL, 0.5)
    hurst = effective_hurst(model) if H_effective is None else H_effective
    if hurst <= 0.5:
        return RateDescriptor(CLASSICAL, 0.5, hurst)
    elif hurst < 0.75:
        return RateDescriptor(SLOW_POLYNOMIAL, (3 - 4 * hurst) / 2, hurst)
    elif hurst == 0.75:
        return RateDescriptor(LOG_RATE, None, hurst)
    return RateDescriptor(NO_RATE, None, hurst)


@dataclass
class AsymptoticsReport(object):
    model: NoiseModel
    theta: float
    T: float
    w: float
    R: float
    rate_regime: str
    be_bound: float
    sigma2_classical: float = None
    q2_exact: float = None
    q4_exact: float = None

    def to_dict(self):
        out = asdict(self)
        out['model'] = self.model.to_dict()
        return out


def asymptotics_report(ctx, T, with_moments=False):
    """
    Collect w, R, the classical variance (when ``∫r²`` converges), the rate
    regime and optionally the exact Q-moments.
    """
    w = w_T(ctx, T)
    regime = rate_regime(ctx.model)
    try:
        sigma2 = sigma2_classical(ctx)
    except NonIntegrable:
        sigma2 = None
    report = AsymptoticsReport(
        model=ctx.model, theta=ctx.theta, T=float(T), w=w, R=R_T(ctx, T, w=w),
        rate_regime=regime.regime, be_bound=float(regime.rate(T)),
        sigma2_classical=sigma2
    )
    if with_moments:
        report.q2_exact, report.q4_exact = q_moments_exact(ctx, T)
    return report
