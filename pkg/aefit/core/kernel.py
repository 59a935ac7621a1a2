# SPDX-FileCopyrightText: 2024 aefit developers
#
# SPDX-License-Identifier: MIT

"""
Numerical machinery for one pair (noise model, θ): the stationary variance
map ψ with its derivatives and inverse, the stationary autocovariance
``r_θ`` and the covariance ``γ_θ`` of the zero-start solution.

For increment models with power-law leaves ``v(t) = t**p`` the stationary
autocovariance scales as ``r_θ(t) = θ^{-p} r_1(θt)`` and the double integral
over the two-sided noise collapses to a single integral::

    r_1(τ) = ½[D(τ) - ∫_0^τ e^{-(τ-s)} D(s) ds],
    D(x) = e^x Γ(p+1, x) - x^p,

which is evaluated by Gauss-Legendre quadrature on a sliding window. The
tensor Gauss-Laguerre form of the same quantity is kept as an oracle in
:func:`r_double_quadrature`.
"""
import warnings
from functools import lru_cache

import numpy as np
from scipy import special, optimize
from scipy.integrate import IntegrationWarning
from scipy.interpolate import CubicSpline
import sympy

from aefit.core.noise import (
    NoiseModel, DomainError, FlavorError, LAMPERTI_FBM, LAMPERTI_BIFBM,
    FBM, eval_g, eval_v, theta as theta_symbol
)
from aefit.core.support import (
    cached_property, sympy_to_py, gauss_laguerre, gauss_legendre,
    central_differences
)

DEFAULT_QUADRATURE_ORDER = 96
CROSS_CHECK_ORDER = 128
PSI_QUADRATURE_RTOL = 1e-8
BRACKET = (1e-6, 1e6)
BRACKET_EXPANSIONS = 30
BISECTION_ITERATIONS = 64
INVERSE_RTOL = 1e-10
FINITE_DIFFERENCE_STEP = 1e-4

# D(x) switches to its asymptotic series beyond this point.
_ASYMPTOTIC_SWITCH = 50.0
_SERIES_TERMS = 30
# e^{-50} bounds the discarded part of the memory integral.
_MEMORY_WINDOW = 50.0
_MEMORY_ORDER = 96


class NumericsError(ArithmeticError):
    """
    Raised when a quadrature, root finder or evaluation does not produce a
    trustworthy finite number.
    """
    pass


class EstimateOutOfRange(NumericsError):
    """
    Raised when a value cannot be inverted through ψ because it lies outside
    the range attained on the expanded bracket.
    """
    def __init__(self, message, value=None, psi_low=None, psi_high=None):
        super(EstimateOutOfRange, self).__init__(message)
        self.value = value
        self.psi_low = psi_low
        self.psi_high = psi_high


@lru_cache(maxsize=None)
def psi_functions(model):
    """
    Lambdified ``(ψ, ψ′, ψ″)`` of ``model`` as functions of θ. The derivatives
    are obtained by symbolic differentiation of the closed forms.
    """
    expr = model.psi_expr
    first = sympy.diff(expr, theta_symbol)
    second = sympy.diff(first, theta_symbol)
    return tuple(sympy_to_py(e, [theta_symbol]) for e in (expr, first, second))


def _as_output(values, like):
    """Return a float for scalar input, an array otherwise."""
    if np.ndim(like) == 0:
        return float(np.asarray(values).reshape(-1)[0])
    return values


def _require_finite(values, what):
    if not np.all(np.isfinite(values)):
        raise NumericsError('Non-finite value encountered while evaluating {}.'.format(what))
    return values


class KernelContext(object):
    """
    Cached numerical machinery for one ``(model, θ)``.

    Contexts are immutable after construction and compare equal when their
    model, θ and quadrature order agree, so they can key caches of covariance
    factorisations. ψ and ψ′ are computed on first access only.
    """
    def __init__(self, model, theta, quadrature_order=DEFAULT_QUADRATURE_ORDER):
        """
        :param model: :class:`~aefit.core.noise.NoiseModel`.
        :param theta: mean-reversion parameter, > 0.
        :param quadrature_order: Gauss-Laguerre node count for the quadrature
            routes.
        """
        if not isinstance(model, NoiseModel):
            raise TypeError('Expected a NoiseModel, got {!r}.'.format(model))
        theta = float(theta)
        if not np.isfinite(theta) or theta <= 0:
            raise DomainError('theta must be a positive finite number, got {}.'.format(theta))
        self.model = model
        self.theta = theta
        self.quadrature_order = int(quadrature_order)

    def _key(self):
        return self.model, self.theta, self.quadrature_order

    def __eq__(self, other):
        return isinstance(other, KernelContext) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return 'KernelContext({}, theta={})'.format(self.model, self.theta)

    @cached_property
    def psi_value(self):
        return psi(self)

    @cached_property
    def psi_derivative_values(self):
        return psi_derivatives(self)

    @property
    def psi_prime_value(self):
        return self.psi_derivative_values[0]

    def r(self, t):
        """Shorthand for :func:`r_stationary`."""
        return r_stationary(self, t)

    def gamma(self, t, s):
        """Shorthand for :func:`gamma_cov`."""
        return gamma_cov(self, t, s)

    def with_theta(self, theta):
        """A context for the same model at another θ."""
        return KernelContext(self.model, theta, self.quadrature_order)


def psi(ctx):
    """
    Stationary variance ``ψ(θ) = (θ/2)∫_0^∞ e^{-θt} v(t) dt``, from the
    Gamma-function closed form (``HΓ(2H)θ^{-2H}`` per fbm leaf) or, for the
    Lamperti models, ``(H′/θ)^{2H′}``.

    :param ctx: :class:`KernelContext`.
    :return: ψ(θ) > 0.
    """
    value = float(psi_functions(ctx.model)[0](ctx.theta))
    if not np.isfinite(value) or value <= 0:
        raise NumericsError('psi({}) evaluated to {}.'.format(ctx.theta, value))
    return value


def _psi_quadrature_at(ctx, order):
    total = 0.0
    for leaf in ctx.model.leaves():
        # Weight u^p e^{-u} absorbs the algebraic behaviour of v at 0.
        alpha = leaf.exponent
        u, w = gauss_laguerre(order, alpha)
        total += 0.5 * np.sum(w * eval_v(leaf, u / ctx.theta) / u ** alpha)
    return total


def psi_quadrature(ctx, order=None, rtol=PSI_QUADRATURE_RTOL):
    """
    Gauss-Laguerre evaluation of ``½∫_0^∞ e^{-u} v(u/θ) du``, leaf by leaf.
    Convergence is verified by comparing with a 128-node rule.

    :param ctx: :class:`KernelContext` of an increment model.
    :param order: node count, defaults to ``ctx.quadrature_order``.
    :param rtol: allowed relative disagreement of the two orders.
    :return: ψ(θ).
    :raises NumericsError: if the two orders disagree by more than ``rtol``.
    :raises FlavorError: for Lamperti models, which have no variance function.
    """
    order = ctx.quadrature_order if order is None else order
    value = _psi_quadrature_at(ctx, order)
    check = _psi_quadrature_at(ctx, max(CROSS_CHECK_ORDER, order + 32))
    if not np.isfinite(value) or abs(value - check) > rtol * abs(check):
        raise NumericsError(
            'psi quadrature did not converge: {} vs {}.'.format(value, check)
        )
    return float(value)


def psi_derivatives(ctx, method='analytic'):
    """
    ``(ψ′(θ), ψ″(θ))``.

    :param ctx: :class:`KernelContext`.
    :param method: ``'analytic'`` differentiates the closed forms
        symbolically; ``'finite_difference'`` uses central differences on ψ
        with step ``1e-4·θ``.
    :return: tuple ``(psi_prime, psi_second)``.
    """
    psi_fn, first_fn, second_fn = psi_functions(ctx.model)
    if method == 'analytic':
        first, second = float(first_fn(ctx.theta)), float(second_fn(ctx.theta))
    elif method == 'finite_difference':
        first, second = central_differences(
            lambda x: float(psi_fn(x)), ctx.theta, FINITE_DIFFERENCE_STEP * ctx.theta
        )
    else:
        raise ValueError('Unknown differentiation method {!r}.'.format(method))
    if not (np.isfinite(first) and np.isfinite(second)):
        raise NumericsError('psi derivatives are not finite at theta={}.'.format(ctx.theta))
    return first, second


def psi_inverse(model, y, bracket=BRACKET, iterations=BISECTION_ITERATIONS):
    """
    Solve ``ψ(θ) = y`` by bisection in log θ.

    The bracket is expanded geometrically until it encloses the root; ψ is a
    strictly decreasing bijection of (0, ∞), so the root is unique.

    :param model: :class:`~aefit.core.noise.NoiseModel` or
        :class:`KernelContext` (only its model is used).
    :param y: target value, > 0.
    :return: θ with ``|ψ(θ) - y| <= 1e-10·max(1, y)``.
    :raises EstimateOutOfRange: if ``y`` is not attained on the expanded
        bracket.
    """
    if isinstance(model, KernelContext):
        model = model.model
    psi_fn = psi_functions(model)[0]
    lo, hi = bracket
    y = float(y)
    if not np.isfinite(y) or y <= 0:
        raise EstimateOutOfRange(
            'Cannot invert psi at {}: psi only takes positive values.'.format(y),
            value=y, psi_low=float(psi_fn(hi)), psi_high=float(psi_fn(lo))
        )
    for _ in range(BRACKET_EXPANSIONS):
        if psi_fn(lo) >= y:
            break
        lo /= 10.
    for _ in range(BRACKET_EXPANSIONS):
        if psi_fn(hi) <= y:
            break
        hi *= 10.
    psi_high, psi_low = float(psi_fn(lo)), float(psi_fn(hi))
    if not psi_low <= y <= psi_high:
        raise EstimateOutOfRange(
            '{} lies outside the attainable range [{}, {}].'.format(y, psi_low, psi_high),
            value=y, psi_low=psi_low, psi_high=psi_high
        )

    def excess(log_theta):
        return float(psi_fn(np.exp(log_theta))) - y

    root, info = optimize.bisect(
        excess, np.log(lo), np.log(hi), xtol=1e-14, maxiter=iterations,
        full_output=True, disp=False
    )
    estimate = float(np.exp(root))
    residual = abs(float(psi_fn(estimate)) - y)
    if not info.converged and residual > INVERSE_RTOL * max(1.0, y):
        raise NumericsError('psi inversion did not converge: {}'.format(info.flag))
    return estimate


def _incomplete_gamma_excess(p, x):
    """``D(x) = e^x Γ(p+1, x) - x^p`` for ``x >= 0``."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x <= _ASYMPTOTIC_SWITCH
    xs = x[small]
    out[small] = special.gamma(p + 1) * special.gammaincc(p + 1, xs) * np.exp(xs) - xs ** p
    xl = x[~small]
    if xl.size:
        coefficient, series = 1.0, np.zeros_like(xl)
        for k in range(1, _SERIES_TERMS + 1):
            coefficient *= p - k + 1
            series += coefficient * xl ** -k
        out[~small] = xl ** p * series
    return out


def _unit_power_r(p, tau):
    """Stationary autocovariance for ``v(t) = t**p`` at θ = 1."""
    tau = np.asarray(tau, dtype=float)[:, None]
    u, w = gauss_legendre(_MEMORY_ORDER)
    lower = np.maximum(tau - _MEMORY_WINDOW, 0.0)
    near = lower == 0
    # s = τu² removes the s^p singularity of D at the origin.
    s = np.where(near, tau * u ** 2, lower + (tau - lower) * u)
    jacobian = np.where(near, 2 * tau * u, tau - lower)
    memory = np.sum(w * jacobian * np.exp(s - tau) * _incomplete_gamma_excess(p, s), axis=1)
    return 0.5 * (_incomplete_gamma_excess(p, tau[:, 0]) - memory)


def _leaf_r(leaf, theta, t):
    p = leaf.exponent
    if p == 1.0:
        return 0.5 * np.exp(-theta * t) / theta
    return theta ** -p * _unit_power_r(p, theta * t)


def _lamperti_r(model, theta, t):
    index = model.self_similarity_index
    variance = (index / theta) ** (2 * index)
    growth = theta * t / index
    x = np.exp(-growth)
    tiny = x < 1e-8
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if model.kind == LAMPERTI_FBM:
            hurst = model.hurst
            log_bracket = np.where(
                tiny, np.log(2 * hurst) - growth,
                np.log(-np.expm1(2 * hurst * np.log1p(-np.minimum(x, 1.0))))
            )
            lead = np.exp(hurst * growth + log_bracket)
            return 0.5 * variance * (lead + np.exp(-hurst * growth))
        hurst, kappa = model.hurst, model.kappa
        # Both terms of the bracket are positive.
        log_bracket = np.where(
            tiny,
            np.logaddexp(np.log(kappa) - 2 * hurst * growth,
                         np.log(2 * index) - growth),
            np.log(np.expm1(kappa * np.log1p(x ** (2 * hurst)))
                   - np.expm1(2 * index * np.log1p(-np.minimum(x, 1.0))))
        )
        return 2.0 ** -kappa * variance * np.exp(index * growth + log_bracket)


def r_stationary(ctx, t):
    """
    Stationary autocovariance ``r_θ(t) = Cov(U_t, U_0)``.

    Increment models sum the contributions of their leaves (independent noises
    add covariances). Lamperti models use the exact covariance of
    ``e^{-θt} Y_{a(t)}`` with ``a(t) = (H′/θ)e^{θt/H′}``.

    :param ctx: :class:`KernelContext`.
    :param t: nonnegative float or array.
    :return: ``r_θ(t)``, float for scalar input.
    :raises NumericsError: on non-finite results.
    """
    t_array = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_array < 0):
        raise DomainError('r is evaluated at nonnegative lags only.')
    flat = t_array.ravel()
    if ctx.model.is_increment:
        values = sum(_leaf_r(leaf, ctx.theta, flat) for leaf in ctx.model.leaves())
    else:
        values = _lamperti_r(ctx.model, ctx.theta, flat)
    values = _require_finite(np.asarray(values, dtype=float), 'r').reshape(t_array.shape)
    return _as_output(values, t)


def gamma_cov(ctx, t, s):
    """
    Covariance of the zero-start solution::

        γ_θ(t, s) = r(t-s) + e^{-θ(t+s)} r(0) - e^{-θt} r(s) - e^{-θs} r(t)

    Broadcasts over array arguments.
    """
    t_arr, s_arr = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
    if np.any(t_arr < 0) or np.any(s_arr < 0):
        raise DomainError('gamma_cov is defined for nonnegative times only.')
    theta = ctx.theta
    values = (np.asarray(r_stationary(ctx, np.abs(t_arr - s_arr)))
              + np.exp(-theta * (t_arr + s_arr)) * ctx.psi_value
              - np.exp(-theta * t_arr) * np.asarray(r_stationary(ctx, s_arr))
              - np.exp(-theta * s_arr) * np.asarray(r_stationary(ctx, t_arr)))
    if np.ndim(t) == 0 and np.ndim(s) == 0:
        return float(values)
    return values


def fou_r_asymptote(hurst, theta, t):
    """
    Leading term ``H(2H-1)θ^{-2}t^{2H-2}`` of the fractional OU
    autocovariance for large ``t``.

    :raises DomainError: for ``H = 1/2`` (exponential decay, no power tail).
    """
    if not 0 < hurst < 1 or hurst == 0.5:
        raise DomainError('The power-law tail exists for H in (0, 1) without 1/2, got {}.'.format(hurst))
    if np.any(np.asarray(t) <= 0):
        raise DomainError('The asymptote is evaluated at t > 0.')
    return hurst * (2 * hurst - 1) * theta ** -2 * np.asarray(t, dtype=float) ** (2 * hurst - 2)


def fou_r_asymptote_terms(model, theta):
    """
    Power-law tail of ``r_θ`` as a list of ``(coefficient, exponent)``,
    one per fbm leaf with H ≠ 1/2. Empty for exponentially decaying models.
    """
    if not model.is_increment:
        return []
    return [(leaf.hurst * (2 * leaf.hurst - 1) * theta ** -2, 2 * leaf.hurst - 2)
            for leaf in model.leaves() if leaf.kind == FBM and leaf.hurst != 0.5]


def lamperti_decay_rate(model, theta):
    """
    Exponential decay rate of the Lamperti stationary covariance:
    ``θ·min(1, 1/H - 1)`` for lamperti-fbm and
    ``θ·min(2/K - 1, 1/(HK) - 1)`` for lamperti-bifbm.
    """
    if model.kind == LAMPERTI_FBM:
        return theta * min(1.0, 1.0 / model.hurst - 1.0)
    elif model.kind == LAMPERTI_BIFBM:
        return theta * min(2.0 / model.kappa - 1.0,
                           1.0 / (model.hurst * model.kappa) - 1.0)
    raise FlavorError('{} is not a Lamperti model.'.format(model.kind))


def bifractional_appendix_formula(hurst, kappa, theta, t):
    """
    The closed form ``2^{-K}e^{-θt}[(a^{2H}+1)^K - |a-1|^{2HK}]`` with
    ``a = H e^{t/H}``. θ enters only through the prefactor, so this is not the
    covariance of a stationary process for θ ≠ 1; it is kept for decay-rate
    comparisons with :func:`r_stationary`.
    """
    t = np.asarray(t, dtype=float)
    clock = hurst * np.exp(t / hurst)
    return 2.0 ** -kappa * np.exp(-theta * t) * (
        (clock ** (2 * hurst) + 1) ** kappa - np.abs(clock - 1) ** (2 * hurst * kappa)
    )


def r_double_quadrature(ctx, t, order=DEFAULT_QUADRATURE_ORDER, printed_signs=False):
    """
    Oracle for ``r_θ(t)`` from the two-sided noise covariance g::

        r_θ(t) = -∫_0^∞ e^{-x} g(t, -x/θ) dx
                 + ∫_0^∞∫_0^∞ e^{-x-y} g(t - x/θ, -y/θ) dx dy

    The double integral is split where its integrand has kinks (at ``x = θt``
    and ``y = -θ(t - x/θ)``), each piece by Gauss-Legendre or shifted
    Gauss-Laguerre rules.

    :param ctx: :class:`KernelContext` of an increment model.
    :param t: lag, a nonnegative float.
    :param printed_signs: return the value with both signs flipped, the
        variant ``θ∫e^{θs}g(t,s)ds - θ²e^{-θt}∬...``. It gives
        ``-e^{-θt}/(2θ)`` for Brownian noise.
    """
    if not ctx.model.is_increment:
        raise FlavorError('The double quadrature needs a variance function.')
    model, theta, t = ctx.model, ctx.theta, float(t)
    x_lag, w_lag = gauss_laguerre(order)
    u, w_leg = gauss_legendre(order)

    first = -np.sum(w_lag * eval_g(model, t, -x_lag / theta))

    def inner(a):
        a = np.asarray(a, dtype=float)[:, None]
        kink = np.where(a < 0, -theta * a, 0.0)
        y = kink * u
        piece = np.sum(kink * w_leg * np.exp(-y) * eval_g(model, a, -y / theta), axis=1)
        tail = np.sum(w_lag * eval_g(model, a, -(kink + x_lag) / theta), axis=1)
        return piece + np.exp(-kink[:, 0]) * tail

    split = theta * t
    x_near = split * u
    second = np.sum(split * w_leg * np.exp(-x_near) * inner(t - x_near / theta))
    second += np.exp(-split) * np.sum(w_lag * inner(t - (split + x_lag) / theta))

    value = float(first + second)
    _require_finite(value, 'the double quadrature of r')
    return -value if printed_signs else value


class RInterpolant(object):
    """
    Cubic spline of ``r_θ`` in ``log t`` on ``[t_min, t_max]`` with direct
    evaluation below ``t_min``, where ``r`` has its ``t^{2H}`` cusp.
    The spline is refined until it matches direct evaluation to
    ``tolerance·ψ`` at the midpoints of its knots.
    """
    def __init__(self, ctx, t_max, tolerance=1e-6, knots=256, max_refinements=4):
        self.ctx = ctx
        self.t_max = float(t_max)
        self.t_min = min(1e-3 / ctx.theta, 0.5 * self.t_max)
        scale = tolerance * ctx.psi_value
        for _ in range(max_refinements + 1):
            logs = np.linspace(np.log(self.t_min), np.log(self.t_max), knots)
            self.spline = CubicSpline(logs, r_stationary(ctx, np.exp(logs)))
            middles = 0.5 * (logs[1:] + logs[:-1])
            error = np.max(np.abs(self.spline(middles) - r_stationary(ctx, np.exp(middles))))
            if error <= scale:
                break
            knots *= 2
        else:
            warnings.warn('r interpolant reached {} knots with error {}.'.format(knots, error),
                          IntegrationWarning)
        self.knots = knots

    def __call__(self, t):
        shape = np.shape(t)
        t = np.atleast_1d(np.asarray(t, dtype=float)).ravel()
        out = np.empty_like(t)
        direct = t < self.t_min
        if np.any(direct):
            out[direct] = r_stationary(self.ctx, t[direct])
        out[~direct] = self.spline(np.log(np.minimum(t[~direct], self.t_max)))
        return out.reshape(shape)


def r_interpolant(ctx, t_max, tolerance=1e-6):
    """
    Fast evaluator of ``r_θ`` on ``[0, t_max]``. Models whose ``r`` is
    elementary get a direct evaluator instead of a spline.
    """
    model = ctx.model
    if model.is_increment and any(leaf.exponent != 1.0 for leaf in model.leaves()):
        return RInterpolant(ctx, t_max, tolerance=tolerance)

    def direct(t):
        return np.asarray(r_stationary(ctx, np.asarray(t, dtype=float)))
    return direct
