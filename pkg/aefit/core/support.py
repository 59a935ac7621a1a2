# SPDX-FileCopyrightText: 2024 aefit developers
#
# SPDX-License-Identifier: MIT

"""
This module contains support functions used throughout aefit: turning sympy
expressions into numerical functions, caching expensive attributes, cached
Gauss rules and the composite quadrature every covariance integral is built
on.
"""
import warnings
from functools import lru_cache

import numpy as np
from scipy import special
from scipy.integrate import IntegrationWarning
from sympy.utilities.lambdify import lambdify


def sympy_to_py(expr, args):
    """
    Turn a symbolic expression into a vectorised numerical function of
    ``args``. Special functions are mapped onto :mod:`scipy.special`.

    :param expr: sympy expression.
    :param args: sequence of sympy symbols, the positional arguments of the
        returned function.
    :return: callable accepting floats or numpy arrays.
    """
    func = lambdify(args, expr, modules=['numpy', 'scipy'])
    constant = not expr.free_symbols

    def wrapped(*values):
        out = func(*values)
        if constant:
            # lambdify returns a bare scalar for constant expressions.
            out = out + np.zeros(np.shape(values[0]))
        return out

    wrapped.__doc__ = 'Numerical form of ``{}``.'.format(expr)
    return wrapped


class cached_property(property):
    """
    A read-only property whose value is computed on first access and stored
    on the instance. ``del obj.attr`` clears the stored value.

    Kernel contexts use it for ψ and its derivatives, which require lambdified
    sympy code and are needed over and over in tight loops.
    """
    base_str = '_cached'

    def __init__(self, *args, **kwargs):
        super(cached_property, self).__init__(*args, **kwargs)
        self.cache_attr = '{}_{}'.format(self.base_str, self.fget.__name__)

    def __get__(self, obj, objtype=None):
        if obj is None:
            return self
        try:
            return obj.__dict__[self.cache_attr]
        except KeyError:
            value = self.fget(obj)
            # Concurrent first accesses compute the same value; last write wins.
            obj.__dict__[self.cache_attr] = value
            return value

    def __delete__(self, obj):
        obj.__dict__.pop(self.cache_attr, None)


@lru_cache(maxsize=None)
def gauss_legendre(order):
    """
    Gauss-Legendre rule mapped onto [0, 1].

    :param order: number of nodes.
    :return: (nodes, weights), read-only arrays.
    """
    x, w = special.roots_legendre(order)
    nodes, weights = 0.5 * (x + 1.0), 0.5 * w
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@lru_cache(maxsize=None)
def gauss_laguerre(order, alpha=0.0):
    """
    (Generalised) Gauss-Laguerre rule for the weight ``u**alpha * exp(-u)`` on
    [0, ∞).

    :param order: number of nodes.
    :param alpha: exponent of the algebraic part of the weight, > -1.
    :return: (nodes, weights), read-only arrays.
    """
    if alpha == 0.0:
        x, w = special.roots_laguerre(order)
    else:
        x, w = special.roots_genlaguerre(order, alpha)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def geometric_edges(upper, scale, lower_fraction=1e-3, per_decade=4):
    """
    Panel edges on [0, upper]: one panel [0, a] with ``a = lower_fraction *
    scale`` followed by geometrically growing panels up to ``upper``.

    :param upper: right end point, > 0.
    :param scale: natural time scale of the integrand, e.g. 1/θ.
    :return: strictly increasing array of edges starting at 0.
    """
    first = min(lower_fraction * scale, 0.5 * upper)
    decades = np.log10(upper / first)
    count = max(2, int(np.ceil(per_decade * decades)) + 1)
    return np.concatenate(([0.0], np.geomspace(first, upper, count)))


def _composite(func, edges, order):
    u, w = gauss_legendre(order)
    left, width = edges[:-1, None], np.diff(edges)[:, None]
    nodes = left + width * u
    values = np.asarray(func(nodes.ravel()), dtype=float).reshape(nodes.shape)
    return np.sum(width * w * values)


def integrate_panels(func, edges, order=32, rtol=1e-10, max_doublings=3):
    """
    Composite Gauss-Legendre quadrature of a vectorised ``func`` over the
    panels defined by ``edges``. The order per panel is doubled until two
    successive estimates agree to ``rtol``.

    :param func: vectorised integrand.
    :param edges: increasing panel edges.
    :param order: initial number of nodes per panel.
    :param rtol: relative agreement required between successive orders.
    :param max_doublings: refinement limit; an ``IntegrationWarning`` is issued
        when it is reached.
    :return: the integral.
    """
    edges = np.asarray(edges, dtype=float)
    estimate = _composite(func, edges, order)
    for _ in range(max_doublings):
        order *= 2
        refined = _composite(func, edges, order)
        if abs(refined - estimate) <= rtol * max(abs(refined), 1e-300):
            return refined
        estimate = refined
    warnings.warn(
        'Composite quadrature did not reach rtol={} with {} nodes per '
        'panel.'.format(rtol, order), IntegrationWarning
    )
    return estimate


# Sixth order central difference weights, see scipy.misc.central_diff_weights.
_FIRST_WEIGHTS = np.array((3 / 4., -3 / 20., 1 / 60.))
_SECOND_WEIGHTS = np.array((3 / 2., -3 / 20., 1 / 90.))
_SECOND_CENTRE = -49 / 18.


def central_differences(func, x, h):
    """
    First and second derivative of a scalar function by sixth order central
    differences. Makes 6 calls to ``func``.

    :param func: scalar function.
    :param x: point of evaluation.
    :param h: step size.
    :return: (first, second) derivative estimates.
    """
    steps = h * np.arange(1, 4)
    up = np.array([func(x + step) for step in steps])
    down = np.array([func(x - step) for step in steps])
    first = np.sum(_FIRST_WEIGHTS * (up - down)) / h
    second = (np.sum(_SECOND_WEIGHTS * (up + down)) + _SECOND_CENTRE * func(x)) / h ** 2
    return first, second
