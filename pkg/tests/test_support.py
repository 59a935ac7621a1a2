# SPDX-FileCopyrightText: 2024 aefit developers
#
# SPDX-License-Identifier: MIT

"""
This module contains tests for functions in the :mod:`aefit.core.support` module.
"""
import warnings

import numpy as np
import pytest
import sympy
from scipy import special
from scipy.integrate import IntegrationWarning

from aefit.core.support import (
    sympy_to_py, cached_property, gauss_legendre, gauss_laguerre,
    geometric_edges, integrate_panels, central_differences
)


def test_sympy_to_py():
    x = sympy.Symbol('x', positive=True)
    func = sympy_to_py(x * sympy.gamma(x), [x])
    assert func(2.5) == pytest.approx(2.5 * special.gamma(2.5))
    assert func(np.array([1.0, 2.0])) == pytest.approx([1.0, 2.0])

    # Constant expressions still broadcast over their input.
    constant = sympy_to_py(sympy.Float(3.0), [x])
    assert constant(np.ones(4)).shape == (4,)
    assert np.all(constant(np.ones(4)) == 3.0)


def test_cached_property():
    class A(object):
        def __init__(self):
            self.counter = 0

        @cached_property
        def f(self):
            self.counter += 1
            return 2

    a = A()
    # Delete a.f before a cache was set will fail silently.
    del a.f
    assert a.f == 2
    assert hasattr(a, '{}_f'.format(cached_property.base_str))
    assert a.f == 2
    assert a.counter == 1
    del a.f
    assert a.f == 2
    assert a.counter == 2
    with pytest.raises(AttributeError):
        # Setting is not allowed.
        a.f = 3


def test_gauss_legendre():
    nodes, weights = gauss_legendre(8)
    assert np.all((nodes > 0) & (nodes < 1))
    assert np.sum(weights) == pytest.approx(1.0)
    # Exact for polynomials up to degree 15.
    assert np.sum(weights * nodes ** 15) == pytest.approx(1 / 16.)
    with pytest.raises(ValueError):
        nodes[0] = 0.5
    assert gauss_legendre(8)[0] is nodes


@pytest.mark.parametrize('alpha', [0.0, 0.6, 1.4])
def test_gauss_laguerre(alpha):
    nodes, weights = gauss_laguerre(32, alpha)
    assert np.sum(weights) == pytest.approx(special.gamma(alpha + 1), rel=1e-12)
    assert np.sum(weights * nodes ** 3) == pytest.approx(special.gamma(alpha + 4), rel=1e-10)


def test_geometric_edges():
    edges = geometric_edges(100.0, 1.0)
    assert edges[0] == 0.0
    assert edges[1] == pytest.approx(1e-3)
    assert edges[-1] == pytest.approx(100.0)
    assert np.all(np.diff(edges) > 0)

    # The first panel never exceeds half the interval.
    short = geometric_edges(1e-4, 1.0)
    assert short[1] == pytest.approx(0.5e-4)


def test_integrate_panels():
    edges = geometric_edges(50.0, 1.0)
    value = integrate_panels(lambda t: np.exp(-t), edges)
    assert value == pytest.approx(-np.expm1(-50.0), rel=1e-12)

    # A square-root cusp converges slowly and triggers the warning.
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter('always')
        integrate_panels(np.sqrt, np.array([0.0, 1.0]), order=2, rtol=1e-15,
                         max_doublings=1)
    assert any(issubclass(w.category, IntegrationWarning) for w in caught)


def test_central_differences():
    first, second = central_differences(np.sin, 1.0, 1e-3)
    assert first == pytest.approx(np.cos(1.0), rel=1e-10)
    assert second == pytest.approx(-np.sin(1.0), rel=1e-7)
