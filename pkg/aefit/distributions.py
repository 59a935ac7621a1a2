# SPDX-FileCopyrightText: 2024 aefit developers
#
# SPDX-License-Identifier: MIT

"""
The standard normal distribution, as needed for confidence intervals and
Kolmogorov-Smirnov distances. Both functions are accurate to about 1e-12
over their whole range because they rest on the complementary error
function rather than on ``1 - erf``.
"""
import numpy as np
from scipy import special

from aefit.core.noise import DomainError


def normal_cdf(x):
    """
    .. math::

        \\Phi(x) = \\frac{1}{2} \\operatorname{erfc}\\left(-\\frac{x}{\\sqrt{2}}\\right)

    :param x: float or array.
    :return: Φ(x).
    """
    return special.ndtr(x)


def normal_quantile(p):
    """
    Inverse of :func:`normal_cdf`.

    :param p: probability in [0, 1]; the end points map to ∓inf.
    :return: Φ⁻¹(p).
    """
    p_array = np.asarray(p, dtype=float)
    if np.any((p_array < 0) | (p_array > 1)) or np.any(np.isnan(p_array)):
        raise DomainError('Probabilities must lie in [0, 1], got {}.'.format(p))
    return special.ndtri(p)
