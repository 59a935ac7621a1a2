# SPDX-FileCopyrightText: 2024 aefit developers
#
# SPDX-License-Identifier: MIT

from dataclasses import replace

import numpy as np
import pytest
from scipy.integrate import trapezoid

from aefit.core.noise import NoiseModel, DomainError
from aefit.core.kernel import KernelContext, gamma_cov
from aefit.core.sampler import Grid, PathSample, simulate_solution
from aefit.core.estimator import DegenerateInput, ae_point_estimate
from aefit.core.baselines import UnsupportedModel, lse_ito, mle_brownian

BROWNIAN = NoiseModel.brownian()


def test_lse_fixture():
    """
    The numerator vanishes when X_T² equals its expectation.
    """
    grid = Grid(0.01, 1000)
    moment = gamma_cov(KernelContext(BROWNIAN, 1.0), 10.0, 10.0)
    values = np.sqrt(moment) * grid.times / 10.0
    path = PathSample(grid, values, BROWNIAN, theta=1.0, kind='X')
    assert lse_ito(path, theta_ref=1.0) == pytest.approx(0.0, abs=1e-14)


def test_lse_theta_ref():
    path = simulate_solution(NoiseModel.fbm(0.7), 1.0, Grid(0.1, 1000), seed=17)
    energy = trapezoid(path.values ** 2, dx=0.1)
    shift = lse_ito(path, theta_ref=1.1) - lse_ito(path, theta_ref=1.0)
    moments = [gamma_cov(KernelContext(path.model, theta), 100.0, 100.0) for theta in (1.0, 1.1)]
    assert shift == pytest.approx(0.5 * (moments[1] - moments[0]) / energy, rel=1e-10)

    plug_in, _ = ae_point_estimate(path.values, 0.1, path.model)
    assert lse_ito(path) == pytest.approx(lse_ito(path, theta_ref=plug_in), rel=1e-12)


def test_lse_errors():
    grid = Grid(0.1, 10)
    with pytest.raises(DegenerateInput):
        lse_ito(PathSample(grid, np.zeros(11), BROWNIAN, kind='X'), theta_ref=1.0)
    with pytest.raises(DomainError):
        lse_ito(PathSample(grid, np.ones(11), BROWNIAN, kind='U'), theta_ref=1.0)


def test_mle_fixture():
    """
    For the noiseless decay e^{-θt} the forward sum recovers θ.
    """
    grid = Grid(1e-3, 10000)
    path = PathSample(grid, np.exp(-2.0 * grid.times), BROWNIAN, kind='X')
    assert mle_brownian(path) == pytest.approx(2.0, rel=1e-2)


def test_mle_errors():
    grid = Grid(0.1, 10)
    with pytest.raises(UnsupportedModel):
        mle_brownian(PathSample(grid, np.ones(11), NoiseModel.fbm(0.7), kind='X'))
    with pytest.raises(UnsupportedModel):
        mle_brownian(PathSample(grid, np.ones(11), NoiseModel.fbm(0.5), kind='X'))
    with pytest.raises(DegenerateInput):
        mle_brownian(PathSample(grid, np.zeros(11), BROWNIAN, kind='X'))
    with pytest.raises(DomainError):
        mle_brownian(PathSample(grid, np.ones(11), BROWNIAN, kind='U'))
    assert issubclass(UnsupportedModel, TypeError)


def test_mle_consistency():
    grid = Grid(0.01, 50000)
    estimates = np.array([mle_brownian(simulate_solution(BROWNIAN, 1.0, grid, seed=31, stream=k))
                          for k in range(500)])
    assert 0.9 <= np.mean(estimates) <= 1.1
    assert np.var(estimates, ddof=1) == pytest.approx(0.004, rel=0.3)


def test_mle_step_override():
    path = simulate_solution(BROWNIAN, 1.0, Grid(0.1, 1000), seed=2)
    assert mle_brownian(path, dt=0.2) == pytest.approx(mle_brownian(path) / 2)
    rescaled = replace(path, grid=Grid(0.2, 1000))
    assert mle_brownian(rescaled) == pytest.approx(mle_brownian(path, dt=0.2))
