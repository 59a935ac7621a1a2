# SPDX-FileCopyrightText: 2024 aefit developers
#
# SPDX-License-Identifier: MIT

import numpy as np
import pytest
import sympy

from aefit.core.noise import (
    NoiseModel, DomainError, FlavorError, eval_v, eval_g, validate_model,
    validate_variance, theta
)


def test_constructors():
    """
    Check validation of the model parameters.
    """
    assert NoiseModel.brownian().holder_index == 0.5
    assert NoiseModel.fbm(0.7).holder_index == 0.7
    assert NoiseModel.lamperti_bifbm(0.6, 0.8).holder_index == pytest.approx(0.48)
    assert NoiseModel.lamperti_bifbm(0.6, 1.0).kappa == 1.0

    with pytest.raises(DomainError):
        NoiseModel.fbm(1.0)
    with pytest.raises(DomainError):
        NoiseModel.fbm(0.0)
    with pytest.raises(DomainError):
        NoiseModel.lamperti_bifbm(0.5, 1.2)
    with pytest.raises(DomainError):
        NoiseModel.mixed()
    with pytest.raises(DomainError):
        NoiseModel.mixed(NoiseModel.fbm(0.3), NoiseModel.lamperti_fbm(0.3))
    with pytest.raises(DomainError):
        NoiseModel('ou')


def test_flavor():
    assert NoiseModel.mixed(NoiseModel.brownian(), NoiseModel.fbm(0.3)).is_increment
    assert NoiseModel.lamperti_fbm(0.7).flavor == 'stationary'
    with pytest.raises(FlavorError):
        NoiseModel.lamperti_fbm(0.7).leaves()
    with pytest.raises(FlavorError):
        eval_v(NoiseModel.lamperti_fbm(0.7), 1.0)
    with pytest.raises(FlavorError):
        NoiseModel.fbm(0.7).self_similarity_index


def test_hashable():
    """
    Models key caches, so equal descriptions have to hash equally.
    """
    assert NoiseModel.fbm(0.7) == NoiseModel('fbm', hurst=0.7)
    assert hash(NoiseModel.fbm(0.7)) == hash(NoiseModel.fbm(0.7))
    assert NoiseModel.fbm(0.7) != NoiseModel.lamperti_fbm(0.7)
    assert len({NoiseModel.brownian(), NoiseModel.brownian()}) == 1


def test_eval_v():
    assert eval_v(NoiseModel.fbm(0.75), 4.0) == pytest.approx(8.0)
    assert eval_v(NoiseModel.brownian(), 0.0) == 0.0
    mixed = NoiseModel.mixed(NoiseModel.brownian(), NoiseModel.brownian())
    assert eval_v(mixed, 3.0) == pytest.approx(6.0)
    with pytest.raises(DomainError):
        eval_v(NoiseModel.brownian(), -1.0)


def test_mixed_is_sum_of_components():
    components = (NoiseModel.fbm(0.3), NoiseModel.fbm(0.6), NoiseModel.brownian())
    mixed = NoiseModel.mixed(*components)
    t = np.geomspace(1e-3, 1e2, 50)
    expected = sum(eval_v(component, t) for component in components)
    assert np.allclose(eval_v(mixed, t), expected, rtol=1e-14, atol=0)

    nested = NoiseModel.mixed(NoiseModel.mixed(*components[:2]), components[2])
    assert nested.leaves() == components


def test_eval_g():
    assert eval_g(NoiseModel.fbm(0.5), 2.0, 3.0) == pytest.approx(2.0)
    assert eval_g(NoiseModel.brownian(), 2.0, -1.0) == pytest.approx(0.0)

    model = NoiseModel.fbm(0.7)
    t = np.linspace(-3, 3, 13)
    tt, ss = np.meshgrid(t, t)
    assert np.array_equal(eval_g(model, tt, ss), eval_g(model, ss, tt))
    assert np.array_equal(eval_g(model, t, t), eval_v(model, np.abs(t)))


@pytest.mark.parametrize('model', [
    NoiseModel.fbm(0.2), NoiseModel.fbm(0.8), NoiseModel.brownian(),
    NoiseModel.mixed(NoiseModel.fbm(0.3), NoiseModel.fbm(0.6)),
])
def test_increment_covariance_psd(model):
    """
    Increment covariances built from g are positive semidefinite.
    """
    times = np.linspace(0, 5, 257)
    v = lambda t: eval_v(model, np.abs(t))
    left, right = times[:-1], times[1:]
    # Cov(G_b - G_a, G_d - G_c) from the variance function.
    cov = 0.5 * (v(right[:, None] - left[None, :]) + v(left[:, None] - right[None, :])
                 - v(right[:, None] - right[None, :]) - v(left[:, None] - left[None, :]))
    assert np.allclose(cov, cov.T)
    eigenvalues = np.linalg.eigvalsh(cov)
    assert eigenvalues.min() >= -1e-10 * eigenvalues.max()


def test_validate_builtin_models():
    for model in (NoiseModel.brownian(), NoiseModel.fbm(0.7), NoiseModel.fbm(0.1),
                  NoiseModel.lamperti_fbm(0.7), NoiseModel.lamperti_bifbm(0.6, 0.8)):
        report = validate_model(model)
        assert report.passed, str(report)


def test_validate_mixed_holder_index():
    """
    The Hölder index of a mixture is the smallest one of its components:
    the check passes for 0.3 and fails for 0.6.
    """
    mixed = NoiseModel.mixed(NoiseModel.fbm(0.3), NoiseModel.fbm(0.6))
    assert mixed.holder_index == 0.3
    assert validate_model(mixed).passed
    report = validate_model(mixed, holder_index=0.6)
    assert not report.passed
    assert not report['hoelder'].passed
    assert report['hoelder'].witness is not None
    assert report['strictly increasing'].passed


def test_validate_table_fixture():
    """
    A table-defined variance function that decreases between t=1 and t=2.
    """
    nodes = np.array([0.0, 1.0, 2.0, 3.0])
    table = np.array([0.0, 1.0, 0.5, 2.0])
    report = validate_variance(lambda t: np.interp(t, nodes, table), 0.5,
                               grid=nodes[1:])
    assert not report.passed
    assert report['strictly increasing'].witness == 2.0
    assert report['v(0) = 0'].passed
    assert 'FAIL at t=2.0' in str(report)


def test_psi_expr():
    psi = NoiseModel.fbm(0.5).psi_expr
    assert float(psi.subs(theta, 2.0)) == pytest.approx(0.25)
    mixed = NoiseModel.mixed(NoiseModel.brownian(), NoiseModel.fbm(0.7))
    expected = 1 / (2 * theta) + 0.7 * sympy.gamma(1.4) * theta ** -1.4
    assert float((mixed.psi_expr - expected).subs(theta, 1.3)) == pytest.approx(0.0, abs=1e-14)
    assert float(NoiseModel.lamperti_fbm(0.5).psi_expr.subs(theta, 1.0)) == pytest.approx(0.5)


def test_json_round_trip():
    model = NoiseModel.mixed(NoiseModel.brownian(), NoiseModel.fbm(0.3))
    assert NoiseModel.from_json(model.to_json()) == model
    assert NoiseModel.from_dict({'kind': 'lamperti-bifbm', 'hurst': 0.6, 'kappa': 0.8}) \
        == NoiseModel.lamperti_bifbm(0.6, 0.8)
    with pytest.raises(DomainError):
        NoiseModel.from_dict({'kind': 'fbm'})
    with pytest.raises(DomainError):
        NoiseModel.from_dict({'kind': 'fbm', 'hurst': 0.3, 'colour': 'pink'})
    with pytest.raises(DomainError):
        NoiseModel.from_dict({'hurst': 0.3})
