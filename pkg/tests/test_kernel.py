# SPDX-FileCopyrightText: 2024 aefit developers
#
# SPDX-License-Identifier: MIT

import numpy as np
import pytest
from scipy import special

from aefit.core.noise import NoiseModel, DomainError, FlavorError
from aefit.core.kernel import (
    KernelContext, NumericsError, EstimateOutOfRange, psi, psi_quadrature,
    psi_derivatives, psi_inverse, r_stationary, r_double_quadrature,
    r_interpolant, gamma_cov, fou_r_asymptote, fou_r_asymptote_terms,
    lamperti_decay_rate, bifractional_appendix_formula
)

BROWNIAN = NoiseModel.brownian()
FBM_07 = NoiseModel.fbm(0.7)


def test_context():
    ctx = KernelContext(FBM_07, 1.0)
    assert ctx == KernelContext(NoiseModel.fbm(0.7), 1)
    assert hash(ctx) == hash(KernelContext(NoiseModel.fbm(0.7), 1.0))
    assert ctx != KernelContext(FBM_07, 1.0, quadrature_order=64)
    assert ctx.with_theta(2.0).theta == 2.0
    assert ctx.psi_value is ctx.psi_value
    with pytest.raises(DomainError):
        KernelContext(FBM_07, 0.0)
    with pytest.raises(DomainError):
        KernelContext(FBM_07, np.inf)


def test_psi_closed_forms():
    assert psi(KernelContext(BROWNIAN, 2.0)) == pytest.approx(0.25)
    assert psi(KernelContext(NoiseModel.fbm(0.75), 1.0)) == pytest.approx(
        0.75 * special.gamma(1.5), rel=1e-12)
    assert psi(KernelContext(NoiseModel.lamperti_bifbm(0.6, 0.8), 1.0)) == pytest.approx(
        0.48 ** 0.96, rel=1e-12)
    assert psi(KernelContext(NoiseModel.lamperti_fbm(0.7), 2.0)) == pytest.approx(
        0.35 ** 1.4, rel=1e-12)


@pytest.mark.parametrize('hurst', [0.3, 0.5, 0.75])
@pytest.mark.parametrize('theta', [0.5, 1.0, 2.0])
def test_psi_quadrature(hurst, theta):
    """
    Gauss-Laguerre evaluation of ψ against the Gamma-function closed form.
    """
    ctx = KernelContext(NoiseModel.fbm(hurst), theta)
    assert psi_quadrature(ctx) == pytest.approx(psi(ctx), rel=1e-6)


def test_psi_quadrature_mixed():
    model = NoiseModel.mixed(BROWNIAN, NoiseModel.fbm(0.3))
    ctx = KernelContext(model, 1.5)
    assert psi_quadrature(ctx) == pytest.approx(psi(ctx), rel=1e-6)
    with pytest.raises(FlavorError):
        psi_quadrature(KernelContext(NoiseModel.lamperti_fbm(0.7), 1.0))
    # No disagreement can satisfy a negative tolerance.
    with pytest.raises(NumericsError):
        psi_quadrature(ctx, rtol=-1.0)


def test_psi_monotone():
    thetas = np.geomspace(0.01, 100, 40)
    for model in (BROWNIAN, FBM_07, NoiseModel.lamperti_bifbm(0.6, 0.8),
                  NoiseModel.mixed(NoiseModel.fbm(0.2), NoiseModel.fbm(0.9))):
        values = [psi(KernelContext(model, theta)) for theta in thetas]
        assert np.all(np.diff(values) < 0)


def test_psi_derivatives():
    first, second = psi_derivatives(KernelContext(BROWNIAN, 1.0))
    assert first == pytest.approx(-0.5)
    assert second == pytest.approx(1.0)

    ctx = KernelContext(NoiseModel.fbm(0.75), 1.0)
    first, second = psi_derivatives(ctx)
    assert first == pytest.approx(-1.5 * 0.75 * special.gamma(1.5), rel=1e-12)
    assert second > 0
    assert ctx.psi_prime_value == first

    fd_first, fd_second = psi_derivatives(ctx, method='finite_difference')
    assert fd_first == pytest.approx(first, rel=1e-8)
    assert fd_second == pytest.approx(second, rel=1e-5)

    for model in (NoiseModel.lamperti_fbm(0.3), NoiseModel.lamperti_bifbm(0.6, 0.8)):
        first, second = psi_derivatives(KernelContext(model, 0.7))
        assert first < 0 < second
    with pytest.raises(ValueError):
        psi_derivatives(ctx, method='spectral')


def test_psi_inverse():
    assert psi_inverse(BROWNIAN, 0.25) == pytest.approx(2.0, rel=1e-12)
    for model in (BROWNIAN, FBM_07, NoiseModel.lamperti_fbm(0.7)):
        for theta in (0.1, 1.0, 7.0):
            y = psi(KernelContext(model, theta))
            estimate = psi_inverse(model, y)
            assert estimate == pytest.approx(theta, rel=1e-10)
            assert abs(psi(KernelContext(model, estimate)) - y) <= 1e-10 * max(1, y)

    # Roots far outside the initial bracket are found by expansion.
    assert psi_inverse(BROWNIAN, 1 / (2 * 1e8)) == pytest.approx(1e8, rel=1e-10)
    assert psi_inverse(KernelContext(BROWNIAN, 3.0), 1 / (2 * 1e-8)) == pytest.approx(1e-8, rel=1e-10)


def test_psi_inverse_out_of_range():
    with pytest.raises(EstimateOutOfRange) as excinfo:
        psi_inverse(BROWNIAN, -0.1)
    assert excinfo.value.value == -0.1
    assert excinfo.value.psi_low > 0
    assert excinfo.value.psi_high > excinfo.value.psi_low
    assert isinstance(excinfo.value, NumericsError)
    with pytest.raises(EstimateOutOfRange):
        psi_inverse(BROWNIAN, np.nan)


@pytest.mark.parametrize('theta', [0.5, 1.0, 2.0])
def test_r_brownian_oracle(theta):
    """
    The double quadrature reproduces the Ornstein-Uhlenbeck covariance.
    """
    ctx = KernelContext(BROWNIAN, theta)
    for t in np.linspace(0, 5, 21):
        exact = np.exp(-theta * t) / (2 * theta)
        assert r_double_quadrature(ctx, t) == pytest.approx(exact, abs=1e-4)
        assert r_stationary(ctx, t) == pytest.approx(exact, rel=1e-14)


def test_r_printed_signs():
    """
    With both signs flipped the double quadrature gives a negative variance
    for Brownian noise, so the corrected signs are the ones in use.
    """
    ctx = KernelContext(BROWNIAN, 1.0)
    for t in (0.0, 1.0, 2.5):
        printed = r_double_quadrature(ctx, t, printed_signs=True)
        assert printed == pytest.approx(-np.exp(-t) / 2, abs=1e-4)
    assert r_double_quadrature(ctx, 0.0, printed_signs=True) < 0


def test_r_fbm_oracle():
    ctx = KernelContext(FBM_07, 1.0)
    for t in (0.0, 0.5, 2.0):
        assert r_double_quadrature(ctx, t) == pytest.approx(r_stationary(ctx, t), rel=1e-4)
    with pytest.raises(FlavorError):
        r_double_quadrature(KernelContext(NoiseModel.lamperti_fbm(0.7), 1.0), 1.0)


def test_r_at_zero():
    """
    r(0) is the stationary variance, computed independently by quadrature.
    """
    ctx = KernelContext(FBM_07, 1.0)
    assert r_stationary(ctx, 0.0) == pytest.approx(psi_quadrature(ctx), rel=1e-6)
    for model in (BROWNIAN, NoiseModel.fbm(0.2), NoiseModel.lamperti_fbm(0.7),
                  NoiseModel.lamperti_bifbm(0.6, 0.8),
                  NoiseModel.mixed(BROWNIAN, NoiseModel.fbm(0.6))):
        for theta in (0.5, 2.0):
            ctx = KernelContext(model, theta)
            assert r_stationary(ctx, 0.0) == pytest.approx(ctx.psi_value, rel=1e-6)


def test_r_bounded_by_variance():
    t = np.linspace(0, 50, 501)
    for model in (FBM_07, NoiseModel.fbm(0.3), NoiseModel.lamperti_bifbm(0.6, 0.8)):
        ctx = KernelContext(model, 1.0)
        values = r_stationary(ctx, t)
        assert values.shape == t.shape
        assert np.all(np.abs(values) <= values[0] * (1 + 1e-12))


def test_r_fou_asymptote():
    ctx = KernelContext(FBM_07, 1.0)
    ratio = r_stationary(ctx, 50.0) / (0.28 * 50.0 ** -0.6)
    assert 0.9 <= ratio <= 1.1
    assert r_stationary(ctx, 50.0) == pytest.approx(0.0268, rel=0.1)

    # Far in the tail the leading term takes over completely.
    far = np.array([1e3, 1e4])
    assert r_stationary(ctx, far) == pytest.approx(fou_r_asymptote(0.7, 1.0, far), rel=1e-3)
    ctx = KernelContext(NoiseModel.fbm(0.3), 2.0)
    assert r_stationary(ctx, 1e3) == pytest.approx(fou_r_asymptote(0.3, 2.0, 1e3), rel=1e-3)


def test_fou_r_asymptote():
    assert fou_r_asymptote(0.75, 1.0, 100.0) == pytest.approx(0.0375)
    assert fou_r_asymptote(0.25, 2.0, 10.0) == pytest.approx(-9.882e-4, rel=1e-3)
    assert fou_r_asymptote(0.25, 1.0, 3.0) < 0 < fou_r_asymptote(0.6, 1.0, 3.0)
    with pytest.raises(DomainError):
        fou_r_asymptote(0.5, 1.0, 10.0)
    with pytest.raises(DomainError):
        fou_r_asymptote(0.7, 1.0, 0.0)

    mixed = NoiseModel.mixed(BROWNIAN, NoiseModel.fbm(0.7), NoiseModel.fbm(0.5))
    assert fou_r_asymptote_terms(mixed, 2.0) == [(pytest.approx(0.07), pytest.approx(-0.6))]
    assert fou_r_asymptote_terms(NoiseModel.lamperti_fbm(0.7), 1.0) == []


def test_r_mixed_is_sum():
    components = (BROWNIAN, NoiseModel.fbm(0.3), NoiseModel.fbm(0.8))
    t = np.array([0.0, 0.1, 1.0, 7.0, 60.0])
    total = r_stationary(KernelContext(NoiseModel.mixed(*components), 1.3), t)
    parts = sum(r_stationary(KernelContext(c, 1.3), t) for c in components)
    assert total == pytest.approx(parts, rel=1e-12)


def test_r_negative_lag():
    with pytest.raises(DomainError):
        r_stationary(KernelContext(BROWNIAN, 1.0), -1.0)


def test_gamma_cov():
    ctx = KernelContext(BROWNIAN, 1.0)
    t = np.linspace(0, 5, 11)
    assert gamma_cov(ctx, t, t) == pytest.approx(0.5 * -np.expm1(-2 * t), abs=1e-14)
    assert gamma_cov(ctx, 0.0, 3.0) == pytest.approx(0.0, abs=1e-15)
    assert isinstance(gamma_cov(ctx, 1.0, 2.0), float)

    ctx = KernelContext(FBM_07, 1.0)
    expected = ctx.psi_value * (1 + np.exp(-40)) - 2 * np.exp(-20) * r_stationary(ctx, 20.0)
    assert gamma_cov(ctx, 20.0, 20.0) == pytest.approx(expected, abs=1e-6)
    assert gamma_cov(ctx, 0.0, 2.0) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(DomainError):
        gamma_cov(ctx, -1.0, 1.0)


def test_gamma_cov_decay_bound():
    ctx = KernelContext(FBM_07, 1.0)
    t = np.linspace(0.1, 10, 25)
    tt, ss = np.meshgrid(t, t)
    gap = np.abs(gamma_cov(ctx, tt, ss) - r_stationary(ctx, np.abs(tt - ss)))
    assert np.all(gap <= 3 * ctx.psi_value * np.exp(-np.minimum(tt, ss)) + 1e-14)


@pytest.mark.parametrize('model', [BROWNIAN, FBM_07, NoiseModel.fbm(0.2),
                                   NoiseModel.lamperti_fbm(0.7)])
def test_gamma_cov_psd(model):
    ctx = KernelContext(model, 1.0)
    t = np.linspace(0.05, 6.4, 128)
    matrix = gamma_cov(ctx, t[:, None], t[None, :])
    assert np.allclose(matrix, matrix.T)
    assert np.linalg.eigvalsh(matrix).min() >= -1e-8 * ctx.psi_value


def _decay_slope(ctx):
    t = np.linspace(1, 10, 19)
    return np.polyfit(t, np.log(np.abs(r_stationary(ctx, t))), 1)[0]


def test_lamperti_decay():
    """
    The second kind covariances decay exponentially. For lamperti-fbm with
    H = 0.7 the exact rate is θ(1/H - 1) ≈ 0.43θ, so the fitted slope is
    compared with that rate; the bifractional model decays faster than θ/2.
    """
    ctx = KernelContext(NoiseModel.lamperti_fbm(0.7), 1.0)
    assert lamperti_decay_rate(ctx.model, 1.0) == pytest.approx(1 / 0.7 - 1)
    assert _decay_slope(ctx) <= -0.9 * lamperti_decay_rate(ctx.model, 1.0)

    ctx = KernelContext(NoiseModel.lamperti_bifbm(0.6, 0.8), 1.0)
    assert lamperti_decay_rate(ctx.model, 1.0) == pytest.approx(1 / 0.48 - 1)
    assert _decay_slope(ctx) <= -0.5

    assert lamperti_decay_rate(NoiseModel.lamperti_fbm(0.3), 2.0) == pytest.approx(2.0)
    with pytest.raises(FlavorError):
        lamperti_decay_rate(FBM_07, 1.0)


def test_lamperti_far_tail():
    """
    No overflow far beyond the range where a(t) is representable.
    """
    for model in (NoiseModel.lamperti_fbm(0.95), NoiseModel.lamperti_bifbm(0.6, 0.8)):
        ctx = KernelContext(model, 1.0)
        values = r_stationary(ctx, np.array([100.0, 1e3, 1e4]))
        assert np.all(np.isfinite(values))
        assert np.all(values >= 0)
        assert values[0] > values[1] >= values[2]


def test_bifractional_appendix_formula():
    t = np.linspace(0, 5, 11)
    one = bifractional_appendix_formula(0.6, 0.8, 1.0, t)
    two = bifractional_appendix_formula(0.6, 0.8, 2.0, t)
    # θ only enters through the prefactor.
    assert two == pytest.approx(one * np.exp(-t), rel=1e-12)
    expected = 2 ** -0.8 * ((0.6 ** 1.2 + 1) ** 0.8 - 0.4 ** 0.96)
    assert one[0] == pytest.approx(expected, rel=1e-12)


def test_r_interpolant():
    ctx = KernelContext(NoiseModel.fbm(0.3), 1.0)
    evaluate = r_interpolant(ctx, 100.0)
    rng = np.random.default_rng(3)
    t = np.concatenate([[0.0, 1e-4, 100.0], rng.uniform(0, 100, 200)])
    assert np.max(np.abs(evaluate(t) - r_stationary(ctx, t))) <= 1e-6 * ctx.psi_value
    assert evaluate(np.ones((2, 3))).shape == (2, 3)

    ctx = KernelContext(BROWNIAN, 1.0)
    assert r_interpolant(ctx, 10.0)(np.array([1.0])) == pytest.approx(np.exp(-1) / 2)
