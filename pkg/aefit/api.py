# SPDX-FileCopyrightText: 2024 aefit developers
#
# SPDX-License-Identifier: MIT

# Noise models and their validation.
from aefit.core.noise import (
    NoiseModel, DomainError, FlavorError, ValidationReport, CheckResult,
    eval_v, eval_g, validate_model, validate_variance
)

# Stationary variance map and covariances.
from aefit.core.kernel import (
    KernelContext, NumericsError, EstimateOutOfRange, psi, psi_quadrature,
    psi_derivatives, psi_inverse, r_stationary, r_double_quadrature,
    r_interpolant, gamma_cov, fou_r_asymptote, lamperti_decay_rate,
    bifractional_appendix_formula
)

# Paths.
from aefit.core.sampler import (
    Grid, PathSample, SimulationError, random_stream, sample_noise_increments,
    sample_X_direct, sample_U_stationary, simulate_solution
)
from aefit.core.solver import solve_zero_start, shift_initial, integrate_exponential

# Estimation.
from aefit.core.estimator import (
    DegenerateInput, ae_continuous, ae_discrete, sae, check_mesh,
    bias_expansion, confidence_interval, mean_square, discrete_mean_square
)
from aefit.core.estimate_results import EstimateResult
from aefit.core.asymptotics import (
    NonIntegrable, AsymptoticsReport, RateDescriptor, w_T, R_T,
    sigma2_classical, sigma_H2, fou_sigma_scaling_check, q_moments_exact,
    quadratic_form_moments, fourth_moment_bound, rate_regime,
    asymptotics_report, integral_r_squared
)
from aefit.core.baselines import UnsupportedModel, lse_ito, mle_brownian
from aefit.core.harness import (
    ExperimentConfig, McReport, ExperimentError, ConfigError, run_experiment,
    ks_distance
)
