# SPDX-FileCopyrightText: 2024 aefit developers
#
# SPDX-License-Identifier: MIT

"""
Deterministic Monte Carlo experiments for the alternative estimator.

Replication ``r`` of an experiment draws all of its randomness from the
stream ``(master_seed, r)``, and results are collected in replication order,
so a report does not depend on the number of worker threads.
"""
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy import stats

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from aefit.core.noise import NoiseModel, DomainError, BROWNIAN
from aefit.core.kernel import KernelContext, NumericsError, psi_inverse
from aefit.core.sampler import (
    Grid, SimulationError, simulate_solution, sample_U_stationary
)
from aefit.core.solver import shift_initial
from aefit.core.estimator import (
    DegenerateInput, ae_point_estimate, discrete_mean_square
)
from aefit.core.asymptotics import w_T
from aefit.core.baselines import lse_ito, mle_brownian
from aefit.distributions import normal_cdf

LOGGER = logging.getLogger(__name__)

SCHEMA_VERSION = 1
MAX_FAILURE_FRACTION = 0.01

CONSISTENCY = 'consistency'
NORMALITY = 'normality'
BIAS = 'bias'
LSE_DECAY = 'lse_decay'
DISCRETE_VS_CONTINUOUS = 'discrete_vs_continuous'
INITIAL_CONDITION = 'initial_condition'
MLE_PARITY = 'mle_parity'
EXPERIMENT_KINDS = (CONSISTENCY, NORMALITY, BIAS, LSE_DECAY,
                    DISCRETE_VS_CONTINUOUS, INITIAL_CONDITION, MLE_PARITY)
STANDARDIZATIONS = ('plug_in', 'true')


class ExperimentError(RuntimeError):
    """Raised when too many replications of an experiment fail."""
    pass


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig(object):
    """
    Everything that determines a Monte Carlo experiment. Two equal configs
    produce bitwise equal estimates.
    """
    model: NoiseModel
    theta_true: float
    T: float
    dt: float
    replications: int
    master_seed: int
    kind: str = CONSISTENCY
    discrete_delta: float = None
    xi: float = None
    standardize: str = 'plug_in'

    def __post_init__(self):
        if not isinstance(self.model, NoiseModel):
            raise ConfigError('model must be a NoiseModel, got {!r}.'.format(self.model))
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigError('Unknown experiment kind {!r}; expected one of {}.'.format(
                self.kind, ', '.join(EXPERIMENT_KINDS)))
        if self.standardize not in STANDARDIZATIONS:
            raise ConfigError('standardize must be one of {}.'.format(STANDARDIZATIONS))
        if not self.theta_true > 0:
            raise ConfigError('theta_true must be positive.')
        if not 0 < self.dt < self.T:
            raise ConfigError('Need 0 < dt < T, got dt={}, T={}.'.format(self.dt, self.T))
        if int(self.replications) != self.replications or self.replications < 1:
            raise ConfigError('replications must be a positive integer.')
        if int(self.master_seed) != self.master_seed or self.master_seed < 0:
            raise ConfigError('master_seed must be a nonnegative integer.')
        try:
            self.grid
        except DomainError as error:
            raise ConfigError(str(error))
        if self.kind == DISCRETE_VS_CONTINUOUS:
            if self.discrete_delta is None:
                raise ConfigError('discrete_vs_continuous needs discrete_delta.')
            if self.stride is None:
                raise ConfigError('discrete_delta must be a whole multiple of dt.')
        if self.kind == INITIAL_CONDITION and self.xi is None:
            raise ConfigError('initial_condition needs xi.')
        if self.kind == MLE_PARITY and self.model.kind != BROWNIAN:
            raise ConfigError('mle_parity needs Brownian noise.')

    @property
    def grid(self):
        return Grid.from_horizon(self.T, self.dt)

    @property
    def stride(self):
        """Number of grid steps per discrete observation, None if not whole."""
        if self.discrete_delta is None:
            return None
        stride = int(round(self.discrete_delta / self.dt))
        if stride < 1 or abs(stride * self.dt - self.discrete_delta) > 1e-9 * self.discrete_delta:
            return None
        return stride

    @classmethod
    def from_dict(cls, document):
        """
        :param document: mapping of config keys; ``model`` may be a
            :class:`~aefit.core.noise.NoiseModel` or its descriptor.
        """
        document = dict(document)
        known = {'model', 'theta_true', 'T', 'dt', 'replications', 'master_seed',
                 'kind', 'discrete_delta', 'xi', 'standardize'}
        unknown = set(document) - known
        if unknown:
            raise ConfigError('Unknown experiment keys {}.'.format(sorted(unknown)))
        missing = {'model', 'theta_true', 'T', 'dt', 'replications', 'master_seed'} - set(document)
        if missing:
            raise ConfigError('Missing experiment keys {}.'.format(sorted(missing)))
        model = document['model']
        if not isinstance(model, NoiseModel):
            try:
                model = NoiseModel.from_dict(model)
            except DomainError as error:
                raise ConfigError('Invalid model descriptor: {}'.format(error))
        document['model'] = model
        for key in ('theta_true', 'T', 'dt', 'discrete_delta', 'xi'):
            if document.get(key) is not None:
                document[key] = float(document[key])
        return cls(**document)

    @classmethod
    def from_toml(cls, path):
        """Read the ``[experiment]`` table of a TOML file."""
        with open(path, 'rb') as handle:
            try:
                data = tomllib.load(handle)
            except tomllib.TOMLDecodeError as error:
                raise ConfigError('Cannot parse {}: {}'.format(path, error))
        if 'experiment' not in data:
            raise ConfigError('{} has no [experiment] table.'.format(path))
        return cls.from_dict(data['experiment'])

    def to_dict(self):
        return {
            'kind': self.kind, 'model': self.model.to_dict(),
            'theta_true': self.theta_true, 'T': self.T, 'dt': self.dt,
            'replications': self.replications, 'master_seed': self.master_seed,
            'discrete_delta': self.discrete_delta, 'xi': self.xi,
            'standardize': self.standardize,
        }


def _json_safe(values):
    return [float(v) if np.isfinite(v) else None for v in np.asarray(values, dtype=float)]


@dataclass
class McReport(object):
    config: ExperimentConfig
    estimates: np.ndarray
    standardized: np.ndarray
    ks_distance: float
    mean: float
    sd: float
    bias: float
    wall_time: float
    failures: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def to_dict(self, timing=False):
        """
        Plain dict of the report. The wall time is left out unless ``timing``
        is set, so reports of the same configuration serialize identically.
        """
        document = {
            'schema_version': self.schema_version,
            'config': self.config.to_dict(),
            'estimates': _json_safe(self.estimates),
            'standardized': _json_safe(self.standardized),
            'ks_distance': self.ks_distance,
            'mean': self.mean,
            'sd': self.sd,
            'bias': self.bias,
            'failures': list(self.failures),
            'extras': {key: _json_safe(value) for key, value in self.extras.items()},
        }
        if timing:
            document['wall_time'] = self.wall_time
        return document

    def to_json(self, indent=2, timing=False):
        return json.dumps(self.to_dict(timing=timing), indent=indent)


def ks_distance(sample):
    """
    Kolmogorov-Smirnov distance between the empirical distribution of
    ``sample`` and the standard normal.
    """
    x = np.asarray(sample, dtype=float).ravel()
    if x.size == 0:
        raise DomainError('The KS distance needs a nonempty sample.')
    return float(stats.kstest(x, normal_cdf).statistic)


def _standardize(config, theta_hat, scale=None):
    if scale is None:
        ctx = KernelContext(config.model, theta_hat)
        scale = abs(ctx.psi_prime_value) / np.sqrt(w_T(ctx, config.T))
    return scale * (theta_hat - config.theta_true)


def _replicate(config, index):
    """
    One replication. Returns ``(estimate, extras)`` where the estimate is the
    alternative estimator except in ``lse_decay``.
    """
    model, theta, grid = config.model, config.theta_true, config.grid
    seed = config.master_seed
    extras = {}
    if config.kind == BIAS:
        stationary = sample_U_stationary(KernelContext(model, theta), grid, seed, index)
        zero_start = stationary.values - np.exp(-theta * grid.times) * stationary.values[0]
        estimate, square = ae_point_estimate(zero_start, grid.dt, model)
        sae_estimate, sae_square = ae_point_estimate(stationary.values, grid.dt, model)
        extras.update(psi_hat=square, sae=sae_estimate, sae_psi_hat=sae_square)
        return estimate, extras

    path = simulate_solution(model, theta, grid, seed, index, kind='X')
    estimate, _ = ae_point_estimate(path.values, grid.dt, model)
    if config.kind == INITIAL_CONDITION:
        extras['unshifted'] = estimate
        shifted = shift_initial(path, theta, config.xi)
        estimate, _ = ae_point_estimate(shifted.values, grid.dt, model)
    elif config.kind == DISCRETE_VS_CONTINUOUS:
        observations = path.values[config.stride::config.stride]
        discrete = psi_inverse(model, discrete_mean_square(observations, config.discrete_delta))
        extras.update(discrete=discrete, paired_difference=discrete - estimate)
    elif config.kind == MLE_PARITY:
        extras['mle'] = mle_brownian(path)
    elif config.kind == LSE_DECAY:
        extras['ae'] = estimate
        return lse_ito(path, model, theta_ref=theta), extras
    return estimate, extras


def _run_one(config, scale, index):
    try:
        estimate, extras = _replicate(config, index)
        ae = extras.get('ae', estimate)
        return estimate, _standardize(config, ae, scale), extras, None
    except (NumericsError, SimulationError, DegenerateInput) as error:
        return np.nan, np.nan, {}, {
            'replication': index, 'master_seed': config.master_seed, 'message': str(error)
        }


def run_experiment(config, workers=1, max_failure_fraction=MAX_FAILURE_FRACTION):
    """
    Run all replications of ``config``.

    :param config: :class:`ExperimentConfig`.
    :param workers: number of threads.
    :param max_failure_fraction: share of failed replications tolerated
        before the experiment is aborted.
    :return: :class:`McReport`.
    :raises ExperimentError: if more than ``max_failure_fraction`` of the
        replications fail.
    """
    start = time.perf_counter()
    LOGGER.info('Running %s experiment for %s: %d replications on %d worker(s)',
                config.kind, config.model, config.replications, workers)
    scale = None
    if config.standardize == 'true':
        ctx = KernelContext(config.model, config.theta_true)
        scale = abs(ctx.psi_prime_value) / np.sqrt(w_T(ctx, config.T))

    run = partial(_run_one, config, scale)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            outcomes = list(executor.map(run, range(config.replications)))
    else:
        outcomes = [run(index) for index in range(config.replications)]

    failures = [failure for *_, failure in outcomes if failure is not None]
    for failure in failures:
        LOGGER.warning('Replication %(replication)d failed (replay with master_seed='
                       '%(master_seed)d): %(message)s', failure)
    if len(failures) > max_failure_fraction * config.replications:
        raise ExperimentError('{} of {} replications failed.'.format(
            len(failures), config.replications))

    estimates = np.array([outcome[0] for outcome in outcomes])
    standardized = np.array([outcome[1] for outcome in outcomes])
    keys = sorted({key for outcome in outcomes for key in outcome[2]})
    extras = {key: np.array([outcome[2].get(key, np.nan) for outcome in outcomes])
              for key in keys}
    finite = estimates[np.isfinite(estimates)]
    mean = float(np.mean(finite))
    sd = float(np.std(finite, ddof=1)) if finite.size > 1 else 0.0
    report = McReport(
        config=config, estimates=estimates, standardized=standardized,
        ks_distance=ks_distance(standardized[np.isfinite(standardized)]),
        mean=mean, sd=sd, bias=mean - config.theta_true,
        wall_time=time.perf_counter() - start, failures=failures, extras=extras
    )
    LOGGER.info('Finished %s experiment: mean %.6f, sd %.6f, KS %.4f in %.1f s',
                config.kind, report.mean, report.sd, report.ks_distance, report.wall_time)
    return report
