# SPDX-FileCopyrightText: 2024 aefit developers
#
# SPDX-License-Identifier: MIT

"""
Exact Gaussian path synthesis on uniform grids.

Noise paths are built from the stationary increment sequence by circulant
embedding (Davies-Harte), with a Cholesky fallback when the embedding is not
nonnegative definite. Solution paths are either obtained from a noise path
through :mod:`aefit.core.solver` or sampled directly from γ_θ or r_θ.

All randomness flows from a ``(seed, stream)`` pair through
:func:`random_stream`; identical inputs give bit-identical paths regardless
of thread scheduling.
"""
import logging
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import linalg, special

from aefit.core.noise import NoiseModel, DomainError, FlavorError, eval_v
from aefit.core.kernel import KernelContext, gamma_cov, r_stationary
from aefit.core.solver import solve_zero_start

LOGGER = logging.getLogger(__name__)

CIRCULANT_TOLERANCE = 1e-10
CIRCULANT_LIMIT = 2 ** 22
CHOLESKY_LIMIT = 4096
JITTER_LADDER = (0.0, 1e-12, 1e-10)
# Shifts 53-bit uniforms on [0, 1) into the open interval.
_UNIFORM_OFFSET = 2.0 ** -54

KIND_NOISE = 'G'
KIND_ZERO_START = 'X'
KIND_STATIONARY = 'U'
KIND_SHIFTED = 'U_xi'


class SimulationError(RuntimeError):
    """
    Raised when a covariance cannot be factorised even with jitter, or when
    a grid is too large for the requested route.
    """
    pass


class CirculantFallbackWarning(UserWarning):
    pass


class JitterWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Grid(object):
    """Uniform grid ``t_k = k·dt`` for ``k = 0..n``."""
    dt: float
    n: int

    def __post_init__(self):
        if not np.isfinite(self.dt) or self.dt <= 0:
            raise DomainError('Grid step must be positive, got {}.'.format(self.dt))
        if int(self.n) != self.n or self.n < 1:
            raise DomainError('Grid needs at least one step, got n={}.'.format(self.n))
        object.__setattr__(self, 'dt', float(self.dt))
        object.__setattr__(self, 'n', int(self.n))

    @classmethod
    def from_horizon(cls, horizon, dt):
        """
        Grid covering ``[0, horizon]`` with step ``dt``; the horizon has to
        be a whole number of steps up to rounding.
        """
        n = int(round(horizon / dt))
        if n < 1 or abs(n * dt - horizon) > 1e-9 * max(1.0, horizon):
            raise DomainError('Horizon {} is not a multiple of dt={}.'.format(horizon, dt))
        return cls(dt, n)

    @property
    def times(self):
        return np.arange(self.n + 1) * self.dt

    @property
    def horizon(self):
        return self.n * self.dt


@dataclass(eq=False)
class PathSample(object):
    """
    A trajectory on ``grid`` together with everything needed to reproduce it.

    ``kind`` is one of ``'G'`` (noise), ``'X'`` (zero-start solution), ``'U'``
    (stationary solution) or ``'U_xi'`` (solution started at ``xi``).
    """
    grid: Grid
    values: np.ndarray
    model: NoiseModel
    theta: float = None
    seed: int = None
    kind: str = KIND_NOISE
    stream: int = 0
    xi: float = 0.0
    method: str = field(default='', compare=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n + 1,):
            raise DomainError('Path has {} values for a grid of {} points.'.format(
                self.values.size, self.grid.n + 1))

    @property
    def times(self):
        return self.grid.times

    @property
    def replay_key(self):
        return {'seed': self.seed, 'stream': self.stream}


def random_stream(seed, stream=0):
    """
    Independent generator for the pair ``(seed, stream)``: a Philox
    counter-based bit generator keyed by ``SeedSequence(seed,
    spawn_key=(stream,))``.
    """
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(seed, spawn_key=(int(stream),)))
    )


def standard_normal(rng, size):
    """Standard normal variates by inversion of open-interval uniforms."""
    return special.ndtri(rng.random(size) + _UNIFORM_OFFSET)


def increment_autocovariance(model, dt, n):
    """
    ``ρ(k) = Cov(ΔG_j, ΔG_{j+k}) = ½[v((k+1)dt) + v(|k-1|dt) - 2v(k·dt)]``
    for ``k = 0..n``.
    """
    lags = np.arange(n + 1) * dt
    return 0.5 * (eval_v(model, lags + dt) + eval_v(model, np.abs(lags - dt))
                  - 2 * eval_v(model, lags))


@lru_cache(maxsize=32)
def _circulant_spectrum(model, dt, n, tolerance=CIRCULANT_TOLERANCE):
    rho = increment_autocovariance(model, dt, n)
    row = np.concatenate([rho, rho[-2:0:-1]])
    eigenvalues = np.fft.fft(row).real
    if eigenvalues.min() < -tolerance * np.abs(eigenvalues).max():
        return None
    eigenvalues = np.clip(eigenvalues, 0.0, None)
    eigenvalues.setflags(write=False)
    return eigenvalues


def cholesky_factor(cov, ladder=JITTER_LADDER):
    """
    Lower Cholesky factor of ``cov``, adding ``jitter·trace/n`` to the
    diagonal along ``ladder`` until the factorisation succeeds.

    :raises SimulationError: if every rung fails.
    """
    cov = np.asarray(cov, dtype=float)
    scale = np.trace(cov) / len(cov)
    for jitter in ladder:
        try:
            factor = linalg.cholesky(cov + jitter * scale * np.eye(len(cov)),
                                     lower=True, check_finite=False)
        except linalg.LinAlgError:
            continue
        if jitter:
            warnings.warn('Cholesky needed jitter {:g}·trace/n.'.format(jitter), JitterWarning)
        factor.setflags(write=False)
        return factor
    raise SimulationError(
        'Covariance of size {} is not positive definite after jitter {}.'.format(len(cov), ladder[-1])
    )


def _check_cholesky_size(n, limit=CHOLESKY_LIMIT):
    if n > limit:
        raise SimulationError('Cholesky sampling is limited to {} points, got {}.'.format(limit, n))


@lru_cache(maxsize=8)
def _increment_factor(model, dt, n):
    rho = increment_autocovariance(model, dt, n - 1)
    return cholesky_factor(linalg.toeplitz(rho))


def _circulant_increments(model, grid, rng, tolerance=CIRCULANT_TOLERANCE):
    if grid.n > CIRCULANT_LIMIT:
        raise SimulationError('Circulant embedding is limited to {} steps.'.format(CIRCULANT_LIMIT))
    eigenvalues = _circulant_spectrum(model, grid.dt, grid.n, tolerance)
    if eigenvalues is None:
        return None
    size = eigenvalues.size
    z = standard_normal(rng, size) + 1j * standard_normal(rng, size)
    return np.fft.fft(np.sqrt(eigenvalues / size) * z).real[:grid.n]


def _cholesky_increments(model, grid, rng, limit=CHOLESKY_LIMIT):
    _check_cholesky_size(grid.n, limit)
    return _increment_factor(model, grid.dt, grid.n) @ standard_normal(rng, grid.n)


def sample_noise_increments(model, grid, seed, stream=0, method='auto',
                            tolerance=CIRCULANT_TOLERANCE, cholesky_limit=CHOLESKY_LIMIT):
    """
    Exact sample of the noise ``G`` on ``grid``, as cumulative sums of
    increments with covariance ``ρ(|j-k|)``.

    :param model: increment-flavor :class:`~aefit.core.noise.NoiseModel`.
    :param grid: :class:`Grid`.
    :param seed: 64-bit seed.
    :param stream: stream id, see :func:`random_stream`.
    :param method: ``'circulant'``, ``'cholesky'`` or ``'auto'``. ``'auto'``
        embeds single-leaf models, factorises mixtures up to
        ``CHOLESKY_LIMIT`` points and otherwise adds independently embedded
        components.
    :param tolerance: relative size of negative circulant eigenvalues still
        treated as rounding.
    :param cholesky_limit: largest grid factorised by Cholesky.
    :return: :class:`PathSample` of kind ``'G'`` starting at 0.
    """
    if not model.is_increment:
        raise FlavorError('{} has no increment covariance to sample.'.format(model))
    rng = random_stream(seed, stream)
    leaves = model.leaves()
    if method == 'auto':
        if len(leaves) == 1:
            method = 'circulant'
        elif grid.n <= cholesky_limit:
            method = 'cholesky'
        else:
            method = 'components'

    if method == 'circulant':
        increments = _circulant_increments(model, grid, rng, tolerance)
        if increments is None:
            warnings.warn('Circulant embedding of {} is not nonnegative; '
                          'falling back to Cholesky.'.format(model), CirculantFallbackWarning)
            LOGGER.debug('Circulant fallback for %s with n=%d', model, grid.n)
            method = 'cholesky'
            increments = _cholesky_increments(model, grid, rng, cholesky_limit)
    elif method == 'cholesky':
        increments = _cholesky_increments(model, grid, rng, cholesky_limit)
    elif method == 'components':
        increments = np.zeros(grid.n)
        for leaf in leaves:
            part = _circulant_increments(leaf, grid, rng, tolerance)
            if part is None:
                raise SimulationError('Component {} cannot be embedded.'.format(leaf))
            increments += part
    else:
        raise ValueError('Unknown sampling method {!r}.'.format(method))
    values = np.concatenate([[0.0], np.cumsum(increments)])
    return PathSample(grid, values, model, seed=seed, kind=KIND_NOISE,
                      stream=stream, method=method)


@lru_cache(maxsize=4)
def _zero_start_factor(ctx, dt, n):
    times = np.arange(1, n + 1) * dt
    return cholesky_factor(gamma_cov(ctx, times[:, None], times[None, :]))


@lru_cache(maxsize=4)
def _stationary_factor(ctx, dt, n):
    return cholesky_factor(linalg.toeplitz(r_stationary(ctx, np.arange(n + 1) * dt)))


def sample_X_direct(ctx, grid, seed, stream=0):
    """
    Zero-start solution sampled from its covariance ``γ_θ(t_j, t_k)``;
    the value at ``t = 0`` is exactly 0.
    """
    _check_cholesky_size(grid.n)
    rng = random_stream(seed, stream)
    values = _zero_start_factor(ctx, grid.dt, grid.n) @ standard_normal(rng, grid.n)
    return PathSample(grid, np.concatenate([[0.0], values]), ctx.model, theta=ctx.theta,
                      seed=seed, kind=KIND_ZERO_START, stream=stream, method='cholesky')


def sample_U_stationary(ctx, grid, seed, stream=0):
    """Stationary solution sampled from the Toeplitz matrix ``r_θ(|t_j - t_k|)``."""
    _check_cholesky_size(grid.n + 1)
    rng = random_stream(seed, stream)
    values = _stationary_factor(ctx, grid.dt, grid.n) @ standard_normal(rng, grid.n + 1)
    return PathSample(grid, values, ctx.model, theta=ctx.theta, seed=seed,
                      kind=KIND_STATIONARY, stream=stream, method='cholesky')


def simulate_solution(model, theta, grid, seed, stream=0, kind=KIND_ZERO_START):
    """
    Exact path of the requested ``kind`` for any model.

    Increment models produce ``'G'`` and ``'X'`` through the noise sampler
    and the exponential solver; stationary models and ``'U'`` requests use
    direct Cholesky sampling.
    """
    if kind == KIND_NOISE:
        return sample_noise_increments(model, grid, seed, stream)
    ctx = KernelContext(model, theta)
    if kind == KIND_STATIONARY:
        return sample_U_stationary(ctx, grid, seed, stream)
    elif kind == KIND_ZERO_START:
        if model.is_increment:
            return solve_zero_start(sample_noise_increments(model, grid, seed, stream), theta)
        return sample_X_direct(ctx, grid, seed, stream)
    raise DomainError('Unknown path kind {!r}.'.format(kind))
