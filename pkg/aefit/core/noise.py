# SPDX-FileCopyrightText: 2024 aefit developers
#
# SPDX-License-Identifier: MIT

"""
Noise models driving the Langevin equation ``dU = -θ U dt + dG``.

Increment-flavor models describe ``G`` through its variance function
``v(t) = Var(G_t)``; stationary-flavor models (the inverse Lamperti
constructions) only provide the stationary covariance of the solution, which
lives in :mod:`aefit.core.kernel`.
"""
import json
from dataclasses import dataclass, field
from functools import lru_cache, reduce
import operator

import numpy as np
import sympy

from aefit.core.support import sympy_to_py

t = sympy.Symbol('t', nonnegative=True)
theta = sympy.Symbol('theta', positive=True)

BROWNIAN = 'brownian'
FBM = 'fbm'
MIXED = 'mixed'
LAMPERTI_FBM = 'lamperti_fbm'
LAMPERTI_BIFBM = 'lamperti_bifbm'

INCREMENT_KINDS = (BROWNIAN, FBM, MIXED)
STATIONARY_KINDS = (LAMPERTI_FBM, LAMPERTI_BIFBM)
KINDS = INCREMENT_KINDS + STATIONARY_KINDS

#: Log-spaced grid on which the monotonicity and Hölder checks are run.
VALIDATION_GRID = np.geomspace(1e-4, 1e2, 200)
#: Grid for the growth check ``v(t) <= C t**2``.
GROWTH_GRID = np.arange(0.0, 101.0)
HOLDER_EPSILON = 0.01


class DomainError(ValueError):
    """
    Raised when an argument lies outside the domain of an operation.
    """
    pass


class FlavorError(TypeError):
    """
    Raised when an operation needs a variance function but the model only
    provides a stationary covariance, or vice versa.
    """
    pass


def _check_unit_interval(name, value, closed_right=False):
    upper_ok = value <= 1 if closed_right else value < 1
    if not (0 < value and upper_ok):
        bracket = ']' if closed_right else ')'
        raise DomainError(
            '{} must lie in (0, 1{}, got {}.'.format(name, bracket, value)
        )


@dataclass(frozen=True)
class NoiseModel(object):
    """
    Declarative description of the driving noise.

    Instances are immutable and hashable, so they can key the caches of
    lambdified expressions, circulant spectra and Cholesky factors. Use the
    class methods to construct them::

        >>> NoiseModel.fbm(0.7)
        >>> NoiseModel.mixed(NoiseModel.brownian(), NoiseModel.fbm(0.3))
        >>> NoiseModel.lamperti_bifbm(0.6, 0.8)
    """
    kind: str
    hurst: float = None
    kappa: float = None
    components: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError('Unknown noise model kind {!r}.'.format(self.kind))
        if self.kind in (FBM, LAMPERTI_FBM, LAMPERTI_BIFBM):
            _check_unit_interval('hurst', self.hurst)
        if self.kind == LAMPERTI_BIFBM:
            _check_unit_interval('kappa', self.kappa, closed_right=True)
        if self.kind == MIXED:
            if not self.components:
                raise DomainError('A mixed model needs at least one component.')
            for component in self.components:
                if not isinstance(component, NoiseModel) or not component.is_increment:
                    raise DomainError(
                        'Mixture components must be increment-flavor noise '
                        'models, got {!r}.'.format(component)
                    )

    @classmethod
    def brownian(cls):
        return cls(BROWNIAN)

    @classmethod
    def fbm(cls, hurst):
        return cls(FBM, hurst=float(hurst))

    @classmethod
    def mixed(cls, *components):
        return cls(MIXED, components=tuple(components))

    @classmethod
    def lamperti_fbm(cls, hurst):
        return cls(LAMPERTI_FBM, hurst=float(hurst))

    @classmethod
    def lamperti_bifbm(cls, hurst, kappa):
        return cls(LAMPERTI_BIFBM, hurst=float(hurst), kappa=float(kappa))

    @property
    def flavor(self):
        return 'increment' if self.kind in INCREMENT_KINDS else 'stationary'

    @property
    def is_increment(self):
        return self.flavor == 'increment'

    @property
    def holder_index(self):
        """
        Hölder index of the noise: 1/2 for Brownian motion, H for fbm and the
        Lamperti fbm model, H·K for the bifractional model and the minimum over
        the components of a mixture.
        """
        if self.kind == BROWNIAN:
            return 0.5
        elif self.kind in (FBM, LAMPERTI_FBM):
            return self.hurst
        elif self.kind == LAMPERTI_BIFBM:
            return self.hurst * self.kappa
        return min(component.holder_index for component in self.components)

    @property
    def self_similarity_index(self):
        """Index H′ of the self-similar process behind a Lamperti model."""
        if self.kind == LAMPERTI_FBM:
            return self.hurst
        elif self.kind == LAMPERTI_BIFBM:
            return self.hurst * self.kappa
        raise FlavorError('{} is not a Lamperti model.'.format(self.kind))

    def leaves(self):
        """
        :return: tuple of the Brownian and fbm leaves of this model, with
            nested mixtures flattened.
        """
        if self.kind == MIXED:
            return tuple(leaf for component in self.components
                         for leaf in component.leaves())
        elif self.is_increment:
            return (self,)
        raise FlavorError('{} has no variance function.'.format(self.kind))

    @property
    def exponent(self):
        """Exponent ``p`` of a power-law leaf, ``v(t) = t**p``."""
        if self.kind == BROWNIAN:
            return 1.0
        elif self.kind == FBM:
            return 2 * self.hurst
        raise FlavorError('{} is not a power-law leaf.'.format(self.kind))

    @property
    def variance_expr(self):
        """Symbolic variance function ``v(t)``."""
        if self.kind == BROWNIAN:
            return t
        elif self.kind == FBM:
            return t ** (2 * sympy.Float(self.hurst))
        elif self.kind == MIXED:
            return reduce(operator.add,
                          (leaf.variance_expr for leaf in self.leaves()))
        raise FlavorError('{} has no variance function.'.format(self.kind))

    @property
    def psi_expr(self):
        """
        Symbolic stationary variance map ``ψ(θ)``. For increment models this
        is ``(θ/2)∫e^{-θt} v(t) dt`` in closed form, ``HΓ(2H)θ^{-2H}`` per fbm
        leaf; for Lamperti models it is the variance ``(H′/θ)^{2H′}`` of the
        self-similar process at ``a(0) = H′/θ``.
        """
        if self.kind == BROWNIAN:
            return 1 / (2 * theta)
        elif self.kind == FBM:
            hurst = sympy.Float(self.hurst)
            return hurst * sympy.gamma(2 * hurst) * theta ** (-2 * hurst)
        elif self.kind == MIXED:
            return reduce(operator.add, (leaf.psi_expr for leaf in self.leaves()))
        index = sympy.Float(self.self_similarity_index)
        return (index / theta) ** (2 * index)

    def to_dict(self):
        out = {'kind': self.kind}
        if self.hurst is not None:
            out['hurst'] = self.hurst
        if self.kappa is not None:
            out['kappa'] = self.kappa
        if self.kind == MIXED:
            out['components'] = [component.to_dict() for component in self.components]
        return out

    @classmethod
    def from_dict(cls, descriptor):
        """
        Build a model from its JSON descriptor, e.g. ``{"kind": "fbm",
        "hurst": 0.7}``. Hyphens in ``kind`` are accepted as underscores.
        """
        try:
            kind = descriptor['kind'].replace('-', '_')
        except (KeyError, AttributeError, TypeError):
            raise DomainError('Model descriptor needs a "kind": {!r}'.format(descriptor))
        unknown = set(descriptor) - {'kind', 'hurst', 'kappa', 'components'}
        if unknown:
            raise DomainError('Unknown model descriptor keys {}.'.format(sorted(unknown)))
        if kind == MIXED:
            components = tuple(cls.from_dict(c) for c in descriptor.get('components', ()))
            return cls(MIXED, components=components)
        hurst, kappa = descriptor.get('hurst'), descriptor.get('kappa')
        if kind in (FBM, LAMPERTI_FBM, LAMPERTI_BIFBM) and hurst is None:
            raise DomainError('Model kind {} needs "hurst".'.format(kind))
        if kind == LAMPERTI_BIFBM and kappa is None:
            raise DomainError('Model kind {} needs "kappa".'.format(kind))
        return cls(kind,
                   hurst=None if hurst is None else float(hurst),
                   kappa=None if kappa is None else float(kappa))

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def __str__(self):
        if self.kind == BROWNIAN:
            return 'brownian'
        elif self.kind == MIXED:
            return 'mixed[{}]'.format(', '.join(str(c) for c in self.components))
        elif self.kind == LAMPERTI_BIFBM:
            return '{}(H={}, K={})'.format(self.kind, self.hurst, self.kappa)
        return '{}(H={})'.format(self.kind, self.hurst)


@lru_cache(maxsize=None)
def variance_function(model):
    """
    Lambdified variance function of ``model``, cached per model.

    :raises FlavorError: for stationary-flavor models.
    """
    return sympy_to_py(model.variance_expr, [t])


def eval_v(model, t_value):
    """
    Evaluate the variance function ``v(t) = Var(G_t)``.

    :param model: increment-flavor :class:`NoiseModel`.
    :param t_value: nonnegative float or array.
    :return: ``v(t)``.
    :raises FlavorError: for stationary-flavor models.
    :raises DomainError: for negative ``t``.
    """
    if np.any(np.asarray(t_value) < 0):
        raise DomainError('v is only defined for t >= 0; use eval_g for two-sided arguments.')
    return variance_function(model)(np.asarray(t_value, dtype=float))


def eval_g(model, t_value, s_value):
    """
    Covariance ``g(t, s) = ½[v(|t|) + v(|s|) - v(|t-s|)]`` of the two-sided
    noise. Broadcasts over array arguments.
    """
    v = variance_function(model)
    t_value = np.asarray(t_value, dtype=float)
    s_value = np.asarray(s_value, dtype=float)
    return 0.5 * (v(np.abs(t_value)) + v(np.abs(s_value)) - v(np.abs(t_value - s_value)))


@dataclass
class CheckResult(object):
    name: str
    passed: bool
    witness: float = None
    detail: str = ''


@dataclass
class ValidationReport(object):
    """
    Outcome of :func:`validate_model`: one :class:`CheckResult` per invariant.
    A failing check carries the grid point witnessing the violation.
    """
    model: object
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(check.passed for check in self.checks)

    def __getitem__(self, name):
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def __str__(self):
        res = '\nValidation of {}\n'.format(self.model)
        for check in self.checks:
            status = 'pass' if check.passed else 'FAIL at t={}'.format(check.witness)
            res += '{:<22} {}\n'.format(check.name, status)
        return res


def validate_variance(v, holder_index, name='table', grid=None):
    """
    Validate an arbitrary variance function against the model assumptions:
    ``v(0) = 0``, strict monotonicity, quadratic growth and Hölder regularity
    of order ``holder_index``.

    :param v: vectorised callable ``t -> v(t)`` on ``t >= 0``.
    :param holder_index: claimed Hölder index H.
    :param name: label for the report.
    :param grid: points for the monotonicity check, defaults to
        :data:`VALIDATION_GRID`. Table-defined functions pass their nodes.
    :return: :class:`ValidationReport`.
    """
    report = ValidationReport(model=name)

    at_zero = float(v(np.zeros(1))[0])
    report.checks.append(CheckResult(
        'v(0) = 0', at_zero == 0.0, None if at_zero == 0.0 else 0.0,
        'v(0) = {}'.format(at_zero)
    ))

    grid = VALIDATION_GRID if grid is None else np.asarray(grid, dtype=float)
    values = np.asarray(v(grid), dtype=float)
    bad = np.flatnonzero(np.diff(values) <= 0)
    report.checks.append(CheckResult(
        'strictly increasing', bad.size == 0,
        float(grid[bad[0] + 1]) if bad.size else None
    ))

    at_one = float(v(np.ones(1))[0])
    constant = 2 * (at_one + 1)
    growth = np.asarray(v(GROWTH_GRID), dtype=float)
    bad = np.flatnonzero(growth > constant * GROWTH_GRID ** 2)
    report.checks.append(CheckResult(
        'quadratic growth', bad.size == 0,
        float(GROWTH_GRID[bad[0]]) if bad.size else None,
        'C = {}'.format(constant)
    ))

    small = VALIDATION_GRID[VALIDATION_GRID <= 1]
    ratio = np.asarray(v(small), dtype=float) / small ** (2 * holder_index - HOLDER_EPSILON)
    bad = np.flatnonzero(ratio > 2 * at_one)
    report.checks.append(CheckResult(
        'hoelder', bad.size == 0, float(small[bad[0]]) if bad.size else None,
        'exponent 2H - eps = {}'.format(2 * holder_index - HOLDER_EPSILON)
    ))
    return report


def validate_model(model, holder_index=None):
    """
    Check ``model`` against the standing assumptions on the noise.

    Failures are reported, never raised. Lamperti models carry no variance
    function; for them only the parameter ranges are reported.

    :param model: :class:`NoiseModel`.
    :param holder_index: candidate Hölder index; defaults to
        ``model.holder_index``.
    :return: :class:`ValidationReport`.
    """
    if holder_index is None:
        holder_index = model.holder_index
    if not model.is_increment:
        report = ValidationReport(model=model)
        report.checks.append(CheckResult(
            'parameters', 0 < model.self_similarity_index < 1,
            detail='self-similarity index {}'.format(model.self_similarity_index)
        ))
        return report
    report = validate_variance(variance_function(model), holder_index)
    report.model = model
    return report
