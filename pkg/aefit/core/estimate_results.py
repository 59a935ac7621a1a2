# SPDX-FileCopyrightText: 2024 aefit developers
#
# SPDX-License-Identifier: MIT

from collections import OrderedDict

import numpy as np


class EstimateResult(object):
    """
    Class to display the outcome of an estimation in a nice and unambiguous
    way. Everything related to the estimate is available on this class, e.g.

    - the estimate θ̂ and the mean square it inverts
    - standard error and confidence interval from the master statistic
    - the Berry-Esseen rate at θ̂
    - the mesh diagnostic for discrete observations.

    Additional diagnostics live in the ``notes`` dict and can be read as
    attributes, e.g. ``result.psi_prime``.
    """
    def __init__(self, theta_hat, mean_square, std_error, ci, be_rate, *,
                 model, horizon, alpha, method='AE', mesh_ok=None, notes=None):
        """
        :param theta_hat: the estimate θ̂.
        :param mean_square: the (discrete or continuous) time average of X².
        :param std_error: ``√w_θ̂(T)/|ψ′(θ̂)|``.
        :param ci: ``(lo, hi)`` at level ``1 - alpha``.
        :param be_rate: ``R_θ̂(T)``.
        :param model: :class:`~aefit.core.noise.NoiseModel` used.
        :param horizon: observation horizon T.
        :param alpha: level of ``ci``.
        :param method: ``'AE'``, ``'AE-discrete'`` or ``'SAE'``.
        :param mesh_ok: outcome of the mesh check, discrete estimates only.
        :param notes: further diagnostics.
        """
        self.theta_hat = float(theta_hat)
        self.mean_square = float(mean_square)
        self.std_error = float(std_error)
        self.ci = (float(ci[0]), float(ci[1]))
        self.be_rate = float(be_rate)
        self.model = model
        self.horizon = float(horizon)
        self.alpha = float(alpha)
        self.method = method
        self.mesh_ok = mesh_ok
        self.notes = OrderedDict(notes or {})

    def __str__(self):
        """
        Pretty print the results as a table.
        """
        res = '\n{:<22} {}\n'.format('Estimator', self.method)
        res += '{:<22} {}\n'.format('Noise model', self.model)
        res += '{:<22} {:e}\n'.format('Horizon', self.horizon)
        res += '\nQuantity              Value\n'
        res += '{:<22} {:e}\n'.format('theta_hat', self.theta_hat)
        res += '{:<22} {:e}\n'.format('mean_square', self.mean_square)
        res += '{:<22} {:e}\n'.format('std_error', self.std_error)
        res += '{:<22} [{:e}, {:e}]\n'.format(
            'CI ({:g}%)'.format(100 * (1 - self.alpha)), *self.ci)
        res += '{:<22} {:e}\n'.format('be_rate', self.be_rate)
        if self.mesh_ok is not None:
            res += '{:<22} {}\n'.format('mesh_ok', self.mesh_ok)
        if self.notes:
            res += '\nNotes:\n'
            res += '\n'.join('{:<22} {}'.format(key, value)
                             for key, value in sorted(self.notes.items()))
        return res

    def __getattr__(self, item):
        """
        Return the requested ``item`` if it can be found in the notes.
        """
        if 'notes' in vars(self):
            if item in self.notes:
                return self.notes[item]
        raise AttributeError(item)

    def to_dict(self):
        """JSON-ready representation."""
        out = OrderedDict([
            ('method', self.method),
            ('model', self.model.to_dict()),
            ('T', self.horizon),
            ('theta_hat', self.theta_hat),
            ('mean_square', self.mean_square),
            ('std_error', self.std_error),
            ('ci', list(self.ci)),
            ('alpha', self.alpha),
            ('be_rate', self.be_rate),
            ('mesh_ok', self.mesh_ok),
        ])
        out['notes'] = {key: (value.tolist() if isinstance(value, np.ndarray) else value)
                        for key, value in self.notes.items()}
        return out
