# SPDX-FileCopyrightText: 2024 aefit developers
#
# SPDX-License-Identifier: MIT

"""
Command line interface, installed as ``aefit``::

    aefit simulate --model fbm --hurst 0.7 --theta 1 --t-max 10 --dt 0.1 --seed 7 --out p.csv
    aefit estimate --input p.csv --model fbm --hurst 0.7
    aefit asymptotics --model brownian --theta 1 --t-max 100
    aefit mc --config experiment.toml --out report.json

Exit codes: 0 on success, 2 for usage errors and unusable input, 3 for
numerical or simulation failures and 4 when the mean square cannot be
inverted through ψ.
"""
import argparse
import csv
import json
import logging
import sys

import numpy as np

from aefit.core.noise import NoiseModel, DomainError, FlavorError
from aefit.core.kernel import KernelContext, NumericsError, EstimateOutOfRange, r_stationary
from aefit.core.sampler import Grid, PathSample, SimulationError, simulate_solution
from aefit.core.estimator import DegenerateInput, ae_continuous, ae_discrete
from aefit.core.asymptotics import asymptotics_report
from aefit.core.baselines import UnsupportedModel, lse_ito, mle_brownian
from aefit.core.harness import (
    ConfigError, ExperimentConfig, ExperimentError, SCHEMA_VERSION, run_experiment
)

LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICS = 3
EXIT_OUT_OF_RANGE = 4

MODEL_KINDS = ('brownian', 'fbm', 'lamperti-fbm', 'lamperti-bifbm')
# Required keys of every JSON document the CLI writes.
SCHEMAS = {
    'estimate': ('schema_version', 'method', 'model', 'T', 'theta_hat'),
    'asymptotics': ('schema_version', 'model', 'theta', 'T', 'psi', 'psi_prime', 'r_samples',
                    'w', 'R', 'sigma2', 'regime', 'be_bound'),
    'mc': ('schema_version', 'config', 'estimates', 'standardized', 'ks_distance',
           'mean', 'sd', 'bias', 'failures', 'extras'),
}
UNIFORM_GRID_RTOL = 1e-9
R_SAMPLE_COUNT = 11


def _add_model_arguments(parser):
    group = parser.add_argument_group('noise model')
    group.add_argument('--model', choices=MODEL_KINDS, help='noise model kind')
    group.add_argument('--hurst', type=float, help='Hurst index H')
    group.add_argument('--kappa', type=float, help='bifractional index K')
    group.add_argument('--model-json', help='JSON model descriptor, e.g. for mixtures')


def build_parser():
    parser = argparse.ArgumentParser(
        prog='aefit',
        description='Simulate Langevin equations with Gaussian noise and '
                    'estimate their mean-reversion parameter.'
    )
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help='-v for progress messages, -vv for debugging output')
    commands = parser.add_subparsers(dest='command', metavar='command')
    commands.required = True

    simulate = commands.add_parser('simulate', help='write a simulated path as CSV')
    _add_model_arguments(simulate)
    simulate.add_argument('--theta', type=float, required=True)
    simulate.add_argument('--t-max', type=float, required=True)
    simulate.add_argument('--dt', type=float, required=True)
    simulate.add_argument('--seed', type=int, default=0)
    simulate.add_argument('--stream', type=int, default=0)
    simulate.add_argument('--kind', choices=('X', 'U', 'G'), default='X',
                          help='zero-start solution, stationary solution or noise')
    simulate.add_argument('--out', default='-', help='CSV file, - for stdout')

    estimate = commands.add_parser('estimate', help='estimate theta from a CSV path')
    _add_model_arguments(estimate)
    estimate.add_argument('--input', required=True, help='CSV file with header t,x')
    estimate.add_argument('--method', choices=('ae', 'lse', 'mle'), default='ae')
    estimate.add_argument('--discrete', action='store_true',
                          help='use the discrete-observation estimator')
    estimate.add_argument('--alpha', type=float, default=0.05)
    estimate.add_argument('--theta-ref', type=float,
                          help='theta for the LSE moment term, default plug-in')
    estimate.add_argument('--out', default='-')

    asymptotics = commands.add_parser('asymptotics', help='asymptotic quantities as JSON')
    _add_model_arguments(asymptotics)
    asymptotics.add_argument('--theta', type=float, required=True)
    asymptotics.add_argument('--t-max', type=float, required=True)
    asymptotics.add_argument('--moments', action='store_true',
                             help='also compute the exact Q-moments')
    asymptotics.add_argument('--out', default='-')

    mc = commands.add_parser('mc', help='run a Monte Carlo experiment')
    mc.add_argument('--config', required=True, help='TOML file with an [experiment] table')
    mc.add_argument('--out', default='-')
    mc.add_argument('--workers', type=int, default=1)
    mc.add_argument('--timing', action='store_true',
                    help='include the wall time in the report')
    return parser


def model_from_args(args):
    """Build the noise model from ``--model-json`` or the model flags."""
    if args.model_json:
        try:
            return NoiseModel.from_json(args.model_json)
        except ValueError as error:
            raise DomainError('Invalid --model-json: {}'.format(error))
    if args.model is None:
        raise DomainError('A noise model is required: use --model or --model-json.')
    descriptor = {'kind': args.model}
    if args.hurst is not None:
        descriptor['hurst'] = args.hurst
    if args.kappa is not None:
        descriptor['kappa'] = args.kappa
    return NoiseModel.from_dict(descriptor)


def _open_out(target):
    return sys.stdout if target == '-' else open(target, 'w', newline='')


def write_csv(target, times, values):
    """Write ``t,x`` rows with 17 significant digits."""
    handle = _open_out(target)
    try:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(('t', 'x'))
        for t, x in zip(times, values):
            writer.writerow(('{:.17g}'.format(t), '{:.17g}'.format(x)))
    finally:
        if handle is not sys.stdout:
            handle.close()


def read_csv(path):
    """
    Read a ``t,x`` file on a uniform, strictly increasing grid.

    :return: ``(times, values)``.
    :raises DegenerateInput: for empty, malformed or non-uniform files.
    """
    with open(path, newline='') as handle:
        rows = list(csv.reader(handle))
    if not rows or [cell.strip() for cell in rows[0]] != ['t', 'x']:
        raise DegenerateInput('{} does not start with the header t,x.'.format(path))
    try:
        data = np.array([[float(cell) for cell in row] for row in rows[1:] if row], dtype=float)
    except ValueError as error:
        raise DegenerateInput('{} contains a malformed row: {}'.format(path, error))
    if data.size == 0:
        raise DegenerateInput('{} contains no observations.'.format(path))
    if data.ndim != 2 or data.shape[1] != 2:
        raise DegenerateInput('{} must have exactly two columns.'.format(path))
    times, values = data[:, 0], data[:, 1]
    steps = np.diff(times)
    if np.any(steps <= 0):
        raise DegenerateInput('Times in {} are not strictly increasing.'.format(path))
    if steps.size and np.ptp(steps) > UNIFORM_GRID_RTOL * max(1.0, times[-1]):
        raise DegenerateInput('Times in {} are not on a uniform grid.'.format(path))
    return times, values


def write_json(target, document):
    text = json.dumps(document, indent=2)
    if target == '-':
        print(text)
    else:
        with open(target, 'w') as handle:
            handle.write(text + '\n')


def _finite_or_none(value):
    return None if value is None or not np.isfinite(value) else float(value)


def cmd_simulate(args):
    model = model_from_args(args)
    grid = Grid.from_horizon(args.t_max, args.dt)
    path = simulate_solution(model, args.theta, grid, args.seed, args.stream, kind=args.kind)
    write_csv(args.out, path.times, path.values)
    LOGGER.info('Wrote %d points of a %s path of %s', grid.n + 1, args.kind, model)
    return EXIT_OK


def cmd_estimate(args):
    model = model_from_args(args)
    times, values = read_csv(args.input)
    if args.discrete and args.method != 'ae':
        raise DomainError('--discrete is only available with --method ae.')
    if args.discrete:
        if times.size < 2:
            raise DegenerateInput('The discrete estimator needs the observation step.')
        delta = times[1] - times[0]
        observations = values[1:] if times[0] == 0 else values
        result = ae_discrete(observations, delta, model, alpha=args.alpha)
        document = result.to_dict()
    else:
        if times.size < 2:
            raise DegenerateInput('A path needs at least two observations.')
        grid = Grid(times[1] - times[0], times.size - 1)
        path = PathSample(grid, values, model, kind='X')
        if args.method == 'ae':
            document = ae_continuous(path, model, alpha=args.alpha).to_dict()
        else:
            if args.method == 'lse':
                estimate, method = lse_ito(path, model, theta_ref=args.theta_ref), 'LSE'
            else:
                estimate, method = mle_brownian(path), 'MLE'
            document = {'method': method, 'model': model.to_dict(),
                        'T': grid.horizon, 'theta_hat': float(estimate)}
    document['schema_version'] = SCHEMA_VERSION
    write_json(args.out, document)
    return EXIT_OK


def cmd_asymptotics(args):
    model = model_from_args(args)
    ctx = KernelContext(model, args.theta)
    report = asymptotics_report(ctx, args.t_max, with_moments=args.moments)
    lags = np.linspace(0.0, args.t_max, R_SAMPLE_COUNT)
    document = {
        'schema_version': SCHEMA_VERSION,
        'model': model.to_dict(),
        'theta': report.theta,
        'T': report.T,
        'psi': ctx.psi_value,
        'psi_prime': ctx.psi_prime_value,
        'r_samples': {'t': lags.tolist(), 'r': r_stationary(ctx, lags).tolist()},
        'w': report.w,
        'R': report.R,
        'sigma2': _finite_or_none(report.sigma2_classical),
        'regime': report.rate_regime,
        'be_bound': _finite_or_none(report.be_bound),
    }
    if args.moments:
        document.update(q2_exact=report.q2_exact, q4_exact=report.q4_exact)
    write_json(args.out, document)
    return EXIT_OK


def cmd_mc(args):
    config = ExperimentConfig.from_toml(args.config)
    report = run_experiment(config, workers=args.workers)
    write_json(args.out, report.to_dict(timing=args.timing))
    return EXIT_OK


COMMANDS = {
    'simulate': cmd_simulate,
    'estimate': cmd_estimate,
    'asymptotics': cmd_asymptotics,
    'mc': cmd_mc,
}


def configure_logging(verbosity):
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(level=level, stream=sys.stderr,
                        format='%(levelname)s %(name)s: %(message)s')


def main(argv=None):
    """
    Run the command line interface.

    :param argv: arguments without the program name, ``sys.argv[1:]`` by
        default.
    :return: exit code.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit:
        return exit.code
    configure_logging(args.verbose)
    try:
        return COMMANDS[args.command](args)
    except EstimateOutOfRange as error:
        code, message = EXIT_OUT_OF_RANGE, error
    except (NumericsError, SimulationError, ExperimentError) as error:
        code, message = EXIT_NUMERICS, error
    except (DegenerateInput, DomainError, ConfigError, FlavorError,
            UnsupportedModel, OSError) as error:
        code, message = EXIT_USAGE, error
    print('aefit: error: {}'.format(message), file=sys.stderr)
    return code


dispatch = main


if __name__ == '__main__':
    sys.exit(main())
