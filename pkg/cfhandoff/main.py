"""Entry-point of the ``cfhandoff`` console script.

Run an experiment with ``cfhandoff run --profile desk``, sweep a parameter
with ``cfhandoff sweep --param engine.r_threshold --values 5,7,9``, check the
closed forms with ``cfhandoff validate``, print problem sizes with
``cfhandoff complexity`` and test a finished run against the handoff
reduction limits with ``cfhandoff check``.
"""
import sys
import json
import logging
import argparse

from cfhandoff import pathfinder
from cfhandoff.errors import CfHandoffError, EXIT_OK, EXIT_IO
from cfhandoff.handoff.engine import complexity_summary, derive_policy, initial_serving
from cfhandoff.pomdp.dump import dump_model
from cfhandoff.sim.config import load_config, read_json, with_override, restrict_schemes
from cfhandoff.sim.export import export, summarize, write_json
from cfhandoff.sim.harness import run_experiment, build_trip
from cfhandoff.sim.validate import check_reduction, run_suites, SUITES
from cfhandoff.utils import get_logger, set_verbosity


logger = get_logger(__name__)


def resolve(args):
    """Experiment configuration from the common command-line options."""
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f'seeds.master_seed={args.seed}')
    if args.trials is not None:
        overrides.append(f'seeds.trials={args.trials}')
    if args.workers is not None:
        overrides.append(f'seeds.workers={args.workers}')
    cfg = load_config(args.config_path, args.profile, overrides)
    if args.schemes:
        cfg = restrict_schemes(cfg, [s for item in args.schemes for s in item.split(',')])
    return cfg


def dump_first_model(cfg, path):
    """Writes the winning sub-problem of the first decision of trial 0."""
    trip, seed = build_trip(cfg, 0)
    engine_cfg = cfg.engine_config(cfg.schemes[0])
    serving = initial_serving(trip, engine_cfg.b_con)
    known = {b: trip.lsf[0][b] for b in serving}
    derived = derive_policy(trip, 1, serving, known, engine_cfg, seed_key=(seed, 1))
    dump_model(derived.model, path)


def command_run(args):
    cfg = resolve(args)
    out_dir = pathfinder.output_dir(args.out)
    metrics = run_experiment(cfg, progress=not args.quiet)
    export(metrics, out_dir, cfg)
    if args.dump_model:
        dump_first_model(cfg, args.dump_model)


def parse_values(text):
    values = []
    for raw in text.split(','):
        try:
            values.append(json.loads(raw))
        except json.JSONDecodeError:
            values.append(raw)
    return values


def command_sweep(args):
    cfg = resolve(args)
    out_dir = pathfinder.output_dir(args.out)
    points = []
    for value in parse_values(args.values):
        point_cfg = with_override(cfg, f'{args.param}={json.dumps(value)}')
        logger.info(f'Sweep point {args.param}={value}.')
        metrics = run_experiment(point_cfg, progress=not args.quiet)
        point_dir = out_dir / f'{args.param}={value}'
        export(metrics, point_dir, point_cfg)
        summary = summarize(metrics)
        points.append({
            'value': value,
            'directory': point_dir.name,
            'ho_reduction_ratios': summary['ho_reduction_ratios'],
            'se_p10_nats': {s: v['se_p10_nats'] for s, v in summary['schemes'].items()},
            'mean_total_ho_per_trial_aps': {s: v['mean_total_ho_per_trial_aps']
                                            for s, v in summary['schemes'].items()},
        })
    write_json({'param': args.param, 'points': points}, out_dir / 'sweep.json')


def command_validate(args):
    run_suites(args.suites or None, seed=args.seed or 0)


def command_check(args):
    check_reduction(read_json(pathfinder.output_dir(args.out) / 'summary.json'))


def command_complexity(args):
    print(json.dumps(complexity_summary(args.n_aps, args.b_con), indent=2, sort_keys=True))


def add_experiment_options(parser):
    parser.add_argument('--config', dest='config_path', type=str, default=None,
                        help='JSON configuration file')
    parser.add_argument('--profile', dest='profile', type=str, default=None,
                        help='Shipped profile, reference or desk')
    parser.add_argument('--set', dest='overrides', action='append', default=[],
                        metavar='KEY=VALUE', help='Dotted-key override, repeatable')
    parser.add_argument('--trials', dest='trials', type=int, default=None,
                        help='Number of trials')
    parser.add_argument('--scheme', dest='schemes', action='append', default=[],
                        help='Scheme(s) to run, repeatable or comma-separated')
    parser.add_argument('--workers', dest='workers', type=int, default=None,
                        help='Worker processes over trials')
    parser.add_argument('--out', dest='out', type=str, default=None,
                        help=f'Output directory (default ${pathfinder.OUTPUT_DIR_ENV} '
                             f'or ./{pathfinder.DEFAULT_OUTPUT_DIR})')


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument('--verbose', dest='verbose', action='store_true',
                           help='Log debug messages')
    verbosity.add_argument('--quiet', dest='quiet', action='store_true',
                           help='Only log warnings and errors')
    common.add_argument('--seed', dest='seed', type=int, default=None,
                        help='Master seed')

    parser = argparse.ArgumentParser(prog='cfhandoff',
                                     description='Handoff simulator for cell-free massive MIMO.')
    commands = parser.add_subparsers(dest='command', required=True)

    run = commands.add_parser('run', parents=[common], help='Run an experiment')
    add_experiment_options(run)
    run.add_argument('--dump-model', dest='dump_model', type=str, default=None,
                     help='Also write the first derived POMDP model to this file')
    run.set_defaults(handler=command_run)

    sweep = commands.add_parser('sweep', parents=[common], help='Sweep one parameter')
    add_experiment_options(sweep)
    sweep.add_argument('--param', dest='param', type=str, required=True,
                       help='Dotted configuration key')
    sweep.add_argument('--values', dest='values', type=str, required=True,
                       help='Comma-separated values')
    sweep.set_defaults(handler=command_sweep)

    validate = commands.add_parser('validate', parents=[common], help='Run oracle suites')
    validate.add_argument('--suite', dest='suites', action='append', choices=sorted(SUITES),
                          help='Suite to run, repeatable (default all)')
    validate.set_defaults(handler=command_validate)

    complexity = commands.add_parser('complexity', parents=[common],
                                     help='Print monolithic and decomposed problem sizes')
    complexity.add_argument('--aps', dest='n_aps', type=int, default=125,
                            help='Number of APs')
    complexity.add_argument('--b-con', dest='b_con', type=int, default=5,
                            help='Number of serving APs')
    complexity.set_defaults(handler=command_complexity)

    check = commands.add_parser('check', parents=[common],
                                help='Check the handoff reduction ratios of a finished run')
    check.add_argument('--out', dest='out', type=str, default=None,
                       help='Results directory of the run')
    check.set_defaults(handler=command_check)
    return parser


def main(argv=None):
    """Parses ``argv`` and runs the selected command.

    Returns:
    --------
        (int):
            Process exit code.
    """
    args = build_parser().parse_args(argv)
    if args.verbose:
        set_verbosity(logging.DEBUG)
    elif args.quiet:
        set_verbosity(logging.WARNING)
    else:
        set_verbosity(logging.INFO)

    try:
        args.handler(args)
    except CfHandoffError as error:
        logger.error(str(error))
        return error.exit_code
    except OSError as error:
        logger.error(str(error))
        return EXIT_IO
    return EXIT_OK


def launch():
    """Entry point to the console script."""
    sys.exit(main())


if __name__ == '__main__':
    launch()
