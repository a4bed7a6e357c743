import argparse
import logging
import os
import sys
from typing import List, Optional

from ultralocal.benchmark.config import InvalidConfig, ScenarioConfig, config_from_dict, load_config, output_directory
from ultralocal.benchmark.scenario import (
    build_system,
    certificate_failures,
    compare_modes,
    design_filter,
    evaluate_design,
    resolve_sigma_max,
    run_scenario,
    verify_trace,
    write_artifacts,
)
from ultralocal.estimator import IdentityViolation, IllConditioned, filter_from_design, load_design, save_design
from ultralocal.lmi import AllInfeasible, NumericalFailure, export_sdpa
from ultralocal.simulation import load_trace_csv
from ultralocal.util.logging_config import config_logger
from ultralocal.util.prettyprint import pformat

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INFEASIBLE = 2
EXIT_NUMERICAL = 3


def _config(path: Optional[str], args: argparse.Namespace) -> ScenarioConfig:
    cfg = load_config(path) if path else ScenarioConfig()
    if getattr(args, 'out', None):
        cfg.output_dir = args.out
    if args.no_progress:
        cfg.progress = False
    logger.info(f'Scenario config:\n{pformat(cfg)}')
    return cfg


def cmd_synthesize(args: argparse.Namespace) -> int:
    cfg = _config(args.config, args)
    mode = args.mode or cfg.design.mode
    if mode == 'all':
        raise InvalidConfig('synthesize designs a single mode, got all')
    _, aug = build_system(cfg)
    sigma_max = resolve_sigma_max(cfg, aug) if mode == 'tradeoff' else float('inf')
    result, _, record = design_filter(cfg, aug, mode, sigma_max)
    out = output_directory(cfg)
    save_design(record, os.path.join(out, 'gains.json'))
    if args.sdpa:
        export_sdpa(result.problem, args.sdpa)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _config(args.config, args)
    plant, aug = build_system(cfg)
    record = load_design(args.gains)
    fr = filter_from_design(record, aug)
    trace, _, evaluation = evaluate_design(cfg, plant, fr, record)
    failures = certificate_failures(evaluation['certificate_checks'])
    write_artifacts(output_directory(cfg), record, trace, {**evaluation, 'mode': record.mode, 'violations': failures})
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    trace = load_trace_csv(args.trace)
    if args.config:
        cfg = load_config(args.config)
    elif 'config' in trace.meta:
        cfg = config_from_dict(trace.meta['config'])
    else:
        raise InvalidConfig(f'{args.trace} carries no config, pass --config')
    _, aug = build_system(cfg)
    record = load_design(args.gains)
    # rebuilding re-checks the nullification identities
    fr = filter_from_design(record, aug)
    report = verify_trace(trace, fr, record, os.path.basename(args.trace))
    logger.info(f'Verification of {args.trace} against {args.gains}:\n{pformat(report)}')
    failures = certificate_failures([report])
    if failures:
        logger.error(f'{failures} certificate checks failed')
        return EXIT_FAILED
    return EXIT_OK


def cmd_benchmark(args: argparse.Namespace) -> int:
    cfg = _config(args.config, args)
    mode = args.mode or cfg.design.mode
    if mode == 'all':
        comparison = compare_modes(cfg)
        failures = sum(r.summary['violations'] for r in comparison.results.values())
    else:
        failures = run_scenario(cfg, mode).summary['violations']
    if failures:
        logger.error(f'{failures} certificate checks failed')
        return EXIT_FAILED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='ultralocal', description='Robust fault estimator synthesis and benchmarking')
    parser.add_argument('--log-level', default='INFO', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    parser.add_argument('--no-log-file', action='store_true', help='log to the console only')
    parser.add_argument('--log-dir', default='logs')
    parser.add_argument('--no-progress', action='store_true', help='disable progress bars')
    sub = parser.add_subparsers(dest='command', required=True)

    synthesize = sub.add_parser('synthesize', help='solve the synthesis program and write gains.json')
    synthesize.add_argument('config')
    synthesize.add_argument('--mode', choices=['l2', 'l2linf', 'tradeoff'])
    synthesize.add_argument('--out')
    synthesize.add_argument('--sdpa', help='also export the selected grid point in SDPA format')
    synthesize.set_defaults(func=cmd_synthesize)

    simulate = sub.add_parser('simulate', help='simulate a saved design')
    simulate.add_argument('config')
    simulate.add_argument('--gains', required=True)
    simulate.add_argument('--out')
    simulate.set_defaults(func=cmd_simulate)

    verify = sub.add_parser('verify', help='check a saved trace against a saved design')
    verify.add_argument('--gains', required=True)
    verify.add_argument('--trace', required=True)
    verify.add_argument('--config', help='default: the config stored with the trace')
    verify.set_defaults(func=cmd_verify)

    benchmark = sub.add_parser('benchmark', help='design, simulate and verify end to end')
    benchmark.add_argument('--mode', choices=['l2', 'l2linf', 'tradeoff', 'all'])
    benchmark.add_argument('--config')
    benchmark.add_argument('--out')
    benchmark.set_defaults(func=cmd_benchmark)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    config_logger(f'ultralocal-{args.command}', logging.getLevelName(args.log_level), not args.no_log_file, logdir=args.log_dir)
    try:
        return args.func(args)
    except AllInfeasible as e:
        logger.error(str(e))
        return EXIT_INFEASIBLE
    except NumericalFailure as e:
        logger.error(str(e))
        return EXIT_NUMERICAL
    except (IllConditioned, IdentityViolation) as e:
        logger.error(f'Filter reconstruction failed: {e}')
        return EXIT_NUMERICAL
    except InvalidConfig as e:
        logger.error(str(e))
        return EXIT_FAILED
    except OSError as e:
        logger.error(f'Cannot read input: {e}')
        return EXIT_FAILED
    except ValueError as e:
        # invalid plant documents, uncertainty models and designs that do not match the configured system
        logger.error(f'{e.__class__.__name__}: {e}')
        return EXIT_FAILED


if __name__ == '__main__':
    sys.exit(main())
