""" Command line interface.

Exit statuses: 0 every frame continued, 2 protective stop latched,
1 usage, configuration or I/O error.
"""

import argparse
import glob
import logging
import os
import re
import sys

from visionsafety import (
    EXIT_CONTINUE, EXIT_ERROR, EXIT_STOPPED, INITIAL_DECISION, PROTECTIVE_STOP)
from visionsafety.audit import AuditLog
from visionsafety.faults import (
    SceneError, apply_faults, load_scene, parse_fault, synthesize, write_pair)
from visionsafety.kernels import KernelError
from visionsafety.kernels.pgm import read_raw
from visionsafety.monitor import Monitor, load_latch, save_latch
from visionsafety.pipeline import GraphError
from visionsafety.pipeline.config import ConfigError, load_pipeline
from visionsafety.report import ReportError, coverage_report, render_records, render_text
from visionsafety.rules import RuleError
from visionsafety.rules.resolver import load_rules
from visionsafety.util import format_value

_LOGGER = logging.getLogger(__name__)

DEFAULT_PIPELINE = os.path.join('config', 'pipeline.yaml')
LATCH_SUFFIX = '.latch'
RECORDS_SUFFIX = '.tsv'
LEFT_SUFFIX = '_L.pgm'
RIGHT_SUFFIX = '_R.pgm'

# Errors reported as configuration errors, exit 1.
CONFIG_ERRORS = (ConfigError, GraphError, SceneError, KernelError, ReportError, OSError)


class UsageError(Exception):
    """ Invalid combination of arguments. """


class ArgumentParser(argparse.ArgumentParser):
    """ Argument parser exiting with status 1 on usage errors. """

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, '{}: error: {}\n'.format(self.prog, message))


def build_parser():
    """ Build the argument parser.

    :returns: ArgumentParser.
    """
    parser = ArgumentParser(prog='visionsafety',
                            description='Safety rules for a stereo camera pipeline.')
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help='log INFO, or DEBUG when repeated')
    commands = parser.add_subparsers(dest='command', metavar='COMMAND')
    commands.required = True

    def common(sub):
        sub.add_argument('--rules', required=True, help='rule file (.rules)')
        sub.add_argument('--pipeline', default=DEFAULT_PIPELINE, help='pipeline YAML')

    check = commands.add_parser('check', help='compile rules against the pipeline')
    common(check)

    run = commands.add_parser('run', help='run the monitored frame loop')
    common(run)
    source = run.add_mutually_exclusive_group(required=True)
    source.add_argument('--input', metavar='DIR', help='directory of <frame>_L/_R.pgm pairs')
    source.add_argument('--synthetic', metavar='PATH', help='scene YAML')
    run.add_argument('--inject', action='append', default=[], metavar='KIND:TARGET[:PARAM]',
                     help='lens fault, repeatable')
    run.add_argument('--frames', type=int, help='number of frames')
    run.add_argument('--log', help='audit log, appended')
    run.add_argument('--report', help='write the coverage report here')
    run.add_argument('--bit-depth', type=int, help='override the scene bit depth')
    run.add_argument('--no-timestamp', action='store_true', help='write - for timestamps')
    run.add_argument('--reset', action='store_true', help='clear a latched stop first')
    run.add_argument('--latch', help='latch file, default <log>.latch')

    report = commands.add_parser('report', help='write the safety function coverage report')
    common(report)
    report.add_argument('--report', help='output path, default stdout')

    render = commands.add_parser('render', help='export a synthetic stereo sequence')
    render.add_argument('--pipeline', default=DEFAULT_PIPELINE, help='pipeline YAML')
    render.add_argument('--synthetic', required=True, metavar='PATH', help='scene YAML')
    render.add_argument('--output', required=True, metavar='DIR', help='frame directory')
    render.add_argument('--inject', action='append', default=[], metavar='KIND:TARGET[:PARAM]')
    render.add_argument('--frames', type=int, default=1)
    render.add_argument('--bit-depth', type=int)
    return parser


def _diagnostic(path, err):
    """ Positioned diagnostic for a rule error. """
    if err.position is None:
        return '{}: {}: {}'.format(path, err.name, err.message)
    return '{}:{}:{}: {}: {}'.format(path, err.position.line, err.position.column,
                                     err.name, err.message)


def _frame_key(path):
    prefix = os.path.basename(path)[:-len(LEFT_SUFFIX)]
    return (0, int(prefix), prefix) if prefix.isdigit() else (1, 0, prefix)


def frame_pairs(directory):
    """ Stereo pairs of a frame directory, in frame order.

    :param directory: Directory of `<frame>_L.pgm` / `<frame>_R.pgm`.
    :returns: List of (left path, right path).
    """
    if not os.path.isdir(directory):
        raise ConfigError('{} is not a directory'.format(directory))
    lefts = sorted(glob.glob(os.path.join(directory, '*' + LEFT_SUFFIX)), key=_frame_key)
    pairs = []
    for left in lefts:
        right = re.sub(re.escape(LEFT_SUFFIX) + '$', RIGHT_SUFFIX, left)
        if not os.path.exists(right):
            raise ConfigError('{} has no right image {}'.format(left, right))
        pairs.append((left, right))
    if not pairs:
        raise ConfigError('no stereo pairs in {}'.format(directory))
    return pairs


def _scene(args, graph):
    cfg = load_scene(args.synthetic, graph.calibration)
    if args.bit_depth is not None:
        cfg = cfg.replace(bit_depth=args.bit_depth)
    return cfg


def _frames(args, graph, faults):
    """ (left, right) pairs for the run.

    Frame directories are read completely before the first frame
    runs, so a bad file never interrupts the loop.
    """
    if args.synthetic:
        cfg = _scene(args, graph)
        count = 1 if args.frames is None else args.frames
        return (synthesize(cfg, frame, faults) for frame in range(count))
    pairs = frame_pairs(args.input)
    if args.frames is not None:
        pairs = pairs[:args.frames]
    return [apply_faults(read_raw(left), read_raw(right), faults) for left, right in pairs]


def _compile(args):
    """ Load the pipeline and compile the rule file against it. """
    config = load_pipeline(args.pipeline)
    return config, load_rules(args.rules, config.graph)


def _write_report(path, rules, mapping):
    report = coverage_report(rules, mapping)
    text = render_text(report)
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, 'w', encoding='utf-8') as handle:
        handle.write(text)
    with open(path + RECORDS_SUFFIX, 'w', encoding='utf-8') as handle:
        handle.write(render_records(report))


def _print_frame(result):
    for verdict in result.verdicts:
        operands = ', '.join('{} = {}'.format(label, format_value(value))
                             for label, value in verdict.evaluated)
        detail = operands if verdict.error is None else '{}: {}'.format(
            verdict.error, verdict.message)
        print('frame {} {} {} {}'.format(result.frame_id, verdict.rule_id, verdict.outcome,
                                         detail).rstrip())
    print('frame {} {}'.format(result.frame_id, result.decision.state))


def cmd_check(args):
    """ Compile a rule file against the pipeline.

    :param args: Parsed arguments.
    :returns: Exit status.
    """
    _, rules = _compile(args)
    if len(rules) == 0:
        _LOGGER.warning("%s defines no rules", args.rules)
    print('{} rules compiled'.format(len(rules)))
    return EXIT_CONTINUE


def cmd_run(args):
    """ Run the monitored frame loop.

    :param args: Parsed arguments.
    :returns: Exit status.
    """
    if args.bit_depth is not None and not args.synthetic:
        raise UsageError('--bit-depth applies to --synthetic scenes only')
    if args.frames is not None and args.frames < 0:
        raise UsageError('--frames must be non-negative')
    config, rules = _compile(args)
    faults = [parse_fault(text) for text in args.inject]
    latch = args.latch or (args.log + LATCH_SUFFIX if args.log else None)
    decision = INITIAL_DECISION
    if latch is not None:
        decision = INITIAL_DECISION if args.reset else load_latch(latch)
    if args.reset:
        _LOGGER.info("Latch reset requested")
    audit = AuditLog(args.log, timestamps=not args.no_timestamp) if args.log else None
    frames = _frames(args, config.graph, faults)
    monitor = Monitor(config.graph, rules, audit, decision)
    try:
        for left, right in frames:
            _print_frame(monitor.process(left, right))
    except CONFIG_ERRORS as err:
        if monitor.decision.state != PROTECTIVE_STOP:
            raise
        _LOGGER.error("Frame loop aborted with the stop latched: %s", err)
        print('error: {}'.format(err), file=sys.stderr)
    finally:
        if latch is not None:
            save_latch(latch, monitor.decision)
    if args.report:
        _write_report(args.report, rules, config.safety_functions)
    print('decision {}'.format(monitor.decision.state))
    if monitor.decision.state == PROTECTIVE_STOP:
        return EXIT_STOPPED
    return EXIT_CONTINUE


def cmd_report(args):
    """ Write the coverage report.

    :param args: Parsed arguments.
    :returns: Exit status.
    """
    config, rules = _compile(args)
    _write_report(args.report, rules, config.safety_functions)
    return EXIT_CONTINUE


def cmd_render(args):
    """ Export a synthetic stereo sequence.

    :param args: Parsed arguments.
    :returns: Exit status.
    """
    config = load_pipeline(args.pipeline)
    cfg = _scene(args, config.graph)
    faults = [parse_fault(text) for text in args.inject]
    for frame in range(args.frames):
        left, right = synthesize(cfg, frame, faults)
        paths = write_pair(args.output, frame, left, right)
        print(' '.join(paths))
    return EXIT_CONTINUE


COMMANDS = {
    'check': cmd_check,
    'run': cmd_run,
    'report': cmd_report,
    'render': cmd_render,
}


def main(argv=None):
    """ Entry point.

    :param argv: Arguments, default sys.argv[1:].
    :returns: Exit status.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return err.code
    level = logging.WARNING
    if args.verbose == 1:
        level = logging.INFO
    elif args.verbose > 1:
        level = logging.DEBUG
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s')
    try:
        return COMMANDS[args.command](args)
    except RuleError as err:
        print(_diagnostic(args.rules, err), file=sys.stderr)
    except UsageError as err:
        parser.print_usage(sys.stderr)
        print('{}: error: {}'.format(parser.prog, err), file=sys.stderr)
    except CONFIG_ERRORS as err:
        print('error: {}'.format(err), file=sys.stderr)
    return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())
