""" Frame execution, rule evaluation and the protective stop gate. """

import logging
from collections import namedtuple
from fractions import Fraction

import yaml

from visionsafety import (
    CONTINUE, ERROR, FAIL, INITIAL_DECISION, PASS, PROTECTIVE_STOP,
    PipelineDecision, Verdict)
from visionsafety.kernels import DimensionMismatch, KernelError
from visionsafety.kernels.mono import debayer_to_mono, histogram, rectify
from visionsafety.kernels.stereo import disparity, in_area, reproject
from visionsafety.pipeline import (
    CAMERA, DEBAYER, DISPARITY, INPUT, LEFT, RECTIFY, REPROJECT, RIGHT, GraphError)
from visionsafety.pipeline.config import ConfigError
from visionsafety.pipeline.store import FrameStore, StoreError
from visionsafety.rules.resolver import CONSTANT, REGION, TAP
from visionsafety.rules.syntax import COMPARISONS
from visionsafety.util import format_value

_LOGGER = logging.getLogger(__name__)

# Errors a frame may raise that still yield verdicts.
FRAME_ERRORS = (KernelError, StoreError, GraphError)


class EvaluationError(ValueError):
    """ Base class for rule evaluation errors. """


class DivisionByZero(EvaluationError):
    """ Rule divides by zero. """


class EmptyHistogram(EvaluationError):
    """ Extreme level of a histogram without pixels. """


# Errors isolated to the rule that raised them.
RULE_ERRORS = (EvaluationError, StoreError, KernelError, GraphError)


FrameResult = namedtuple('FrameResult', 'frame_id store verdicts decision')


def _check_inputs(graph, left, right):
    """ Check a stereo pair against the calibrated image size. """
    width, height = graph.calibration.image_size
    for side, image in ((LEFT, left), (RIGHT, right)):
        if (image.width, image.height) != (width, height):
            raise DimensionMismatch('{} image is {}x{}, calibration expects {}x{}'.format(
                side, image.width, image.height, width, height))
    if left.bit_depth != right.bit_depth or left.bayer_pattern != right.bayer_pattern:
        raise DimensionMismatch('stereo pair differs: {!r} vs {!r}'.format(left, right))


def _execute_component(component, inputs, left, right, calib):
    """ Run one component.

    :param component: Component.
    :param inputs: Mapping input port -> value.
    :param left: Left RawImage.
    :param right: Right RawImage.
    :param calib: CalibrationInfo.
    :returns: Output value.
    """
    params = component.params
    _LOGGER.debug(" -> Running component '%s'", component)
    if component.kind == CAMERA:
        return left if params['side'] == LEFT else right
    elif component.kind == DEBAYER:
        return debayer_to_mono(inputs[INPUT])
    elif component.kind == RECTIFY:
        return rectify(inputs[INPUT], calib)
    elif component.kind == DISPARITY:
        return disparity(inputs[LEFT], inputs[RIGHT], params['block'], params['max_disparity'])
    elif component.kind == REPROJECT:
        return reproject(inputs['disparity'], calib, inputs.get('reference'))
    raise GraphError('Invalid component kind: {}'.format(component.kind))


def run_frame(graph, left, right, frame_id=0):
    """ Execute every component on one stereo pair.

    The store is sealed only after the last component ran, so
    a failing kernel never leaves a sealed partial frame.

    :param graph: PipelineGraph.
    :param left: Left RawImage.
    :param right: Right RawImage.
    :param frame_id: Frame number.
    :returns: Sealed FrameStore.
    """
    _check_inputs(graph, left, right)
    store = FrameStore(graph, frame_id)
    for name in graph.topological_order():
        component = graph.component(name)
        inputs = dict((port, store.tap(connector.producer, connector.producer_port))
                      for port, connector in graph.incoming(name).items())
        value = _execute_component(component, inputs, left, right, graph.calibration)
        port = next(iter(component.outputs))
        store.put(name, port, value)
    store.seal()
    _LOGGER.debug("Frame %d executed, %d values", frame_id, len(store))
    return store


class Evaluator(object):
    """ Evaluates plan nodes against one sealed frame.

    Results and errors are memoized by node key, so assignments
    shared by several rules are computed once per frame.
    """

    def __init__(self, store):
        """ Initialize evaluator.

        :param store: Sealed FrameStore.
        """
        self._store = store
        self._memo = {}

    def value(self, node):
        """ Value of a plan node.

        :param node: PlanNode.
        :returns: Evaluated value.
        """
        if node.key in self._memo:
            value, error = self._memo[node.key]
        else:
            try:
                value, error = self._compute(node), None
            except RULE_ERRORS as err:
                value, error = None, err
            self._memo[node.key] = (value, error)
        if error is not None:
            raise error
        return value

    def _compute(self, node):
        op = node.op
        if op == TAP:
            return self._store.tap(*node.value)
        if op == REGION:
            return self._store.graph.region(node.value)
        if op == CONSTANT:
            return node.value
        if op == 'histogram':
            source = node.args[0]
            if source.op == TAP:
                return self._store.tap(source.value[0], source.value[1], 'histogram')
            return histogram(self.value(source))
        args = [self.value(arg) for arg in node.args]
        if op == 'bins':
            return args[0].counts
        elif op == 'nonempty':
            return args[0][args[0] > 0]
        elif op == 'length':
            return Fraction(len(args[0]))
        elif op in ('max', 'min'):
            occupied = args[0].occupied
            if occupied.size == 0:
                raise EmptyHistogram('{} has no occupied levels'.format(node.label))
            return Fraction(int(occupied[-1] if op == 'max' else occupied[0]))
        elif op == 'inArea':
            return in_area(args[0], args[1])
        lhs, rhs = args
        if op == '+':
            return lhs + rhs
        elif op == '-':
            return lhs - rhs
        elif op == '*':
            return lhs * rhs
        elif op == '/':
            if rhs == 0:
                raise DivisionByZero('{} divides by zero'.format(node.label))
            return lhs / rhs
        elif op in COMPARISONS:
            return {
                '>': lhs > rhs, '<': lhs < rhs, '>=': lhs >= rhs,
                '<=': lhs <= rhs, '==': lhs == rhs,
            }[op]
        raise EvaluationError('unknown operation {}'.format(op))


def _error_verdict(rule, frame_id, err):
    return Verdict(rule.rule_id, frame_id, ERROR, (),
                   '{}: {}'.format(rule.source, err), type(err).__name__)


def evaluate(rules, store):
    """ Evaluate every rule on a sealed frame.

    One rule failing to evaluate yields an ERROR verdict for that
    rule only. The store is only read.

    :param rules: CompiledRuleSet.
    :param store: Sealed FrameStore.
    :returns: List of Verdict in rule-id order.
    """
    if not store.sealed:
        raise StoreError('frame {} is not sealed'.format(store.frame_id))
    evaluator = Evaluator(store)
    verdicts = []
    for rule in rules:
        try:
            operands = tuple((node.label, evaluator.value(node)) for node in rule.operands)
            holds = evaluator.value(rule.plan)
        except RULE_ERRORS as err:
            verdicts.append(_error_verdict(rule, store.frame_id, err))
            continue
        outcome = PASS if holds else FAIL
        message = '{}: {}'.format(rule.source, ', '.join(
            '{} = {}'.format(label, format_value(value)) for label, value in operands))
        _LOGGER.debug("Frame %d %s %s (%s)", store.frame_id, rule.rule_id, outcome, message)
        verdicts.append(Verdict(rule.rule_id, store.frame_id, outcome, operands, message, None))
    return verdicts


def gate(verdicts, decision=INITIAL_DECISION):
    """ Fold a frame's verdicts into the latched decision.

    Any FAIL or ERROR enters PROTECTIVE_STOP, which persists until
    `reset`.

    :param verdicts: Verdicts of one frame.
    :param decision: Decision so far.
    :returns: PipelineDecision.
    """
    tripped = tuple((verdict.frame_id, verdict.rule_id) for verdict in verdicts
                    if verdict.outcome != PASS)
    if not tripped:
        return decision
    if decision.state == CONTINUE:
        _LOGGER.warning("Protective stop latched by %s",
                        ', '.join('{}@{}'.format(r, f) for f, r in tripped))
    return PipelineDecision(PROTECTIVE_STOP, decision.tripped_by + tripped)


def reset(decision=None):
    """ Operator reset of a latched stop.

    :param decision: Decision being cleared, for the log.
    :returns: Fresh CONTINUE decision.
    """
    if decision is not None and decision.state == PROTECTIVE_STOP:
        _LOGGER.info("Operator reset of protective stop (%d trips)", len(decision.tripped_by))
    return INITIAL_DECISION


def load_latch(path):
    """ Read a persisted decision.

    :param path: Latch file path.
    :returns: PipelineDecision, CONTINUE when the file is absent.
    """
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            data = yaml.safe_load(handle) or {}
    except FileNotFoundError:
        return INITIAL_DECISION
    except yaml.YAMLError as err:
        raise ConfigError('{}: {}'.format(path, err))
    state = data.get('state', CONTINUE)
    if state not in (CONTINUE, PROTECTIVE_STOP):
        raise ConfigError('{}: invalid latch state {}'.format(path, state))
    tripped = tuple((int(frame_id), str(rule_id))
                    for frame_id, rule_id in data.get('tripped_by') or ())
    return PipelineDecision(state, tripped)


def save_latch(path, decision):
    """ Persist a decision so a stop survives restarts.

    :param path: Latch file path.
    :param decision: PipelineDecision.
    """
    data = {
        'state': decision.state,
        'tripped_by': [[frame_id, rule_id] for frame_id, rule_id in decision.tripped_by],
    }
    with open(path, 'w', encoding='utf-8') as handle:
        yaml.safe_dump(data, handle, default_flow_style=False)


class Monitor(object):
    """ Runs frames through the pipeline and the rules.

    Each processed frame is executed, evaluated, gated and
    audited. The downstream consumer receives the sealed store
    only while the gate says CONTINUE.
    """

    def __init__(self, graph, rules, audit=None, decision=INITIAL_DECISION,
                 consumer=None, first_frame=0):
        """ Initialize monitor.

        :param graph: PipelineGraph.
        :param rules: CompiledRuleSet bound to the graph.
        :param audit: Optional AuditLog.
        :param decision: Initial decision, e.g. a persisted latch.
        :param consumer: Optional callable taking a sealed FrameStore.
        :param first_frame: Id of the first frame.
        """
        self._graph = graph
        self._rules = rules
        self._audit = audit
        self._decision = decision
        self._consumer = consumer
        self._next_frame = first_frame
        if decision.state == PROTECTIVE_STOP:
            _LOGGER.warning("Starting with a latched protective stop")

    @property
    def decision(self):
        """ Current gate decision. """
        return self._decision

    @property
    def next_frame(self):
        """ Id the next frame will get. """
        return self._next_frame

    def process(self, left, right):
        """ Process one stereo pair.

        :param left: Left RawImage.
        :param right: Right RawImage.
        :returns: FrameResult.
        """
        frame_id = self._next_frame
        self._next_frame += 1
        store = None
        try:
            store = run_frame(self._graph, left, right, frame_id)
            verdicts = evaluate(self._rules, store)
        except FRAME_ERRORS as err:
            _LOGGER.error("Frame %d failed: %s", frame_id, err)
            verdicts = [_error_verdict(rule, frame_id, err) for rule in self._rules]
        self._decision = gate(verdicts, self._decision)
        _LOGGER.info("Frame %d: %s", frame_id, self._decision.state)
        if self._audit is not None:
            self._audit.append(frame_id, verdicts, self._decision)
        if self._decision.state == CONTINUE and self._consumer is not None and store is not None:
            self._consumer(store)
        return FrameResult(frame_id, store, verdicts, self._decision)

    def reset(self):
        """ Clear a latched stop. """
        self._decision = reset(self._decision)
