""" Bind a parsed rule set to a pipeline graph.

Resolution turns every assertion into an evaluation plan: a DAG of
PlanNode whose leaves are pipeline taps, registered regions and
constants, and whose inner nodes are builtin operations, arithmetic
and comparisons. Nodes are keyed structurally, so an assignment used
by several rules is a single shared node.
"""

import logging
from collections import OrderedDict
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Optional, Tuple

from visionsafety.pipeline import OUTPUT
from visionsafety.rules import (
    AmbiguousOutput, Position, TypeMismatch, UnknownIdentifier)
from visionsafety.rules.lexer import PIXEL_UNIT
from visionsafety.rules.parser import parse_source
from visionsafety.rules.syntax import (
    COMPARISONS, Assign, BinOp, Call, Ident, Member, Number, format_expression)
from visionsafety.rules.types import (
    BOOLEAN_T, COUNT, HISTOGRAM_T, LEVEL, MONO_IMAGE_T, PIXEL, POINT_CLOUD_T, PORT_TYPES,
    RATIO, RAW_IMAGE_T, REGION_T, SERIES_T, scalar, unifiable, unify)

_LOGGER = logging.getLogger(__name__)

RULE_PREFIX = 'R'

# Node operations besides the builtins and operators.
TAP = 'tap'
REGION = 'region'
CONSTANT = 'const'

# name -> (accepted types per argument, result type)
BUILTINS = OrderedDict([
    ('histogram', (((MONO_IMAGE_T, RAW_IMAGE_T),), HISTOGRAM_T)),
    ('bins', (((HISTOGRAM_T,),), SERIES_T)),
    ('nonempty', (((SERIES_T,),), SERIES_T)),
    ('length', (((SERIES_T, POINT_CLOUD_T),), scalar(COUNT))),
    ('max', (((HISTOGRAM_T,),), scalar(LEVEL))),
    ('min', (((HISTOGRAM_T,),), scalar(LEVEL))),
    ('inArea', (((POINT_CLOUD_T,), (REGION_T,)), POINT_CLOUD_T)),
])


@dataclass(frozen=True)
class PlanNode:
    """ One node of an evaluation plan. """
    key: str
    op: str
    type: Any
    label: str
    args: Tuple['PlanNode', ...] = ()
    value: Any = None


@dataclass(frozen=True)
class CompiledRule:
    rule_id: str
    plan: PlanNode
    span: Tuple[Optional[Position], Optional[Position]]
    source: str

    @property
    def operands(self):
        """ The two sides of the rule's comparison. """
        return self.plan.args


class CompiledRuleSet(object):
    """ Resolved rules bound to one pipeline graph. """

    def __init__(self, rules, bindings, graph):
        """ Initialize compiled rule set.

        :param rules: CompiledRule sequence in rule-id order.
        :param bindings: Mapping assignment name -> PlanNode.
        :param graph: PipelineGraph the taps refer to.
        """
        self._rules = tuple(rules)
        self._bindings = OrderedDict(bindings)
        self._graph = graph

    @property
    def rules(self):
        """ Compiled rules in rule-id order. """
        return self._rules

    @property
    def rule_ids(self):
        """ Rule ids in order. """
        return tuple(rule.rule_id for rule in self._rules)

    @property
    def bindings(self):
        """ Assignment plans by name. """
        return OrderedDict(self._bindings)

    @property
    def graph(self):
        """ Graph the rules are bound to. """
        return self._graph

    @property
    def source_map(self):
        """ Rule id -> (start, end) source positions. """
        return OrderedDict((rule.rule_id, rule.span) for rule in self._rules)

    def rule(self, rule_id):
        """ Fetch a rule by id.

        :param rule_id: Rule id, e.g. `R1`.
        :returns: CompiledRule.
        """
        for rule in self._rules:
            if rule.rule_id == rule_id:
                return rule
        raise KeyError(rule_id)

    def taps(self):
        """ Every (component, port) pair the plans read. """
        found = set()
        stack = [rule.plan for rule in self._rules]
        while stack:
            node = stack.pop()
            if node.op == TAP:
                found.add(node.value)
            stack.extend(node.args)
        return sorted(found)

    def __len__(self):
        return len(self._rules)

    def __iter__(self):
        return iter(self._rules)

    def __eq__(self, other):
        return (isinstance(other, CompiledRuleSet) and
                self._rules == other.rules and self._bindings == other.bindings)

    def __ne__(self, other):
        return not self == other

    __hash__ = None


class _ComponentRef(object):
    """ Bare component name awaiting a port selection. """

    def __init__(self, name, position):
        self.name = name
        self.position = position


class Resolver(object):
    """ Resolves one rule set against one graph. """

    def __init__(self, graph):
        """ Initialize resolver.

        :param graph: Validated PipelineGraph.
        """
        self._graph = graph
        self._bindings = OrderedDict()

    def resolve(self, ruleset):
        """ Resolve every statement in source order.

        :param ruleset: RuleSet.
        :returns: CompiledRuleSet.
        """
        rules = []
        for statement in ruleset.statements:
            if isinstance(statement, Assign):
                self._bindings[statement.name] = self._value(statement.expr)
                continue
            plan = self._value(statement.expr)
            if plan.type != BOOLEAN_T:
                raise TypeMismatch(BOOLEAN_T, plan.type, _position(statement.expr))
            rule_id = '{}{}'.format(RULE_PREFIX, len(rules) + 1)
            rules.append(CompiledRule(rule_id, plan, (statement.position, statement.end),
                                      format_expression(statement.expr)))
            _LOGGER.debug("Resolved %s: %s", rule_id, plan.label)
        return CompiledRuleSet(rules, self._bindings, self._graph)

    def _value(self, node):
        """ Resolve a node that must denote a value. """
        resolved = self._resolve(node)
        if isinstance(resolved, _ComponentRef):
            component = self._graph.component(resolved.name)
            if len(component.outputs) != 1:
                raise AmbiguousOutput(resolved.name, resolved.position)
            port = next(iter(component.outputs))
            return self._tap(resolved.name, port, node)
        return resolved

    def _resolve(self, node):
        if isinstance(node, Ident):
            return self._identifier(node)
        if isinstance(node, Number):
            dimension = PIXEL if node.unit == PIXEL_UNIT else None
            value = Fraction(node.value)
            return PlanNode('{}:{}:{}'.format(CONSTANT, value, dimension or ''), CONSTANT,
                            scalar(dimension), format_expression(node), value=value)
        if isinstance(node, Member):
            target = self._resolve(node.target)
            if isinstance(target, _ComponentRef):
                return self._port(target, node)
            return self._builtin(node.name, (target,), node)
        if isinstance(node, Call):
            args = tuple(self._value(arg) for arg in node.args)
            if node.target is not None:
                args = (self._value(node.target),) + args
            return self._builtin(node.name, args, node)
        if isinstance(node, BinOp):
            return self._operator(node)
        raise TypeError('cannot resolve {!r}'.format(node))

    def _identifier(self, node):
        if node.name in self._bindings:
            return self._bindings[node.name]
        if self._graph.has_component(node.name):
            return _ComponentRef(node.name, node.position)
        if self._graph.has_region(node.name):
            return PlanNode('{}:{}'.format(REGION, node.name), REGION, REGION_T,
                            node.name, value=node.name)
        raise UnknownIdentifier(node.name, node.position)

    def _port(self, ref, node):
        """ `Component.output` or `Component.<port>`. """
        outputs = self._graph.component(ref.name).outputs
        if node.name == OUTPUT and len(outputs) > 1:
            raise AmbiguousOutput(ref.name, node.position)
        if node.name == OUTPUT and outputs:
            return self._tap(ref.name, next(iter(outputs)), node)
        if node.name in outputs:
            return self._tap(ref.name, node.name, node)
        if node.name in BUILTINS:
            return self._builtin(node.name, (self._value(node.target),), node)
        raise UnknownIdentifier('{}.{}'.format(ref.name, node.name), node.position)

    def _tap(self, component, port, node):
        port_type = PORT_TYPES[self._graph.output_type(component, port)]
        return PlanNode('{}:{}.{}'.format(TAP, component, port), TAP, port_type,
                        format_expression(node), value=(component, port))

    def _builtin(self, name, args, node):
        if name not in BUILTINS:
            raise UnknownIdentifier(name, node.position)
        accepted, result = BUILTINS[name]
        if len(args) != len(accepted):
            raise TypeMismatch('{} argument(s) for {}'.format(len(accepted), name),
                               '{} argument(s)'.format(len(args)), node.position)
        for arg, types in zip(args, accepted):
            if arg.type not in types:
                raise TypeMismatch(' or '.join(str(t) for t in types), arg.type,
                                   node.position)
        key = '{}({})'.format(name, ','.join(arg.key for arg in args))
        return PlanNode(key, name, result, format_expression(node), args)

    def _operator(self, node):
        lhs = self._value(node.lhs)
        rhs = self._value(node.rhs)
        for operand in (lhs, rhs):
            if not operand.type.is_scalar:
                raise TypeMismatch(scalar(), operand.type, node.position)
        first, second = lhs.type.dimension, rhs.type.dimension
        if node.op in COMPARISONS or node.op in ('+', '-'):
            if not unifiable(first, second):
                raise TypeMismatch(scalar(first), rhs.type, node.position)
            result = BOOLEAN_T if node.op in COMPARISONS else scalar(unify(first, second))
        elif node.op == '*':
            if first is not None and second is not None:
                raise TypeMismatch(scalar(), rhs.type, node.position)
            result = scalar(first or second)
        elif second is None:
            result = scalar(first)
        elif unifiable(first, second):
            result = scalar(RATIO)
        else:
            raise TypeMismatch(scalar(first), rhs.type, node.position)
        key = '{}({},{})'.format(node.op, lhs.key, rhs.key)
        return PlanNode(key, node.op, result, format_expression(node), (lhs, rhs))


def _position(node):
    """ Position of an expression, falling back to its left operand. """
    while node.position is None and isinstance(node, BinOp):
        node = node.lhs
    return node.position


def resolve(ruleset, graph):
    """ Resolve a rule set against a pipeline graph.

    :param ruleset: RuleSet from `parse`.
    :param graph: Validated PipelineGraph.
    :returns: CompiledRuleSet.
    """
    compiled = Resolver(graph).resolve(ruleset)
    _LOGGER.info("Compiled %d rules against %s", len(compiled), graph)
    return compiled


def compile_rules(source, graph):
    """ Tokenize, parse and resolve rule text.

    :param source: Rule text.
    :param graph: Validated PipelineGraph.
    :returns: CompiledRuleSet.
    """
    return resolve(parse_source(source), graph)


def load_rules(path, graph):
    """ Compile a `.rules` file.

    :param path: Rule file path, UTF-8.
    :param graph: Validated PipelineGraph.
    :returns: CompiledRuleSet.
    """
    with open(path, 'r', encoding='utf-8') as handle:
        return compile_rules(handle.read(), graph)
