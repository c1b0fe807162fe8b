""" Rule syntax tree and pretty printer.

Positions are carried for diagnostics but take no part in equality,
so a tree re-parsed from its printed form compares equal.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Tuple

from visionsafety.rules import Position

COMPARISONS = ('>', '<', '>=', '<=', '==')
PRECEDENCE = {
    '>': 1, '<': 1, '>=': 1, '<=': 1, '==': 1,
    '+': 2, '-': 2,
    '*': 3, '/': 3,
}
_POSTFIX = 4


@dataclass(frozen=True)
class Ident:
    name: str
    position: Optional[Position] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Member:
    target: object
    name: str
    position: Optional[Position] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    """ Builtin call, `name(args)` or `target.name(args)`. """
    target: object
    name: str
    args: Tuple[object, ...] = ()
    position: Optional[Position] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    lhs: object
    rhs: object
    position: Optional[Position] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Number:
    """ Exact rational literal, optionally in pixel units. """
    value: Fraction
    unit: Optional[str] = None
    position: Optional[Position] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Assign:
    name: str
    expr: object
    position: Optional[Position] = field(default=None, compare=False, repr=False)
    end: Optional[Position] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Assert:
    expr: object
    position: Optional[Position] = field(default=None, compare=False, repr=False)
    end: Optional[Position] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class RuleSet:
    statements: Tuple[object, ...] = ()

    @property
    def assignments(self):
        """ Assign statements in source order. """
        return tuple(s for s in self.statements if isinstance(s, Assign))

    @property
    def assertions(self):
        """ Assert statements in source order. """
        return tuple(s for s in self.statements if isinstance(s, Assert))


def format_number(value):
    """ Decimal text for a terminating rational.

    :param value: Fraction.
    :returns: Text such as `900` or `0.1`.
    """
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    digits = 0
    scaled = value
    while scaled.denominator != 1:
        if digits > 64:
            raise ValueError('{} has no finite decimal form'.format(value))
        scaled *= 10
        digits += 1
    text = str(abs(scaled.numerator)).rjust(digits + 1, '0')
    sign = '-' if value < 0 else ''
    return '{}{}.{}'.format(sign, text[:-digits], text[-digits:])


def _precedence(node):
    if isinstance(node, BinOp):
        return PRECEDENCE[node.op]
    return _POSTFIX


def _receiver(node):
    text = format_expression(node)
    if isinstance(node, (Ident, Member, Call)):
        return text
    return '({})'.format(text)


def format_expression(node):
    """ Print an expression with the fewest parentheses that re-parse to it.

    :param node: Expression node.
    :returns: Source text.
    """
    if isinstance(node, Ident):
        return node.name
    if isinstance(node, Number):
        return format_number(node.value) + (node.unit or '')
    if isinstance(node, Member):
        return '{}.{}'.format(_receiver(node.target), node.name)
    if isinstance(node, Call):
        args = ', '.join(format_expression(arg) for arg in node.args)
        if node.target is None:
            return '{}({})'.format(node.name, args)
        return '{}.{}({})'.format(_receiver(node.target), node.name, args)
    if isinstance(node, BinOp):
        level = PRECEDENCE[node.op]
        lhs = format_expression(node.lhs)
        rhs = format_expression(node.rhs)
        # operators are left-associative
        if _precedence(node.lhs) < level:
            lhs = '({})'.format(lhs)
        if _precedence(node.rhs) <= level:
            rhs = '({})'.format(rhs)
        return '{} {} {}'.format(lhs, node.op, rhs)
    raise TypeError('not an expression: {!r}'.format(node))


def pretty_print(ruleset):
    """ Print a rule set, one statement per line.

    :param ruleset: RuleSet.
    :returns: Source text.
    """
    lines = []
    for statement in ruleset.statements:
        if isinstance(statement, Assign):
            lines.append('{} = {};'.format(statement.name, format_expression(statement.expr)))
        else:
            lines.append('{};'.format(format_expression(statement.expr)))
    return '\n'.join(lines) + ('\n' if lines else '')
