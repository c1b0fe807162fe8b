""" Safety rule language.

Grammar:

    ruleset   := statement*
    statement := (identifier "=" expr | expr) ";"
    expr      := sum (("<" | ">" | "<=" | ">=" | "==") sum)*
    sum       := product (("+" | "-") product)*
    product   := postfix (("*" | "/") postfix)*
    postfix   := primary ("." identifier ["(" args ")"])*
    primary   := number ["p"] | identifier ["(" args ")"] | "(" expr ")"
    args      := [expr ("," expr)*]

`#` starts a comment running to the end of the line.
"""

from collections import namedtuple


class Position(namedtuple('Position', 'line column offset')):
    """ Source position, 1-based line and column. """

    __slots__ = ()

    def __str__(self):
        return 'line {}, column {}'.format(self.line, self.column)


class RuleError(ValueError):
    """ Base class for rule errors, carrying a source position. """

    def __init__(self, message, position=None):
        """ Initialize error.

        :param message: Description.
        :param position: Position of the offending source text.
        """
        super(RuleError, self).__init__(message)
        self.message = message
        self.position = position

    @property
    def name(self):
        """ Error kind, e.g. `TypeMismatch`. """
        return type(self).__name__

    def __str__(self):
        if self.position is None:
            return self.message
        return '{}: {}'.format(self.position, self.message)


class LexError(RuleError):
    """ Character outside the language's alphabet. """


class ParseError(RuleError):
    """ Token sequence does not match the grammar. """

    def __init__(self, position, expected, found=None):
        """ Initialize error.

        :param position: Position of the unexpected token.
        :param expected: Iterable of acceptable token descriptions.
        :param found: Description of what was found.
        """
        self.expected = tuple(sorted(expected))
        self.found = found
        message = 'expected {}'.format(' or '.join(self.expected))
        if found is not None:
            message += ', found {}'.format(found)
        super(ParseError, self).__init__(message, position)


class DuplicateAssignment(ParseError):
    """ Name assigned twice in one rule set. """

    def __init__(self, name, position=None):
        RuleError.__init__(self, '{} is already assigned'.format(name), position)
        self.expected = ()
        self.found = name
        self.identifier = name


class UnknownIdentifier(RuleError):
    """ Name bound to no component, region, assignment or builtin. """

    def __init__(self, identifier, position=None):
        super(UnknownIdentifier, self).__init__(
            'unknown identifier {}'.format(identifier), position)
        self.identifier = identifier


class TypeMismatch(RuleError):
    """ Expression has the wrong semantic type. """

    def __init__(self, expected, found, position=None):
        super(TypeMismatch, self).__init__(
            'expected {}, found {}'.format(expected, found), position)
        self.expected = expected
        self.found = found


class AmbiguousOutput(RuleError):
    """ `.output` used on a component with several output ports. """

    def __init__(self, component, position=None):
        super(AmbiguousOutput, self).__init__(
            '{} has several output ports, name one'.format(component), position)
        self.component = component
