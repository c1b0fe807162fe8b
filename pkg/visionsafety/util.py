""" Utility functions. """

from datetime import datetime, timezone
from fractions import Fraction

NO_VALUE = '-'


def format_value(value):
    """ Text for an evaluated value.

    Rationals print exactly, as `n` or `n/d`.

    :param value: Fraction, bool, int or other value.
    :returns: Text.
    """
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, (int, Fraction)):
        return str(Fraction(value))
    return str(value)


def parse_value(text):
    """ Inverse of `format_value` for scalars and booleans.

    :param text: Text from `format_value`.
    :returns: Fraction or bool.
    """
    if text in ('true', 'false'):
        return text == 'true'
    return Fraction(text)


def format_tripped(tripped_by):
    """ Text for (frame_id, rule_id) pairs, e.g. `R1@0,R3@2`.

    :param tripped_by: Sequence of (frame_id, rule_id).
    :returns: Text, `-` when empty.
    """
    if not tripped_by:
        return NO_VALUE
    return ','.join('{}@{}'.format(rule_id, frame_id) for frame_id, rule_id in tripped_by)


def parse_tripped(text):
    """ Inverse of `format_tripped`.

    :param text: Text from `format_tripped`.
    :returns: Tuple of (frame_id, rule_id).
    """
    if text == NO_VALUE:
        return ()
    pairs = []
    for item in text.split(','):
        rule_id, frame_id = item.rsplit('@', 1)
        pairs.append((int(frame_id), rule_id))
    return tuple(pairs)


def utc_timestamp():
    """ Current UTC time, ISO-8601. """
    return datetime.now(timezone.utc).isoformat(timespec='milliseconds')
