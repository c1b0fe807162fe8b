""" Append-only audit log.

One record per line, fields separated by a single tab:

    VERDICT   frame_id  rule_id  outcome  operands  timestamp  error  message
    DECISION  frame_id  state    tripped_by  timestamp

`operands` is a JSON list of [label, value] pairs with values as
exact rationals (`1/256`). `tripped_by` is `R1@0,R3@2` or `-`.
Timestamps are UTC ISO-8601, or `-` when disabled. `error` is the
error name of an ERROR verdict, `-` otherwise.
"""

import json
import logging
import threading
from collections import namedtuple

from visionsafety import OUTCOMES, PipelineDecision, Verdict
from visionsafety.util import (
    NO_VALUE, format_tripped, format_value, parse_tripped, parse_value, utc_timestamp)

_LOGGER = logging.getLogger(__name__)

VERDICT = 'VERDICT'
DECISION = 'DECISION'
SEPARATOR = '\t'

AuditEntry = namedtuple('AuditEntry', 'kind frame_id record timestamp')


class AuditFormatError(ValueError):
    """ Line is not an audit record. """


def _clean(text):
    """ Keep free text on one field. """
    return ' '.join(str(text).replace(SEPARATOR, ' ').splitlines()) or NO_VALUE


def format_verdict(verdict, timestamp=NO_VALUE):
    """ Audit line for a verdict, without newline. """
    operands = json.dumps([[label, format_value(value)] for label, value in verdict.evaluated])
    return SEPARATOR.join((VERDICT, str(verdict.frame_id), verdict.rule_id, verdict.outcome,
                           operands, timestamp, verdict.error or NO_VALUE,
                           _clean(verdict.message)))


def format_decision(frame_id, decision, timestamp=NO_VALUE):
    """ Audit line for a frame decision, without newline. """
    return SEPARATOR.join((DECISION, str(frame_id), decision.state,
                           format_tripped(decision.tripped_by), timestamp))


def parse_line(line):
    """ Parse one audit line.

    :param line: Text of one record.
    :returns: AuditEntry.
    """
    fields = line.rstrip('\n').split(SEPARATOR)
    try:
        if fields[0] == VERDICT and len(fields) == 8:
            _, frame_id, rule_id, outcome, operands, timestamp, error, message = fields
            if outcome not in OUTCOMES:
                raise ValueError('unknown outcome {}'.format(outcome))
            evaluated = tuple((label, parse_value(value))
                              for label, value in json.loads(operands))
            record = Verdict(rule_id, int(frame_id), outcome, evaluated,
                             '' if message == NO_VALUE else message,
                             None if error == NO_VALUE else error)
        elif fields[0] == DECISION and len(fields) == 5:
            _, frame_id, state, tripped, timestamp = fields
            record = PipelineDecision(state, parse_tripped(tripped))
        else:
            raise ValueError('unknown record layout')
    except ValueError as err:
        raise AuditFormatError('bad audit line {!r}: {}'.format(line, err))
    return AuditEntry(fields[0], int(frame_id), record,
                      None if timestamp == NO_VALUE else timestamp)


class AuditLog(object):
    """ Audit log file, opened for append on every frame. """

    def __init__(self, path, timestamps=True):
        """ Initialize audit log.

        :param path: Log file path.
        :param timestamps: Write UTC timestamps, or `-`.
        """
        self._path = path
        self._timestamps = timestamps
        self._lock = threading.Lock()

    @property
    def path(self):
        """ Log file path. """
        return self._path

    def append(self, frame_id, verdicts, decision):
        """ Append one frame: its verdicts in rule-id order, then its decision.

        :param frame_id: Frame number.
        :param verdicts: Verdicts of the frame.
        :param decision: Decision after the frame.
        """
        timestamp = utc_timestamp() if self._timestamps else NO_VALUE
        lines = [format_verdict(verdict, timestamp) for verdict in verdicts]
        lines.append(format_decision(frame_id, decision, timestamp))
        with self._lock:
            with open(self._path, 'a', encoding='utf-8') as handle:
                handle.write('\n'.join(lines) + '\n')
        _LOGGER.debug("Audited frame %d in %s", frame_id, self._path)


def audit_append(log, frame_id, verdicts, decision):
    """ Append one frame to an audit log.

    :param log: AuditLog, or a path.
    :param frame_id: Frame number.
    :param verdicts: Verdicts of the frame.
    :param decision: Decision after the frame.
    """
    if not isinstance(log, AuditLog):
        log = AuditLog(log)
    log.append(frame_id, verdicts, decision)


def read_audit_log(path):
    """ Replay an audit log.

    :param path: Log file path.
    :returns: List of AuditEntry in file order.
    """
    with open(path, 'r', encoding='utf-8') as handle:
        return [parse_line(line) for line in handle if line.strip()]
