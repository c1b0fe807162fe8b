""" Safety function coverage report.

States which safety functions of a field robot have monitoring
rules, and the performance level each function requires. The report
records that rules are present; it does not claim compliance.
"""

import logging
from collections import namedtuple

_LOGGER = logging.getLogger(__name__)

# Coverage statuses.
COVERED = 'COVERED'
UNCOVERED = 'UNCOVERED'
NOT_APPLICABLE = 'N-A'

NA_LEVEL = 'N/A'
LEVELS = ('a', 'b', 'c', 'd', 'e', NA_LEVEL)

SafetyFunction = namedtuple('SafetyFunction', 'name level note')
ReportRow = namedtuple('ReportRow', 'function level status rules note')
CoverageReport = namedtuple('CoverageReport', 'rows unmapped')

# Required performance levels for a field robot.
SAFETY_FUNCTIONS = (
    SafetyFunction('Emergency Stop', 'd', None),
    SafetyFunction('Protective Stop', 'e', None),
    SafetyFunction('Limits to workspace', 'e', 'incl. forbidden area avoidance'),
    SafetyFunction('safety-related speed control', 'e', None),
    SafetyFunction('safety-related force control', NA_LEVEL, 'incl. overload protection'),
    SafetyFunction('Hazardous collision avoidance', 'e', None),
    SafetyFunction('Stability Control', 'd', None),
)


class ReportError(ValueError):
    """ Base class for report errors. """


class UnknownFunction(ReportError):
    """ Mapping names a function missing from the table. """


class UnknownRule(ReportError):
    """ Mapping names a rule missing from the rule set. """


def check_mapping(rules, mapping, table=SAFETY_FUNCTIONS):
    """ Validate a rule mapping.

    :param rules: CompiledRuleSet.
    :param mapping: Mapping rule id -> set of function names.
    :param table: Safety function rows.
    """
    names = set(function.name for function in table)
    known = set(rules.rule_ids)
    for rule_id in sorted(mapping):
        if rule_id not in known:
            raise UnknownRule('{} is not in the rule set ({})'.format(
                rule_id, ', '.join(rules.rule_ids) or 'no rules'))
        for name in sorted(mapping[rule_id]):
            if name not in names:
                raise UnknownFunction('{} maps to unknown safety function {!r}'.format(
                    rule_id, name))


def coverage_report(rules, mapping, table=SAFETY_FUNCTIONS):
    """ Build the coverage report.

    :param rules: CompiledRuleSet.
    :param mapping: Mapping rule id -> set of function names.
    :param table: Safety function rows.
    :returns: CoverageReport, one row per table entry.
    """
    check_mapping(rules, mapping, table)
    rows = []
    for function in table:
        monitoring = tuple(rule_id for rule_id in rules.rule_ids
                           if function.name in mapping.get(rule_id, ()))
        if function.level == NA_LEVEL:
            status = NOT_APPLICABLE
        elif monitoring:
            status = COVERED
        else:
            status = UNCOVERED
        rows.append(ReportRow(function.name, function.level, status, monitoring, function.note))
    unmapped = tuple(rule_id for rule_id in rules.rule_ids if not mapping.get(rule_id))
    _LOGGER.info("Coverage: %d of %d functions monitored, %d unmapped rules",
                 sum(1 for row in rows if row.status == COVERED), len(rows), len(unmapped))
    return CoverageReport(tuple(rows), unmapped)


def render_text(report):
    """ Plain text rendering.

    :param report: CoverageReport.
    :returns: Text.
    """
    lines = ['Safety function coverage', '']
    for row in report.rows:
        name = row.function if row.note is None else '{} ({})'.format(row.function, row.note)
        if row.status == COVERED:
            detail = 'monitored by {}'.format(', '.join(row.rules))
        elif row.status == NOT_APPLICABLE:
            detail = 'not applicable'
        else:
            detail = 'no monitoring rule'
        lines.append('{:<62} PL {:<3} {:<9} {}'.format(name, row.level, row.status, detail))
    lines.append('')
    if report.unmapped:
        lines.append('Unmapped rules: {}'.format(', '.join(report.unmapped)))
    else:
        lines.append('Unmapped rules: none')
    lines.append('Rules are reported as present, not as certified compliance.')
    return '\n'.join(lines) + '\n'


def render_records(report):
    """ Tab separated records, one per line.

    `FUNCTION  name  level  status  rules` per row, then
    `UNMAPPED  rule` per unmapped rule. Rules are comma separated,
    `-` when none.

    :param report: CoverageReport.
    :returns: Text.
    """
    lines = []
    for row in report.rows:
        lines.append('\t'.join(('FUNCTION', row.function, row.level, row.status,
                                ','.join(row.rules) or '-')))
    for rule_id in report.unmapped:
        lines.append('\t'.join(('UNMAPPED', rule_id)))
    return '\n'.join(lines) + '\n'
