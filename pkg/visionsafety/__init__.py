""" Vision safety monitor.

Declarative safety rules for a stereo camera pipeline, evaluated
per frame, gating downstream processing with a latched protective
stop.
"""

from collections import namedtuple


# Verdict outcomes.
PASS = 'PASS'
FAIL = 'FAIL'
ERROR = 'ERROR'
OUTCOMES = (PASS, FAIL, ERROR)

# Gate states.
CONTINUE = 'CONTINUE'
PROTECTIVE_STOP = 'PROTECTIVE_STOP'

# Exit statuses.
EXIT_CONTINUE = 0
EXIT_ERROR = 1
EXIT_STOPPED = 2


# Result of one rule on one frame. `evaluated` holds (label, value)
# pairs, the two comparison operands at least.
Verdict = namedtuple('Verdict', 'rule_id frame_id outcome evaluated message error')
Verdict.__new__.__defaults__ = ((), '', None)

# Gate state plus every (frame_id, rule_id) that tripped it.
PipelineDecision = namedtuple('PipelineDecision', 'state tripped_by')

INITIAL_DECISION = PipelineDecision(CONTINUE, ())
