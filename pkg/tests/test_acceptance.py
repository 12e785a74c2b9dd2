"""One test per acceptance criterion, each at its stated tolerance and budget.

Each test logs a single ``[PASS]`` / ``[FAIL]`` line with the measured
quantities; the lines are listed together at the end of the pytest run.
"""

import pytest

from qcaqed.acceptance import CRITERIA, run_criterion


def _id(n):
    return f"criterion_{n:02d}_" + CRITERIA[n][0].replace(" ", "_")


@pytest.mark.parametrize("number", sorted(CRITERIA), ids=_id)
def test_criterion(number, acceptance_log):
    result = run_criterion(number)
    line = result.line()
    for note in result.notes:
        line += f" [{note}]"
    print(line)
    acceptance_log.append(line)
    assert result.passed, line
