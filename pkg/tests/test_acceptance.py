"""One test per acceptance criterion, at the stated tolerances.

Every check prints a ``[PASS]``/``[FAIL]`` line; the lines are repeated in
the terminal summary under "acceptance criteria".
"""

import pytest

from fvtree.acceptance import CRITERIA, DEFAULT_SEED, run_criterion

from conftest import ACCEPTANCE_LINES


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k):
    results, seconds = run_criterion(k, DEFAULT_SEED)
    for r in results:
        line = r.line() + f"  ({seconds:.1f}s)"
        print(line)
        ACCEPTANCE_LINES.append(line)
    failed = [r.name for r in results if not r.passed]
    assert not failed, f"criterion {k}: failing checks {failed}"
