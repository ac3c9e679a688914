"""Suite-level wall clock budget: the whole run must stay under 5 minutes."""

import time

SUITE_BUDGET_S = 300.0
_T0 = time.monotonic()


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.monotonic() - _T0
    ok = elapsed <= SUITE_BUDGET_S
    print(
        f"\nsuite wall time {elapsed:.1f}s / budget {SUITE_BUDGET_S:.0f}s "
        f"{'PASS' if ok else 'FAIL'}"
    )
    if not ok and exitstatus == 0:
        session.exitstatus = 1
