"""Shared pytest hooks.

After a run that included the acceptance module, print one verdict line per
numbered criterion so the gate can be read without scanning the full log.
"""

_OUTCOME_LABELS = {
    "passed": "PASS",
    "failed": "FAIL",
    "xfailed": "FAIL (expected; see the test's reason string)",
    "xpassed": "UNEXPECTED PASS (strict xfail)",
    "error": "ERROR",
}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = {}
    for category, label in _OUTCOME_LABELS.items():
        for report in terminalreporter.stats.get(category, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py::test_criterion_" in nodeid:
                lines[nodeid.split("::")[-1]] = label
    if not lines:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name in sorted(lines):
        terminalreporter.write_line(f"{name}: {lines[name]}")
