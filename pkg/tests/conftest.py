"""Prints one pass/fail line per acceptance criterion after the run,
with the criterion's stated tolerance taken from the test docstring."""

import pytest

_ACCEPTANCE = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when != "call" or not item.name.startswith("test_criterion_"):
        return
    doc = (item.function.__doc__ or "").strip().splitlines()
    head = doc[0] if doc else item.name
    detail = next((v for k, v in rep.user_properties if k == "detail"), "")
    _ACCEPTANCE[item.name] = (rep.outcome, head, detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        outcome, head, detail = _ACCEPTANCE[name]
        word = "PASS" if outcome == "passed" else "FAIL"
        line = f"{word}  {head}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
