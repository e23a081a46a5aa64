import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    # scoreboard collected by the acceptance tests, if they ran
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "SCOREBOARD", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
