import sys


def pytest_terminal_summary(terminalreporter):
    # one line per acceptance criterion, whatever the verbosity
    mod = next((m for k, m in sys.modules.items() if k.endswith("test_acceptance")), None)
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
