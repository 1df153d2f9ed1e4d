import sys


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    verdicts = getattr(module, "VERDICTS", None)
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for line in sorted(verdicts, key=lambda v: int(v.split()[2])):
            terminalreporter.write_line(line)
