"""Shared test plumbing: collect acceptance verdict lines and print them
in the terminal summary, where pytest's output capture cannot hide them."""

verdict_lines = []


def record_verdict(line: str) -> None:
    verdict_lines.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if verdict_lines:
        terminalreporter.section("acceptance criteria")
        for line in verdict_lines:
            terminalreporter.write_line(line)
