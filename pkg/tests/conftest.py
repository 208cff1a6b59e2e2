"""Shared pytest configuration for the affext test suite."""

import sys

from hypothesis import HealthCheck, settings

settings.register_profile(
    "affext",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("affext")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Replay the one-line-per-criterion acceptance verdicts."""
    lines: list[str] = []
    for mod in list(sys.modules.values()):
        if getattr(mod, "__name__", "").endswith("test_acceptance"):
            lines.extend(getattr(mod, "_ANNOUNCEMENTS", []))
    for rep in terminalreporter.stats.get("skipped", []):
        if "test_acceptance" in rep.nodeid:
            reason = rep.longrepr[2] if isinstance(rep.longrepr, tuple) else rep.longrepr
            lines.append(f"{rep.nodeid.split('::')[-1]}: SKIP - {reason}")
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
