import numpy as np
import pytest

from inkscan.binarize import SpectrumSet


def make_spectrum_set(vectors) -> SpectrumSet:
    """Wrap raw (N, B) data in a SpectrumSet with synthetic coordinates."""
    vectors = np.asarray(vectors, dtype=np.float64)
    coords = np.column_stack([np.arange(len(vectors)), np.zeros(len(vectors))])
    return SpectrumSet(vectors, coords)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            if getattr(report, "when", "call") != "call":
                continue
            if "test_acceptance" not in getattr(report, "nodeid", ""):
                continue
            name = report.nodeid.split("::")[-1]
            lines.append((name, "PASS" if outcome == "passed" else "FAIL"))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, verdict in sorted(lines):
            terminalreporter.write_line(f"{name}: {verdict}")
