import hypothesis
import numpy as np
import pytest

np.seterr(all="warn")

hypothesis.settings.register_profile(
    "default", deadline=None, max_examples=50, derandomize=True
)
hypothesis.settings.load_profile("default")


@pytest.fixture
def toy_dims():
    from vtmm.net import NetDims

    return NetDims(video_dim=6, text_dim=5, proj_dim=4, head_dims=(4, 3, 1))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion."""
    results = {}
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            if "test_acceptance" in report.nodeid and report.when == "call":
                results[report.nodeid.split("::")[-1]] = outcome
    if results:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, outcome in sorted(results.items()):
            terminalreporter.write_line(
                f"[ACCEPTANCE] {name}: {'PASS' if outcome == 'passed' else 'FAIL'}"
            )
