import pytest

from breathseg.signal_io import AudioBuffer
from breathseg.synth import SynthSpec, synth_breath


@pytest.fixture(scope="session")
def synth_file():
    """A clean three-breath recording and its exact labels."""
    return synth_breath(SynthSpec(n_breaths=3, jitter=0.1, seed=5))


@pytest.fixture
def tone():
    import numpy as np

    fs = 16000
    t = np.arange(20 * fs) / fs
    return AudioBuffer(0.3 * np.sin(2 * np.pi * 440.0 * t), fs)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if "test_acceptance.py" in getattr(rep, "nodeid", "") and rep.when == "call":
                lines.append((rep.nodeid.split("::")[-1], outcome.upper()))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, outcome in sorted(lines):
            terminalreporter.write_line(f"{'PASS' if outcome == 'PASSED' else 'FAIL'}  {name}")
