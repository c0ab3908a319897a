import pytest

from gronwall_lab.oscillator import OscillatorConfig, build_oscillator
from gronwall_lab.reparam import blowup_time


@pytest.fixture(scope="session")
def Y():
    return build_oscillator(OscillatorConfig(M=1.0, N_max=8))


@pytest.fixture(scope="session")
def reparam_Y(Y):
    return blowup_time(Y)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in VERDICTS.items():
        tag = "PASS" if ok else "FAIL"
        if not ok and "gamma" in name:
            tag += " (known, ledgered)"
        terminalreporter.write_line(f"{tag}  {name}: {detail}")
