import math

import pytest

from kerrlind.model import TWO_PI, BathLabel, BathSpectrum, ModelParams
from kerrlind.sweep import reference_config

G3 = 6 * math.pi * 20e6
G4 = 8 * math.pi * 280e3
OMEGA_D = TWO_PI * 12e9


@pytest.fixture(scope="session")
def reference():
    return reference_config()


@pytest.fixture
def params():
    return ModelParams(g3=G3, g4=G4, omega_d=OMEGA_D)


@pytest.fixture
def loss_only():
    """Bath coupled only at omega_d/2, zero temperature."""
    return BathSpectrum.single(BathLabel.HALF, 5e4, 0.0)


_ACCEPTANCE: dict[str, list] = {}


def pytest_runtest_logreport(report):
    """Collect outcomes of ``test_criterion_NN_*`` tests, grouped by NN."""
    name = report.nodeid.split("::")[-1]
    if not name.startswith("test_criterion_"):
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        number = int(name.split("_")[2])
        measured = dict(report.user_properties).get("measured", "")
        _ACCEPTANCE.setdefault(number, []).append((name, report.outcome, measured))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        checks = _ACCEPTANCE[number]
        ok = all(outcome == "passed" for _, outcome, _ in checks)
        detail = "; ".join(m for _, _, m in checks if m)
        terminalreporter.write_line(
            f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}"
            f" ({sum(o == 'passed' for _, o, _ in checks)}/{len(checks)} checks) {detail}"
        )
