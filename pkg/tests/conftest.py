import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(autouse=True)
def _no_fault(monkeypatch):
    # tests that want the fault hook set it themselves
    monkeypatch.delenv("BKCTL_INJECT_FAULT", raising=False)
    monkeypatch.delenv("BKCTL_BUDGET", raising=False)
    yield
    os.environ.pop("BKCTL_INJECT_FAULT", None)


# acceptance criteria report here; the summary hook prints one line each
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if passed else 'FAIL'}  {detail}")
