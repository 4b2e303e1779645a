from __future__ import annotations

import os
import sys
import tempfile
from pathlib import Path

import pytest

# keep the bump-transform table out of the user's cache directory during tests
os.environ.setdefault("SPECTRA_KERNEL_CACHE", str(Path(tempfile.gettempdir()) / "spectrakit-test-kc.npz"))
sys.path.insert(0, str(Path(__file__).parent))

from spectrakit.spectra import FrequencyGrid  # noqa: E402


@pytest.fixture(scope="session")
def grid5() -> FrequencyGrid:
    return FrequencyGrid(-5.0, 5.0, 0.05)


@pytest.fixture(scope="session")
def grid3() -> FrequencyGrid:
    return FrequencyGrid(-3.0, 3.0, 0.05)


# --- acceptance summary -------------------------------------------------------
# tests marked ``@pytest.mark.criterion(n, "title")`` are collected here and a
# one-line PASS/FAIL verdict per criterion is printed after the run

_CRITERIA: dict = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or (rep.when != "call" and rep.passed):
        return
    n, title = marker.args
    ok, _ = _CRITERIA.get(n, (True, title))
    _CRITERIA[n] = (ok and rep.passed, title)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, title = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {title}")
