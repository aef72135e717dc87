"""Shared fixtures plus the acceptance-suite summary.

The acceptance tests in test_acceptance.py each carry a CRITERION marker
comment mapping them to a numbered criterion; after the run, one PASS/FAIL
line per criterion is printed so the gate can be read at a glance.
"""

from __future__ import annotations

import numpy as np
import pytest

from tidalbelt.respsignal import RespiratorySignal
from tidalbelt.synthgen import BreathProfile, generate_signal

_acceptance_results: dict[str, bool] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid:
        return
    if report.when != "call":
        return
    name = report.nodeid.split("::")[-1]
    _acceptance_results[name] = report.passed


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    try:
        from test_acceptance import CRITERIA
    except ImportError:
        CRITERIA = {}
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance_results):
        ok = _acceptance_results[name]
        desc = CRITERIA.get(name, name)
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"{status}  {desc}")


@pytest.fixture
def cosine_signal():
    """4-second raised-cosine breaths at 25 Hz, starting mid-exhale.

    Troughs at t = 2, 6, ..., 58 s; 14 complete trough-to-trough cycles.
    """
    fs = 25.0
    t = np.arange(0, 60, 1 / fs)
    x = 1.2 * (0.5 + 0.5 * np.cos(2 * np.pi * t / 4.0))
    return RespiratorySignal(x, fs, "cos")


@pytest.fixture
def clean_profile():
    return BreathProfile(t_i_s=1.4, t_tot_s=3.5, ra_n=1.2, jitter=0.04, seed=11)


@pytest.fixture
def clean_signal(clean_profile):
    return generate_signal(clean_profile, 60.0, 25.0)
