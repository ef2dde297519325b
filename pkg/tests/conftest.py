import numpy as np
import pytest

from rabi_thermo import BathConfig, ModelParams, eigensystem, transition_table


@pytest.fixture(scope="session")
def resonant_eig():
    """Resonant model at g = 0.5 with the desk-scale cutoff."""
    return eigensystem(ModelParams(1.0, 1.0, 0.5, 60))


@pytest.fixture(scope="session")
def resonant_table(resonant_eig):
    return transition_table(resonant_eig)


@pytest.fixture(scope="session")
def small_eig():
    """Small cutoff for Liouvillian work (D = 42)."""
    return eigensystem(ModelParams(1.0, 1.0, 0.7, 20))


@pytest.fixture(scope="session")
def small_table(small_eig):
    return transition_table(small_eig)


@pytest.fixture
def ihb_equal():
    return BathConfig.ihb(4.0, 4.0, 1e-3, 1e-3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    n = dict(report.user_properties).get("criterion")
    if n is not None:
        _criteria.setdefault(n, []).append((report.nodeid.split("::")[-1], report.outcome))


def pytest_runtest_setup(item):
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        item.user_properties.append(("criterion", marker.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        results = _criteria[n]
        failed = [name for name, outcome in results if outcome != "passed"]
        status = "PASS" if not failed else "FAIL"
        line = f"criterion {n}: {status} ({len(results) - len(failed)}/{len(results)} checks)"
        if failed:
            line += " - failing: " + ", ".join(failed)
        terminalreporter.write_line(line)
