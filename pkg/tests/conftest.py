import numpy as np
import pytest

from entgauss.distributions import DiscreteDistribution

_CRITERIA = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion reported in the summary")
    config.addinivalue_line("markers", "slow: takes more than a few seconds")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = getattr(item, "criterion_detail", "")
        _CRITERIA.append((marker.args[0], report.outcome, detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, detail in _CRITERIA:
        status = "PASS" if outcome == "passed" else "FAIL"
        line = f"{status}  {name}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)


@pytest.fixture
def record(request):
    """Attach a short measured-value note to the acceptance summary line."""

    def _record(text):
        request.node.criterion_detail = text

    return _record


@pytest.fixture
def bpsk():
    return DiscreteDistribution([-1.0, 1.0], [0.5, 0.5])


def random_dist(rng, n_min=2, n_max=8, spread=2.0):
    n = int(rng.integers(n_min, n_max + 1))
    atoms = np.sort(rng.uniform(-spread, spread, n))
    while np.any(np.diff(atoms) < 0.05):
        atoms = np.sort(rng.uniform(-spread, spread, n))
    return DiscreteDistribution.from_weights(atoms, rng.random(n) + 0.05)
