from pathlib import Path

import pytest
from hypothesis import strategies as st

from nightsched.io import load_instance
from nightsched.model import Instance, Observation

DATA = Path(__file__).parent / "data"


def counterexample_instance(pi=(0.0, 0.0, 1.0, 0.0)) -> Instance:
    return load_instance(DATA / "counterexample.json").with_probabilities(pi)


@pytest.fixture
def counterexample() -> Instance:
    return counterexample_instance()


@st.composite
def observations(draw, max_size=6, len_night=4, max_gain=5):
    n = draw(st.integers(0, max_size))
    out = []
    for j in range(n):
        release = draw(st.integers(0, len_night - 1))
        deadline = draw(st.integers(release + 1, len_night))
        processing = draw(st.integers(1, deadline - release))
        gain = draw(st.integers(1, max_gain))
        out.append(Observation(f"o{j}", release, deadline, processing, gain))
    return tuple(out)


@st.composite
def probability_vectors(draw, nights):
    weights = draw(st.lists(st.integers(0, 4), min_size=nights + 1, max_size=nights + 1))
    if sum(weights) == 0:
        weights[-1] = 1
    total = sum(weights)
    pi = [w / total for w in weights]
    pi[0] = 1.0 - sum(pi[1:])
    return tuple(pi)


@st.composite
def instances(draw, max_nights=3, max_obs=6, len_night=4):
    nights = draw(st.integers(1, max_nights))
    obs = draw(observations(max_size=max_obs, len_night=len_night))
    return Instance(nights, obs, draw(probability_vectors(nights)))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")
    config._acceptance = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    failed_early = report.when == "setup" and not report.passed
    if report.when == "call" or failed_early:
        number, text = marker.args
        status = "PASS" if report.passed else "FAIL"
        item.config._acceptance.append((number, f"criterion {number}: {status} - {text}"))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
