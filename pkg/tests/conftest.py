import os
from pathlib import Path

import numpy as np
import pytest

from sfcrime import synthetic

KAGGLE_TRAIN = os.environ.get("SFCRIME_TRAIN_CSV", str(Path(__file__).parent.parent / "data" / "train.csv"))

# criterion number -> (description, outcome), filled in by the acceptance module.
_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, text = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        prev = _CRITERIA.get(number, (text, "PASS"))[1]
        if prev == "FAIL" or (prev == "SKIP" and status == "PASS"):
            status = prev
        _CRITERIA[number] = (text, status)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        text, status = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:>2}: {status:<4} {text}")


@pytest.fixture(scope="session")
def kaggle_train():
    if not Path(KAGGLE_TRAIN).exists():
        pytest.skip("genuine Kaggle train.csv not available (set SFCRIME_TRAIN_CSV)")
    return KAGGLE_TRAIN


@pytest.fixture(scope="session")
def synthetic_files(tmp_path_factory):
    d = tmp_path_factory.mktemp("synthetic")
    train, test = d / "train.csv", d / "test.csv"
    synthetic.write_train(train, 3000, seed=3)
    synthetic.write_test(test, 400, seed=4)
    return train, test


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
