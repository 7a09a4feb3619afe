import pathlib
import sys

import numpy as np
import pytest

from condshap.simdata import reference_setup, sample_dataset

sys.path.insert(0, str(pathlib.Path(__file__).parent))


@pytest.fixture(scope="session")
def reference():
    return reference_setup()


@pytest.fixture(scope="session")
def reference_train(reference):
    params, coef = reference
    return sample_dataset(params, coef, 1000, 11)


@pytest.fixture(scope="session")
def reference_test(reference):
    params, coef = reference
    return sample_dataset(params, coef, 30, 11, role="test")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "GATE_LINES", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
