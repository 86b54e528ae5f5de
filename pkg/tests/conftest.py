import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dpsynth import Dataset, QueryFamily, TestFunction

# the name matches pytest's class pattern; it is not a test container
TestFunction.__test__ = False


@pytest.fixture
def boolean_schema():
    return (2, 2, 2)


@pytest.fixture
def small_dataset(boolean_schema):
    rows = np.array(
        [[0, 0, 0], [1, 0, 1], [1, 1, 0], [0, 1, 1], [1, 1, 1]], dtype=np.int64
    )
    return Dataset(boolean_schema, rows)


@pytest.fixture
def small_family():
    return QueryFamily(
        [
            TestFunction.constant_one(),
            TestFunction.monotone((0,)),
            TestFunction.monotone((1, 2)),
        ]
    )
