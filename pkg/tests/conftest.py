import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from thermaldj import SpinSystem, parse_function

from reference import GLYCINE_J


@pytest.fixture(scope="session")
def glycine():
    return SpinSystem.from_couplings(
        4,
        GLYCINE_J,
        offsets=[0.0, -12231.0, 0.0, 0.0],
        channels=["C", "C", "F", "N"],
    )


@pytest.fixture(scope="session")
def f_balanced():
    return parse_function("x2*x3 ^ x4", 3)


@pytest.fixture(scope="session")
def f_zero():
    return parse_function("0", 3)


@pytest.fixture(scope="session")
def f_one():
    return parse_function("1", 3)
