import numpy as np
import pytest

from spreadlab.engine import SimConfig, run


@pytest.fixture(scope="session", autouse=True)
def warm_kernel():
    # pay the one-off JIT compilation before any timed test
    run(SimConfig(steps=50, warmup=10, seed=0))


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
