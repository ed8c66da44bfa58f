import numpy as np
import pytest

from svinv import geomodel as gm
from svinv import wavesim as ws


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    # acceptance tests print their own PASS lines; mirror failures the same way
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and report.failed and "test_acceptance" in str(item.fspath):
        print(f"\nACCEPTANCE FAIL: {item.name}")


def first_break(trace: np.ndarray, frac: float = 0.05) -> int:
    """Index of the first sample reaching ``frac`` of the trace peak."""
    peak = np.max(np.abs(trace))
    if peak == 0:
        return -1
    return int(np.argmax(np.abs(trace) >= frac * peak))


@pytest.fixture(scope="session")
def homogeneous_model():
    grid = np.full((100, 100), 1500.0)
    return gm.VelocityModel(grid, "layered", 4, seed=0)


@pytest.fixture(scope="session")
def paper_cfg():
    return ws.SimConfig()


@pytest.fixture(scope="session")
def paper_geometry():
    return ws.default_geometry()


@pytest.fixture(scope="session")
def five_layer_model():
    return gm.build_layered_model(5, np.random.default_rng(20240501), seed=20240501)
