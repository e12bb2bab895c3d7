import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qldp.linalg import DensityMatrix, random_density

settings.register_profile("qldp", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("qldp")


@pytest.fixture
def diag_pair():
    """The running example: diag(0.9, 0.1) against diag(0.1, 0.9)."""
    return DensityMatrix.diag([0.9, 0.1]), DensityMatrix.diag([0.1, 0.9])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def seeded_pair(seed, dim, full_rank=True):
    rng = np.random.default_rng(seed)
    r1 = None if full_rank else int(rng.integers(1, dim + 1))
    r2 = None if full_rank else int(rng.integers(1, dim + 1))
    return random_density(dim, r1, rng), random_density(dim, r2, rng)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        terminalreporter.write_line(results[k])
