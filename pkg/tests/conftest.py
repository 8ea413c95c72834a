import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).resolve().parent))

settings.register_profile("aakit", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("aakit")

BACKENDS = ["numba", "numpy"]


@pytest.fixture
def gen():
    return np.random.default_rng(12345)


@pytest.fixture(params=BACKENDS)
def backend(request):
    from aakit import kernels

    return kernels.backend(request.param)
