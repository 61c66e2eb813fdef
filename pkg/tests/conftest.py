import numpy as np
import pytest

import smoothsgd as sgd


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the trial kernel once so timed tests measure runs, not JIT."""
    cfg = sgd.RunConfig(eta=0.2, T=64, seed=1, trials=2)
    sgd.run_trials(sgd.asym_quad_bump(0.3), sgd.uniform_noise(1.0), cfg, 1.0)
    sgd.run_trials(sgd.quadratic(1.0), sgd.gaussian_noise(1.0), cfg, 1.0)
    yield


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
