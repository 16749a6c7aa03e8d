import numpy as np
import pytest

from intgarch import SimConfig, TABLE1_MODELS, IntGarchParams, simulate

# pinned seeds for the long evaluation paths shared by several test modules
MODEL_I_SEED = 3
MODEL_II_SEED = 103
LOW_K_SEED = 12
LONG_T = 10**6
LONG_BURN = 10**4


@pytest.fixture(scope="session")
def model_i():
    return TABLE1_MODELS["I"]

@pytest.fixture(scope="session")
def model_ii():
    return TABLE1_MODELS["II"]


@pytest.fixture(scope="session")
def model_i_path(model_i):
    return simulate(SimConfig(params=model_i, length=LONG_T, seed=MODEL_I_SEED, burn_in=LONG_BURN))


@pytest.fixture(scope="session")
def model_ii_path(model_ii):
    return simulate(SimConfig(params=model_ii, length=LONG_T, seed=MODEL_II_SEED, burn_in=LONG_BURN))


@pytest.fixture(scope="session")
def low_k_path(model_i):
    params = IntGarchParams(
        k=0.01, mu=model_i.mu, alpha=model_i.alpha, beta=model_i.beta, gamma=model_i.gamma
    )
    return simulate(SimConfig(params=params, length=LONG_T, seed=LOW_K_SEED, burn_in=LONG_BURN))


def block_se(values: np.ndarray, stat, blocks: int = 50) -> float:
    """Monte Carlo standard error of a path statistic via batch means."""
    values = np.asarray(values)
    n = (len(values) // blocks) * blocks
    parts = values[:n].reshape(blocks, -1)
    per_block = np.array([stat(b) for b in parts])
    return float(per_block.std(ddof=1) / np.sqrt(blocks))
