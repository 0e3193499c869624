import numpy as np
import pytest

from ris_ofdm.config import ScenarioConfig


@pytest.fixture(scope="session")
def cfg():
    return ScenarioConfig()


@pytest.fixture(scope="session")
def defaults(cfg):
    """Objects built from the default parameters."""
    class T:
        ris = cfg.ris()
        grid = cfg.grid()
        budget = cfg.budget()
        bs = cfg.bs_position()
        codebook = cfg.codebook()
        outage = cfg.outage()
        frame = cfg.frame()
    return T


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
