import numpy as np
import pytest

from crestwave.dynamics import WaveState
from crestwave.sampling import random_admissible_pair


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def admissible_state(n, rng, **kw):
    p, zt = random_admissible_pair(n, rng, **kw)
    return WaveState(0.0, p, zt)
