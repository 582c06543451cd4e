import numpy as np
import pytest

FREQ_100GHZ = 100e9
C0 = 299_792_458.0
WAVELENGTH_100GHZ = C0 / FREQ_100GHZ


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)
