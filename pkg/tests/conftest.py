import numpy as np
import pytest

from quadstage import default_config


@pytest.fixture
def cfg():
    return default_config()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_rotation(rng) -> np.ndarray:
    """Uniform-ish random proper rotation via QR of a Gaussian matrix."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, 2] = -q[:, 2]
    return q
