import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("ci", deadline=None, max_examples=40)
settings.load_profile("ci")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_state(model, rng, scale=1.0, smooth=4.0):
    """Random smooth state with decaying spectrum (real mean, real Nyquist irrelevant)."""
    g = model.grid
    k = np.arange(g.n_modes)
    decay = np.exp(-k / smooth)
    c = (rng.standard_normal((model.n_fields, g.n_modes)) + 1j * rng.standard_normal((model.n_fields, g.n_modes)))
    c = scale * c * decay
    c[:, 0] = c[:, 0].real
    if g.has_nyquist:
        c[:, -1] = c[:, -1].real
    return c
