import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from stripelab.geometry import PeriodicSet1D
from stripelab.kernels import ModelParams

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def p25():
    return ModelParams(2, 5)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@st.composite
def periodic_sets(draw, max_intervals=6, min_spacing=0.02):
    """Periodic sets whose widths and gaps are all at least ``min_spacing * L``."""
    L = draw(st.floats(0.5, 12.0))
    n = draw(st.integers(1, max_intervals))
    raw = draw(st.lists(st.floats(min_spacing, 1.0), min_size=2 * n, max_size=2 * n))
    spacing = np.array(raw) / sum(raw) * L
    if spacing.min() < min_spacing * L / 4:
        spacing = np.maximum(spacing, min_spacing * L / 4)
        spacing *= L / spacing.sum()
    shift = draw(st.floats(0.0, 1.0)) * L
    pts = shift + np.concatenate([[0.0], np.cumsum(spacing)[:-1]])
    return PeriodicSet1D(L, pts.reshape(-1, 2))
