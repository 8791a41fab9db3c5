import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from lipcap.geom import DyadicSquare, RasterSet

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

UNIT = DyadicSquare(0, 0, 0)


@st.composite
def rasters(draw, min_depth=1, max_depth=4, nonempty=False):
    depth = draw(st.integers(min_depth, max_depth))
    size = 1 << depth
    cells = draw(st.sets(st.tuples(st.integers(0, size - 1), st.integers(0, size - 1)),
                         min_size=1 if nonempty else 0, max_size=min(size * size, 40)))
    return RasterSet.from_cells(UNIT, depth, sorted(cells))


betas = st.floats(0.05, 0.95)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
