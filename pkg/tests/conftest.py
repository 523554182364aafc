import numpy as np
import pytest

from quant_helly.geom_core import HPolytope
from quant_helly.utils import make_rng


@pytest.fixture
def square():
    """[-1, 1]^2"""
    return HPolytope.box([-1.0, -1.0], [1.0, 1.0])


@pytest.fixture
def unit_square():
    return HPolytope.box([0.0, 0.0], [1.0, 1.0])


@pytest.fixture
def triangle():
    """Unit right triangle conv{(0,0), (1,0), (0,1)}."""
    return HPolytope.from_arrays([[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]], [0.0, 0.0, 1.0])


@pytest.fixture
def octagon():
    return HPolytope.regular_polygon(8, 1.0)


@pytest.fixture
def rng():
    return make_rng(12345)
