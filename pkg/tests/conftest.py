import numpy as np
import pytest

from aniso_lp.dilation import make_dilation_group
from aniso_lp.fields import GridSpec, SpatialField, random_test_function

DIAG12 = np.diag([1.0, 2.0])


@pytest.fixture(scope="session")
def G_iso():
    return make_dilation_group(np.eye(2))


@pytest.fixture(scope="session")
def G12():
    return make_dilation_group(DIAG12)


@pytest.fixture(scope="session")
def grid64():
    return GridSpec.cube(2, 16.0, 64)


@pytest.fixture(scope="session")
def grid128():
    return GridSpec.cube(2, 16.0, 128)


def mode(grid, k):
    """``exp(2 pi i <x, k/L>)`` sampled on ``grid``."""
    xi = np.asarray(k, dtype=float) / np.asarray(grid.extent)
    return SpatialField(grid, np.exp(2j * np.pi * grid.coords() @ xi)), xi


def family(G, grid, n, eps=0.125):
    return np.stack([random_test_function(s, G, grid, eps).samples for s in range(n)])
