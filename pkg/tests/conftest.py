import numpy as np
import pytest

from rytov import DoIGrid, PhysicsConfig, SystemConfig, make_layout


@pytest.fixture(scope="session")
def cfg():
    return PhysicsConfig(frequency=2.4e9)


@pytest.fixture(scope="session")
def lam(cfg):
    return cfg.wavelength


@pytest.fixture(scope="session")
def small_system(cfg):
    """Cheap geometry for pipeline tests: 10 nodes, 48x48 forward grid,
    20x20 inverse grid."""
    return SystemConfig(physics=cfg, doi_size=(1.5, 1.5),
                        forward_grid=(48, 48), inverse_grid=(20, 20),
                        node_count=10, ring_side=3.0)


@pytest.fixture(scope="session")
def default_layout(cfg):
    return make_layout(40, 3.0, DoIGrid(1.5, 1.5, 50, 50))


def circle_map(grid, center, radius, eps_value):
    from rytov import PermittivityMap
    eps = np.ones(grid.shape, dtype=complex)
    xg, yg = np.meshgrid(grid.xs, grid.ys)
    eps[((xg - center[0]) ** 2 + (yg - center[1]) ** 2) <= radius ** 2] = eps_value
    return PermittivityMap(grid=grid, eps=eps)
