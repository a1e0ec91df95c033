import numpy as np
import pytest

from fracvisco.fem import ElasticParams, assemble, build_rect_mesh, side_traction
from fracvisco.mlf import KernelParams


@pytest.fixture(scope="session")
def kernel_sec6():
    return KernelParams(alpha=2.0 / 3.0, tau=1.0, gamma=0.5)


@pytest.fixture(scope="session")
def mesh8():
    return build_rect_mesh(8, 8)


@pytest.fixture(scope="session")
def elastic_soft():
    return ElasticParams(mu=1.0, lam=1.0, rho=3000.0)


@pytest.fixture(scope="session")
def downward_traction():
    return side_traction({"right": (0.0, -1.0)})


@pytest.fixture(scope="session")
def loaded_system8(mesh8, elastic_soft, downward_traction):
    return assemble(mesh8, elastic_soft, traction=downward_traction)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
