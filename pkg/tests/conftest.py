# Third-party
import numpy as np
import pytest

# Application-specific
from app.dependencies import get_settings
from app.services.channel_service import ChannelService
from app.services.net_service import NetService
from app.utils.linalg import random_density_matrix
from app.utils.seeding import make_rng

settings = get_settings()

# --------------------------------------------------------------------
# Random streams: every test gets its own seeded generator
# --------------------------------------------------------------------
@pytest.fixture(scope="function")
def rng():
    return make_rng(20240611)


@pytest.fixture(scope="function")
def seeded():
    """Factory for independent generators by seed."""
    return make_rng

# -------------------
# Small channels
# -------------------
@pytest.fixture(scope="function")
def channel_222(rng):
    return ChannelService.random_subspace_channel(2, 2, 2, rng)


@pytest.fixture(scope="function")
def channels_222(seeded):
    return [ChannelService.random_subspace_channel(2, 2, 2, seeded(1000 + i)) for i in range(20)]


@pytest.fixture(scope="function")
def qubit_identity():
    return ChannelService.identity_channel(2)


@pytest.fixture(scope="function")
def qubit_constant():
    return ChannelService.constant_channel(2, 2)

# -------------------
# Nets
# -------------------
@pytest.fixture(scope="session")
def net_l1():
    return NetService.build_theta_net(1, 0.25)


@pytest.fixture(scope="session")
def net_l2_quotient():
    return NetService.build_theta_net(2, 0.25, phase_quotient=True)


@pytest.fixture(scope="session")
def net_l2():
    return NetService.build_theta_net(2, 0.25)

# ---------------------------
# Output locations
# ---------------------------
@pytest.fixture(scope="function")
def output_dir(tmp_path, monkeypatch):
    """Point MOE_OUTPUT_DIR at a per-test directory."""
    target = tmp_path / "reports"
    monkeypatch.setenv("MOE_OUTPUT_DIR", str(target))
    get_settings.cache_clear()
    yield target
    get_settings.cache_clear()


@pytest.fixture(scope="function")
def random_state(rng):
    """Full-rank density matrix factory."""
    def make(d: int) -> np.ndarray:
        return random_density_matrix(d, rng)
    return make
