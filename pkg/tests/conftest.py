import numpy as np
import pytest

from latticebec import from_config, presets


@pytest.fixture(scope="session")
def p_deph():
    """1D Cs-in-Rb dephasing parameter set."""
    return from_config(presets.get("dephasing_1d"))


@pytest.fixture(scope="session")
def p_cluster():
    """1D K-in-Rb clustering parameter set."""
    return from_config(presets.get("cluster_1d"))


@pytest.fixture(scope="session")
def p_cluster2d():
    return from_config(presets.get("cluster_2d"))


@pytest.fixture(scope="session")
def p_transport():
    return from_config(presets.get("transport_1d"))


@pytest.fixture(scope="session")
def p_bloch():
    return from_config(presets.get("bloch_1d"))


@pytest.fixture(scope="session")
def p_gate():
    """3D Na-in-Cs gate parameter set (T = 0)."""
    return from_config(presets.get("gate_3d"))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
