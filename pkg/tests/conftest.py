import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from recoilspec import presets


@pytest.fixture(scope="session")
def mg_scenario():
    """Full-size transition-broadened scenario (tables cached per session)."""
    return presets.mg24_ca40()


@pytest.fixture(scope="session")
def mgh_scenario():
    """Full-size laser-broadened scenario, 50 MHz laser width."""
    return presets.mgh24_ca40()
