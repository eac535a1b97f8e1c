import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from synth import synth_carrier, ellipse_curve  # noqa: E402


@pytest.fixture(scope="session")
def short_carrier():
    """~3.7 s at 44100 Hz; 64+ frames at w=1024."""
    return synth_carrier(160 * 1024 + 511, seed=101)


@pytest.fixture(scope="session")
def medium_carrier():
    """~12 s at 44100 Hz."""
    return synth_carrier(520 * 1024, seed=7)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def unit_circle():
    return ellipse_curve(1.0, 1.0, n=400)
