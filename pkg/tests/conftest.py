import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from g2calc.fields import GridSpec, generate_field
from g2calc.frame import flat_point, random_gl_point

GAUGE_PARAMS = {"amplitude": 0.02, "max_wave": 1}
CONF_PARAMS = {"amplitude": 0.05, "max_wave": 1}


@pytest.fixture
def rng():
    return np.random.default_rng(20260816)


@pytest.fixture(scope="session")
def flat():
    return flat_point()


@pytest.fixture
def gl_point(rng):
    return random_gl_point(rng)


@pytest.fixture
def gl_batch(rng):
    return random_gl_point(rng, n=16)


@pytest.fixture(scope="session")
def flat_field():
    return generate_field("flat", {}, GridSpec((0,), (8,)), seed=0)


@pytest.fixture(scope="session")
def gauge16():
    return generate_field("gauge_deform", GAUGE_PARAMS, GridSpec((0,), (16,)), seed=3)


@pytest.fixture(scope="session")
def gauge32():
    return generate_field("gauge_deform", GAUGE_PARAMS, GridSpec((0,), (32,)), seed=3)


@pytest.fixture(scope="session")
def conf16():
    return generate_field("conformal", CONF_PARAMS, GridSpec((0,), (16,)), seed=5)


@pytest.fixture(scope="session")
def conf32():
    return generate_field("conformal", CONF_PARAMS, GridSpec((0,), (32,)), seed=5)
