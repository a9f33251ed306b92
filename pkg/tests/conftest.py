# tests/conftest.py
import math
import os

os.environ['PRESSURELAB_ENV'] = 'testing'

import pytest  # noqa: E402

from pressurelab.models.measure import BernoulliMeasure, MixtureMeasure  # noqa: E402
from pressurelab.models.subshift import Potential, Subshift  # noqa: E402
from pressurelab.services import builtins  # noqa: E402

GOLDEN_RATIO = (1 + math.sqrt(5)) / 2


def binary_entropy(p):
    return -(p * math.log(p) + (1 - p) * math.log(1 - p))


@pytest.fixture
def full2():
    return Subshift.full(2)


@pytest.fixture
def golden():
    return Subshift.golden_mean()


@pytest.fixture
def zero2(full2):
    return Potential.constant(full2, 0.0)


@pytest.fixture
def half(full2):
    return BernoulliMeasure(full2, (0.5, 0.5))


@pytest.fixture
def b09(full2):
    return BernoulliMeasure(full2, (0.9, 0.1))


@pytest.fixture
def half_09_mixture(half, b09):
    return MixtureMeasure((0.5, 0.5), (half, b09))


@pytest.fixture
def catalog_measures():
    return builtins.measures()


@pytest.fixture
def catalog_models():
    return builtins.models()
