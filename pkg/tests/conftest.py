import random

import pytest
from hypothesis import settings

from kstab.toric import facet_description

from .helpers import VERTICES

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def polytopes():
    return {name: facet_description(v) for name, v in VERTICES.items()}


@pytest.fixture
def rng():
    return random.Random(20240611)
