import numpy as np
import pytest
from hypothesis import settings

from margin_forge import FeatureVector

settings.register_profile("thorough", max_examples=200)
settings.register_profile("fast", max_examples=25)


def random_dataset(rng, n, d, scale=1.0):
    """Uniform features and coin-flip labels with both classes guaranteed."""
    features = rng.uniform(-scale, scale, size=(n, d))
    labels = np.where(rng.random(n) < 0.5, 1, -1)
    if (labels > 0).all():
        labels[0] = -1
    if (labels < 0).all():
        labels[0] = 1
    return [(FeatureVector.dense(row), int(y)) for row, y in zip(features, labels)]


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
