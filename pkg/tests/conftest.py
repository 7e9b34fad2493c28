import numpy as np
import pytest

from cfrx import FeatureSchema, FeatureSpec, default_hamd_schema


@pytest.fixture
def hamd_schema():
    return default_hamd_schema()


@pytest.fixture
def tiny_schema():
    """Three ordinal features with mixed level counts."""
    return FeatureSchema(features=(
        FeatureSpec(name="a", kind="ordinal", max_level=2),
        FeatureSpec(name="b", kind="ordinal", max_level=4),
        FeatureSpec(name="c", kind="ordinal", max_level=1),
    ))


@pytest.fixture
def mixed_schema():
    """One ordinal plus one continuous feature."""
    return FeatureSchema(features=(
        FeatureSpec(name="score", kind="ordinal", max_level=3),
        FeatureSpec(name="age", kind="continuous", min=0.0, max=100.0),
    ))


class ConstantModel:
    """Predicts the same probability everywhere."""

    def __init__(self, p, width):
        self.p = p
        self.width = width

    def predict_proba(self, X):
        X = np.atleast_2d(X)
        return np.full(len(X), self.p)


@pytest.fixture
def constant_model():
    return ConstantModel
