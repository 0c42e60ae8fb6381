from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from mppkit.data import Dataset, FeatureSchema, FeatureSpec

FIXTURE_DIR = Path(__file__).parent / "fixtures"


def make_dataset(x, y, n_classes: int = 3) -> Dataset:
    """Wrap raw arrays in a Dataset with a generic continuous schema."""
    x = np.asarray(x, dtype=float)
    schema = FeatureSchema(
        features=tuple(FeatureSpec(f"f{i}", "continuous") for i in range(x.shape[1])),
        label_name="label",
        n_classes=n_classes,
    )
    return Dataset(schema=schema, x=x, y=np.asarray(y, dtype=np.int64))


@pytest.fixture
def fixture_dir() -> Path:
    return FIXTURE_DIR
