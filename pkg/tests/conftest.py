import os
from pathlib import Path

import numpy as np
import pytest

from alrpool.datasets import Column, Dataset

DATA_ENV = "ALRPOOL_DATA"


def make_dataset(X, y=None, name="test"):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    cols = tuple(Column(name=f"x{j}") for j in range(X.shape[1]))
    return Dataset(name=name, features=X, labels=y, columns=cols)


@pytest.fixture
def data_dir():
    """Directory holding the public benchmark CSVs (see scripts/fetch_benchmark_data.py)."""
    return Path(os.environ.get(DATA_ENV, Path(__file__).resolve().parent.parent / "data"))


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "acceptance_data: needs the public benchmark CSVs in data/ (fetch script in scripts/)",
    )
    config.addinivalue_line("markers", "slow: long-running acceptance checks")
