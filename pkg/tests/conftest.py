import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make tests/oracles.py importable

DATA_ENV = "BITSVM_DATA_DIR"


def data_dir() -> Path:
    return Path(os.environ.get(DATA_ENV, Path(__file__).resolve().parent.parent / "data"))


@pytest.fixture(scope="session")
def usps_paths():
    """Paths of the usps train/test files; skips when they are not present.

    Fetch them with scripts/fetch_usps.py (needs general network access) or
    drop LIBSVM-format files at data/usps and data/usps.t, or point
    BITSVM_DATA_DIR at a directory holding them.
    """
    train = data_dir() / "usps"
    test = data_dir() / "usps.t"
    if not train.exists() or not test.exists():
        pytest.skip(
            f"usps dataset not available: expected {train} and {test}; "
            "run scripts/fetch_usps.py on a machine with network access"
        )
    return train, test
