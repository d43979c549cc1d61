import os

import pytest

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


@pytest.fixture
def m1_csv():
    return os.path.join(FIXTURES, "m1_records.csv")


@pytest.fixture
def emd_csv():
    return os.path.join(FIXTURES, "emd.csv")
