import pytest

from offsim.cli import load_profile_arg
from offsim.workload import load_table2_tasks


@pytest.fixture(scope="session")
def one_dma():
    return load_profile_arg("1dma")


@pytest.fixture(scope="session")
def two_dma():
    return load_profile_arg("2dma")


@pytest.fixture(scope="session")
def synthetic():
    return {t.id: t for t in load_table2_tasks()}
