import sys
from importlib import resources
from pathlib import Path

import pytest

from zk3color import ApparatusParams, parse_dimacs

sys.path.insert(0, str(Path(__file__).parent))  # make tests.oracle importable as oracle


def graph_file(name: str) -> Path:
    return Path(str(resources.files("zk3color") / "data" / name))


def load_graph(name: str):
    return parse_dimacs(graph_file(name).read_text())


@pytest.fixture(scope="session")
def params() -> ApparatusParams:
    return ApparatusParams()


@pytest.fixture(scope="session")
def k3():
    return load_graph("k3.col")


@pytest.fixture(scope="session")
def k4():
    return load_graph("k4.col")


@pytest.fixture(scope="session")
def c5():
    return load_graph("c5.col")


@pytest.fixture(scope="session")
def petersen():
    return load_graph("petersen.col")


@pytest.fixture(scope="session")
def w5():
    return load_graph("w5.col")
