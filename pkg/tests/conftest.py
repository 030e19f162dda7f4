import pathlib

import numpy as np
import pytest

from omap_eval import ClassIndex, all_pairs_distance, parse_edge_list

DATA_DIR = pathlib.Path(__file__).parent / "data"

PATH_GRAPH_TEXT = "a\nb\nc\nd\n\na b\nb c\nc d\n"


@pytest.fixture(scope="session")
def data_dir() -> pathlib.Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def path_graph():
    return parse_edge_list(PATH_GRAPH_TEXT)


@pytest.fixture(scope="session")
def path_classes():
    return ClassIndex(ids=("a", "b", "c", "d"), names=("a", "b", "c", "d"))


@pytest.fixture(scope="session")
def path_dist(path_graph, path_classes):
    return all_pairs_distance(path_graph, path_classes)


@pytest.fixture()
def rng():
    return np.random.default_rng(20230817)
