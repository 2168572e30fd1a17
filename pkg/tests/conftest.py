import json

import numpy as np
import pytest

from latent_geometry_search.geometry.blanusa import compute_constants
from latent_geometry_search.geometry.gh_estimator import preset_table
from latent_geometry_search.search.search_space import GraphVariant, build_graph, enumerate_signatures


@pytest.fixture(scope="session")
def embedding():
    """Embedding constants at the default resolutions."""
    return compute_constants(20000, 1e-5)


@pytest.fixture(scope="session")
def coarse_embedding():
    return compute_constants(2000, 1e-4)


@pytest.fixture(scope="session")
def gh_table():
    return preset_table()


@pytest.fixture(scope="session")
def graph_two(gh_table):
    return build_graph(enumerate_signatures(2), gh_table, GraphVariant.GH_WEIGHTED)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def config_file(tmp_path):
    """A config.json that keeps log files out of the working tree."""
    path = tmp_path / "config.json"
    path.write_text(json.dumps({
        "schema_version": 1,
        "logging": {"level": "WARNING", "dir": str(tmp_path / "logs"), "file": False},
        "search": {"budget": 12, "seeds": [0, 1], "n_init": 3},
        "bench": {"factors": 3, "seed": 0, "pad_euclidean": True},
    }))
    return path
