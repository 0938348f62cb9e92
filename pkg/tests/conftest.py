import io
import json
import logging

import numpy as np
import pytest

from splitkit.subspaces import (
    bernstein_distribution,
    coordinate_subspace,
    dks_distribution,
    efron_stein_distribution,
    point_mass,
)

BERNSTEIN_LAMBDA = (2.0 - np.sqrt(2.0)) / 4.0


@pytest.fixture(autouse=True)
def _log_sink():
    """Keep package logs off the captured stderr; error objects stay on the last line."""
    sink = io.StringIO()
    for handler in logging.getLogger("splitkit").handlers:
        if isinstance(handler, logging.StreamHandler):
            handler.setStream(sink)
    yield sink


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def bernstein_xi():
    return bernstein_distribution()


@pytest.fixture
def es_xi():
    return efron_stein_distribution(3)


@pytest.fixture
def dks_xi():
    return dks_distribution(4, 2)


@pytest.fixture
def axis_xi():
    return point_mass(coordinate_subspace([0], 2))


@pytest.fixture
def write_json(tmp_path):
    """Write a payload as JSON under tmp_path and return the path."""

    def _write(name, payload):
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return path

    return _write


@pytest.fixture
def bernstein_scene():
    return {
        "ambient_dim": 2,
        "seed": 7,
        "xi": {
            "atoms": [
                {"basis": [[1.0, 0.0]], "weight": 0.5},
                {"basis": [[1.0, 1.0]], "weight": 0.5},
            ]
        },
        "measures": {
            "bath": {"kind": "gaussian", "mean": [0.0, 0.0], "cov": [[1.0, 0.0], [0.0, 1.0]]},
            "initial": {"kind": "gaussian", "mean": [2.0, 2.0], "cov": [[1.0, 0.0], [0.0, 1.0]]},
        },
        "dynamics": {"rate": 1.0, "t_end": 1.0, "n_paths": 200, "times": [0.0, 0.5, 1.0]},
    }


@pytest.fixture
def es_scene():
    return {
        "ambient_dim": 3,
        "seed": 11,
        "xi": {
            "atoms": [
                {"basis": [[0, 1, 0], [0, 0, 1]], "weight": 1 / 3},
                {"basis": [[1, 0, 0], [0, 0, 1]], "weight": 1 / 3},
                {"basis": [[1, 0, 0], [0, 1, 0]], "weight": 1 / 3},
            ]
        },
        "measures": {
            "gamma": {"kind": "gaussian", "mean": [0, 0, 0], "cov": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]},
        },
    }
