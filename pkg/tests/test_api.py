"""Tests for the FastAPI backend"""

import sys
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.api.main import app
from src.estimators.covariance import matrix_frame

NN_MODEL = {"kind": "nearest-neighbor", "d": 1, "N": 64, "gammas": [1.0], "masses": [1.0]}


@pytest.fixture
def client():
    with TestClient(app) as test_client:
        yield test_client


def test_root_and_health(client):
    assert client.get("/").json() == {"status": "ok", "service": "lattice-kinetics API"}
    health = client.get("/health").json()
    assert health["status"] == "healthy"
    assert health["settings_loaded"] is True


def test_validate_model(client):
    response = client.post("/validate-model", json={"model": NN_MODEL})
    assert response.status_code == 200
    body = response.json()
    assert body["success"] is True
    assert "E3" in body["result"]["conditions"]


def test_validate_model_reports_errors(client):
    unstable = {"d": 1, "n": 1, "N": 16, "entries": [{"offset": [0], "matrix": [[-1.0]]}]}
    body = client.post("/validate-model", json={"model": unstable}).json()
    assert body["success"] is False
    assert body["error"]


def test_validate_profile(client):
    profile = {"kind": "wave-packet", "params": {"center": [0.0], "width": 4.0}}
    body = client.post(
        "/validate-profile", json={"model": NN_MODEL, "profile": profile, "positions": [[0.0], [2.0]]},
    ).json()
    assert body["success"] is True
    assert "I2" in body["result"]


def test_diff_of_identical_reports(client):
    rows = matrix_frame("covariance", ["0", "1"], np.eye(2)[None].repeat(2, axis=0)).to_dict(orient="records")
    body = client.post("/diff", json={"empirical": rows, "theory": rows}).json()
    assert body["success"] is True
    assert body["result"]["passed"] is True
    assert body["result"]["failures"] == []
