"""
HTTP API tests
"""
import numpy as np
import pytest
from fastapi.testclient import TestClient

from app.main import app
from conftest import sine


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def grid_json(f) -> dict:
    return f.model_dump(mode="json", by_alias=True)


def flat_profile(n: int = 200, **fields) -> dict:
    return {"m": 1, "r0": 1.0, "q0": 0.0, "q": {"n": n, "values": [0.0] * (n + 1)}, **fields}


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "healthy"


def test_root(client):
    assert client.get("/").json()["health"] == "/health"


def test_forward(client):
    response = client.post("/api/spectra/forward", json={"profile": flat_profile(), "n_modes": 3})
    assert response.status_code == 200
    body = response.json()
    assert body["bc"]["kind"] == "dirichlet"
    assert np.allclose(body["mu"], (np.arange(1, 4) * np.pi) ** 2, rtol=1e-6)


def test_forward_rejects_bad_boundary_kind(client):
    response = client.post(
        "/api/spectra/forward",
        json={"profile": flat_profile(), "bc": {"kind": "periodic"}, "n_modes": 3},
    )
    assert response.status_code == 422


def test_transform(client):
    response = client.post(
        "/api/spectra/transform",
        json={"profile": flat_profile(100, m=2, q0=0.4), "bc": {"kind": "robin", "a": 1.0, "b": 1.0}},
    )
    assert response.status_code == 200
    body = response.json()
    assert body["c0"] == pytest.approx(0.16)
    assert body["bc"]["a"] == pytest.approx(1.4)


def test_verify_b_needs_mixed_data(client):
    data = client.post("/api/spectra/forward", json={"profile": flat_profile(), "n_modes": 3}).json()
    response = client.post("/api/spectra/verify-b", json={"data": data})
    assert response.status_code == 400


def test_verify_b_on_mixed_data(client):
    data = client.post(
        "/api/spectra/forward",
        json={"profile": flat_profile(), "bc": {"kind": "mixed", "b": 0.0}, "n_modes": 6},
    ).json()
    response = client.post("/api/spectra/verify-b", json={"data": data, "n_terms": 6})
    assert response.status_code == 200
    assert response.json()["estimate"] == pytest.approx(0.0, abs=1e-5)


def test_curvature_map_and_invert(client):
    q = sine(0.2, 2, 400)
    mapped = client.post("/api/geometry/curvature-map", json={"q": grid_json(q)})
    assert mapped.status_code == 200
    assert mapped.json()["K0"] == pytest.approx(0.08, abs=1e-6)

    back = client.post("/api/geometry/curvature-invert", json={"xi": mapped.json()["xi"]})
    assert back.status_code == 200
    assert np.max(np.abs(np.array(back.json()["q"]["values"]) - q.values)) <= 1e-6


def test_curvature_invert_rejects_nonzero_mean(client):
    xi = {"n": 100, "values": [1.0] * 101}
    assert client.post("/api/geometry/curvature-invert", json={"xi": xi}).status_code == 400


def test_embed(client):
    t = np.linspace(0.0, 1.0, 401)
    response = client.post("/api/geometry/embed", json={"r": {"n": 400, "values": list(1.0 + 0.6 * t)}})
    assert response.status_code == 200
    assert response.json()["x0"] == pytest.approx(0.8, abs=1e-10)


def test_embed_rejects_steep_profile(client):
    t = np.linspace(0.0, 1.0, 401)
    response = client.post("/api/geometry/embed", json={"r": {"n": 400, "values": list(1.0 + 2.0 * t)}})
    assert response.status_code == 400


def test_malformed_grid_function(client):
    response = client.post("/api/geometry/embed", json={"r": {"n": 10, "values": [1.0, 1.0]}})
    assert response.status_code == 422
