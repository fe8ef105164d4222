"""HTTP service: endpoint contracts and error mapping."""

import warnings

import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient

from dgmm.service import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json()["status"] == "ok"


def test_potential_check_endpoint(client):
    r = client.post("/potential/check", json={
        "potential": {"kind": "ripple", "sigma": 0.2, "seed": 1}})
    assert r.status_code == 200
    body = r.json()
    assert body["perturbation"]["sigma"] == pytest.approx(0.2, abs=5e-3)
    assert body["growth"]["C"] > 1.0


def test_geodesic_endpoint_with_curve(client):
    r = client.post("/geodesic", json={"n_points": 101, "refine": False,
                                       "include_curve": True})
    assert r.status_code == 200
    body = r.json()
    assert body["distance"] == pytest.approx(2.0, abs=0.05)
    assert body["curve_csv"].startswith("s,M11")


def test_profile1d_endpoint(client):
    r = client.post("/profile1d", json={"half_len": 5.0, "n_points": 300,
                                        "include_profile": True})
    assert r.status_code == 200
    body = r.json()
    assert body["K"] == pytest.approx(2.0, abs=0.03)
    assert body["equipartition_ratio"] < 0.01
    assert body["profile_csv"].startswith("s,g1,g2")


def test_cell2d_endpoint(client):
    r = client.post("/cell2d", json={"grid": 32})
    assert r.status_code == 200
    assert r.json()["energy"] == pytest.approx(2.0, abs=0.05)


def test_glue_translate_endpoint(client):
    r = client.post("/glue", json={
        "construction": "translate",
        "params": {"beta": 0.05, "n2": 257}})
    assert r.status_code == 200
    body = r.json()
    assert body["construction"] == "translate"
    assert body["report"]["excess"] > 0.0


def test_verify_endpoint(client):
    r = client.post("/verify", json={"grid": 32, "skip_cell": True})
    assert r.status_code == 200
    body = r.json()
    assert body["verdict"] == "pass"
    assert body["report"]["margin"] == pytest.approx(4.0, abs=0.1)


def test_sweep_endpoint_returns_files_inline(client):
    r = client.post("/sweep", json={
        "config": {"sweeps": [{"name": "b", "kind": "beta",
                               "params": {"n2": 257}}]}})
    assert r.status_code == 200
    body = r.json()
    assert not body["manifest"]["failures"]
    assert "b.csv" in body["files"]
    assert "manifest.json" in body["files"]


def test_domain_errors_map_to_422(client):
    # sigma = 1.2 is a domain error raised by the potential factory
    r = client.post("/potential/check", json={
        "potential": {"kind": "ripple", "sigma": 1.2, "seed": 0}})
    assert r.status_code == 400  # InputError from from_config
    body = r.json()
    assert body["error"] == "InputError"
    # a structurally invalid body is rejected by validation with 422
    r2 = client.post("/cell2d", json={"grid": "not-a-number"})
    assert r2.status_code == 422


def test_glue_midpoint_mismatch_maps_to_422(client):
    r = client.post("/glue", json={
        "construction": "combined",
        "params": {"shift_phi": 0.0, "shift_psi": 0.1, "h_tilde": 0.1,
                   "n2": 257}})
    assert r.status_code == 422
    assert r.json()["error"] == "MidpointTooFar"
