"""HTTP API tests running against the in-process app."""

import numpy as np
import pytest

from spikecca import ModelConfig, SampleSeed, SpikeSpec, sample_spiked

EXAMPLE = {
    "eigenvalues": [0.829, 0.520, 0.359, 0.107, 0.094, 0.038],
    "p": 8,
    "q": 6,
    "n": 44,
}


class TestHealth:
    def test_health(self, client):
        body = client.get("/api/health").json()
        assert body["status"] == "ok"
        assert body["schema_version"] == "1"
        assert body["version"]


class TestLsd:
    def test_constants_and_grid(self, client):
        resp = client.post("/api/lsd", json={"c1": 0.1, "c2": 0.2, "grid_points": 200})
        assert resp.status_code == 200
        body = resp.json()
        assert body["d_minus"] == pytest.approx(0.02, abs=1e-12)
        assert body["d_plus"] == pytest.approx(0.5, abs=1e-12)
        assert body["r_c"] == pytest.approx(1.0 / 6.0, abs=1e-12)
        assert len(body["grid_x"]) == 200
        assert len(body["grid_density"]) == 200
        assert all(d >= 0.0 for d in body["grid_density"])
        # midpoint grid stays strictly inside the support
        assert body["grid_x"][0] > body["d_minus"]
        assert body["grid_x"][-1] < body["d_plus"]
        # trapezoid mass over the open grid is close to one
        mass = np.trapezoid(body["grid_density"], body["grid_x"])
        assert mass == pytest.approx(1.0, abs=0.02)

    def test_no_grid_by_default(self, client):
        body = client.post("/api/lsd", json={"c1": 0.1, "c2": 0.2}).json()
        assert body["grid_x"] == []

    def test_domain_error(self, client):
        resp = client.post("/api/lsd", json={"c1": 0.7, "c2": 0.5})
        assert resp.status_code == 400
        assert resp.json()["error"]["category"] == "model_domain"

    def test_schema_validation(self, client):
        assert client.post("/api/lsd", json={"c1": 0.1}).status_code == 422


class TestEstimate:
    def test_from_eigenvalues(self, client):
        resp = client.post("/api/estimate", json=EXAMPLE)
        assert resp.status_code == 200
        body = resp.json()
        assert body["schema_version"] == "1"
        assert body["p"] == 8 and body["q"] == 6 and body["effective_n"] == 44
        assert body["constants"]["d_plus"] == pytest.approx(0.533316, abs=1e-5)
        assert body["estimate"]["k_hat"] == 1
        assert body["estimate"]["rho_hat"][0] == pytest.approx(0.8637458, abs=1e-6)
        independence = body["reports"][0]
        assert independence["name"] == "independence"
        assert independence["statistic"] == pytest.approx(4.74654, abs=1e-4)
        assert independence["reject"] is True

    def test_eigenvalues_sorted_for_caller(self, client):
        shuffled = {**EXAMPLE, "eigenvalues": [0.038, 0.829, 0.359, 0.107, 0.094, 0.520]}
        body = client.post("/api/estimate", json=shuffled).json()
        assert body["eigenvalues"] == sorted(EXAMPLE["eigenvalues"], reverse=True)

    def test_from_data_blocks(self, client):
        pair = sample_spiked(ModelConfig(20, 10, 300), SpikeSpec((0.8,)), SampleSeed(7))
        x, y = pair.x, pair.y
        payload = {"x": x.tolist(), "y": y.tolist(), "center": False}
        body = client.post("/api/estimate", json=payload).json()
        assert body["effective_n"] == 300
        assert body["estimate"]["k_hat"] == 1
        assert body["estimate"]["r_hat"][0] == pytest.approx(0.8, abs=0.1)

    def test_centering_reduces_effective_n(self, client):
        pair = sample_spiked(ModelConfig(10, 5, 200), SpikeSpec(()), SampleSeed(8))
        x, y = pair.x, pair.y
        body = client.post(
            "/api/estimate", json={"x": x.tolist(), "y": y.tolist()}).json()
        assert body["effective_n"] == 199

    def test_input_mode_is_exclusive(self, client):
        both = {**EXAMPLE, "x": [[1.0, 2.0]], "y": [[3.0, 4.0]]}
        resp = client.post("/api/estimate", json=both)
        assert resp.status_code == 400
        assert "not both" in resp.json()["error"]["message"]
        resp = client.post("/api/estimate", json={"alpha": 0.05})
        assert resp.status_code == 400

    def test_eigenvalues_need_dimensions(self, client):
        resp = client.post(
            "/api/estimate", json={"eigenvalues": EXAMPLE["eigenvalues"], "p": 8})
        assert resp.status_code == 400
        assert resp.json()["error"]["category"] == "data_shape"

    def test_saturated_dimensions_rejected(self, client):
        resp = client.post(
            "/api/estimate", json={**EXAMPLE, "n": 14})
        assert resp.status_code == 400
        assert resp.json()["error"]["category"] == "data_shape"

    def test_rank_deficient_data(self, client):
        x = np.zeros((4, 50))
        y = np.ones((3, 50))
        resp = client.post(
            "/api/estimate", json={"x": x.tolist(), "y": y.tolist(), "center": False})
        assert resp.status_code == 422
        assert resp.json()["error"]["category"] == "rank_deficiency"

    def test_malformed_payload(self, client):
        assert client.post("/api/estimate", json={"x": "nope"}).status_code == 422


class TestStudy:
    def test_preset_with_overrides(self, client):
        resp = client.post(
            "/api/study", json={"preset": "null-esd", "reps": 3, "seed": 17})
        assert resp.status_code == 200
        body = resp.json()
        assert body["study"] == "null"
        assert body["rows"][0]["reps"] == 3
        assert body["meta"]["root_seed"] == 17
        assert body["csv"].startswith("p,q,n,reps")

    def test_inline_config(self, client):
        config = {
            "study": "k0",
            "scenarios": [{"p": 10, "q": 5, "n": 100, "spikes": [0.8]}],
            "reps": 4,
            "seed": 2,
        }
        body = client.post("/api/study", json={"config": config}).json()
        assert body["study"] == "k0"
        assert len(body["rows"]) == 4
        assert sum(body["rows"][0][b] for b in ("le2", "3", "4", "5", "ge6")) == 4

    def test_preset_xor_config(self, client):
        resp = client.post("/api/study", json={})
        assert resp.status_code == 400
        assert "exactly one" in resp.json()["error"]["message"]
        resp = client.post(
            "/api/study",
            json={"preset": "null-esd", "config": {"study": "k0", "reps": 1, "seed": 1}})
        assert resp.status_code == 400

    def test_unknown_preset(self, client):
        resp = client.post("/api/study", json={"preset": "table99"})
        assert resp.status_code == 400
        assert resp.json()["error"]["category"] == "config"
        assert "table99" in resp.json()["error"]["message"]

    def test_config_override_merge(self, client):
        config = {
            "study": "gaps",
            "reps": 10**4,
            "seed": 1870,
            "options": {"j1_min": 2, "j1_max": 2},
        }
        a = client.post("/api/study", json={"config": config}).json()
        b = client.post("/api/study", json={"config": config, "seed": 99}).json()
        assert a["meta"]["root_seed"] == 1870
        assert b["meta"]["root_seed"] == 99
        assert a["rows"] != b["rows"]
